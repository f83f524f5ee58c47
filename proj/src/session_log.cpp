#include "graphstage/session_log.hpp"

#include "graphstage/service.hpp"

#include <json.hpp>

#include <sstream>

namespace graphstage {

using Json = nlohmann::ordered_json;

namespace {

Json options_to_json(const PipelineOptions& o) {
    const StagingConfig& s = o.staging;
    const LayoutParams& l = o.layout;
    return Json{{"staging",
                 {{"strategy", to_token(s.strategy)},
                  {"t_i", s.t_i},
                  {"n_events", s.n_events},
                  {"t_d", s.t_d},
                  {"t_m", s.t_m},
                  {"t_a", s.t_a},
                  {"t_p", s.t_p}}},
                {"layout",
                 {{"ideal_edge_length", l.ideal_edge_length},
                  {"repulsion_constant", l.repulsion_constant},
                  {"central_strength", l.central_strength},
                  {"step_size", l.step_size},
                  {"cooling_factor", l.cooling_factor},
                  {"energy_threshold", l.energy_threshold},
                  {"max_refine_iters", l.max_refine_iters},
                  {"layout_iters", l.layout_iters},
                  {"max_displacement", l.max_displacement}}},
                {"seed", o.seed},
                {"easing", o.easing == Easing::Linear ? "linear" : "slow_in_slow_out"},
                {"origin", o.origin}};
}

PipelineOptions options_from_json(const Json& j) {
    PipelineOptions o;
    const Json& s = j.at("staging");
    const auto strategy = strategy_from_token(s.at("strategy").get<std::string>());
    if (!strategy) throw SessionLogError("session log: unknown strategy in header");
    o.staging.strategy = *strategy;
    o.staging.t_i = s.at("t_i").get<Millis>();
    o.staging.n_events = s.at("n_events").get<std::uint32_t>();
    o.staging.t_d = s.at("t_d").get<Millis>();
    o.staging.t_m = s.at("t_m").get<Millis>();
    o.staging.t_a = s.at("t_a").get<Millis>();
    o.staging.t_p = s.at("t_p").get<Millis>();
    const Json& l = j.at("layout");
    o.layout.ideal_edge_length = l.at("ideal_edge_length").get<double>();
    o.layout.repulsion_constant = l.at("repulsion_constant").get<double>();
    o.layout.central_strength = l.at("central_strength").get<double>();
    o.layout.step_size = l.at("step_size").get<double>();
    o.layout.cooling_factor = l.at("cooling_factor").get<double>();
    o.layout.energy_threshold = l.at("energy_threshold").get<double>();
    o.layout.max_refine_iters = l.at("max_refine_iters").get<std::uint32_t>();
    o.layout.layout_iters = l.at("layout_iters").get<std::uint32_t>();
    o.layout.max_displacement = l.at("max_displacement").get<double>();
    o.seed = j.at("seed").get<std::uint64_t>();
    o.easing = j.at("easing").get<std::string>() == "linear" ? Easing::Linear : Easing::SlowInSlowOut;
    o.origin = j.at("origin").get<Millis>();
    return o;
}

Json event_to_json(const GraphEvent& ev) {
    Json j{{"seq", ev.seq}, {"timestamp_ms", ev.timestamp}, {"kind", to_token(ev.kind)}, {"subject_a", ev.a},
           {"subject_b", ev.b}};
    if (ev.label) j["label"] = *ev.label;
    if (ev.synthetic) j["synthetic"] = true;
    return j;
}

GraphEvent event_from_json(const Json& j) {
    GraphEvent ev;
    ev.seq = j.at("seq").get<std::uint64_t>();
    ev.timestamp = j.at("timestamp_ms").get<Millis>();
    const auto kind = event_kind_from_token(j.at("kind").get<std::string>());
    if (!kind) throw SessionLogError("session log: unknown event kind in header");
    ev.kind = *kind;
    ev.a = j.at("subject_a").get<std::string>();
    ev.b = j.at("subject_b").get<std::string>();
    if (j.contains("label")) ev.label = j.at("label").get<std::string>();
    ev.synthetic = j.value("synthetic", false);
    return ev;
}

}  // namespace

// ---------------------------------------------------------------------------

SessionRecorder::SessionRecorder(const std::string& path, const std::vector<GraphEvent>& events,
                                 const PipelineOptions& options)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
    if (!out_) throw SessionLogError("cannot create session log \"" + path + "\"");
    Json header{{"session_log", kSessionLogVersion}, {"options", options_to_json(options)}};
    Json list = Json::array();
    for (const GraphEvent& ev : events) list.push_back(event_to_json(ev));
    header["events"] = std::move(list);
    write(header.dump());
}

void SessionRecorder::write(const std::string& record) {
    out_ << record << '\n';
    out_.flush();
    if (!out_) throw SessionLogError("write failed on session log \"" + path_ + "\"");
}

void SessionRecorder::control(const wire::ControlCommand& cmd, Millis clock) {
    Json j{{"rec", "control"}, {"clock_ms", clock}, {"message", Json::parse(wire::control(cmd))}};
    write(j.dump());
}

void SessionRecorder::output(const std::string& line) { write(Json{{"rec", "out"}, {"line", line}}.dump()); }

void SessionRecorder::finish(Millis final_clock) {
    if (finished_) return;
    finished_ = true;
    write(Json{{"rec", "end"}, {"clock_ms", final_clock}}.dump());
}

// ---------------------------------------------------------------------------

std::vector<std::string> SessionLog::outputs() const {
    std::vector<std::string> out;
    for (const auto& r : records)
        if (const auto* o = std::get_if<Output>(&r)) out.push_back(o->line);
    return out;
}

SessionLog parse_session_log(std::string_view text) {
    SessionLog log;
    std::size_t line_no = 0;
    std::size_t valid = 0;  // records read so far, header included
    bool ended = false;

    auto truncated = [&](const std::string& why) {
        return SessionLogError("truncated session log at line " + std::to_string(line_no) + " (" + why +
                               "); last valid record is #" + std::to_string(valid) + " (line " +
                               std::to_string(valid) + ")");
    };

    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        const bool complete_line = eol != std::string_view::npos;
        if (!complete_line) eol = text.size();
        const std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (ended) throw SessionLogError("session log: data after the end record at line " + std::to_string(line_no));

        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::parse_error&) {
            if (!complete_line || pos >= text.size()) throw truncated("incomplete record");
            throw SessionLogError("session log: malformed record at line " + std::to_string(line_no));
        }
        if (line_no == 1) {
            const int version = j.is_object() ? j.value("session_log", -1) : -1;
            if (version != kSessionLogVersion)
                throw SessionLogError("session log version " + std::to_string(version) + " unsupported (expected " +
                                      std::to_string(kSessionLogVersion) + ")");
            try {
                log.options = options_from_json(j.at("options"));
                for (const Json& ev : j.at("events")) log.events.push_back(event_from_json(ev));
            } catch (const Json::exception& e) {
                throw SessionLogError(std::string("session log: bad header: ") + e.what());
            }
        } else {
            const std::string rec = j.value("rec", "");
            if (rec == "out") {
                log.records.emplace_back(SessionLog::Output{j.at("line").get<std::string>()});
            } else if (rec == "control") {
                try {
                    log.records.emplace_back(SessionLog::Control{j.at("clock_ms").get<Millis>(),
                                                                 wire::parse_control(j.at("message").dump())});
                } catch (const wire::WireError& e) {
                    throw SessionLogError("session log: bad control record at line " + std::to_string(line_no) +
                                          ": " + e.what());
                }
            } else if (rec == "end") {
                log.final_clock = j.at("clock_ms").get<Millis>();
                ended = true;
            } else {
                throw SessionLogError("session log: unknown record type at line " + std::to_string(line_no));
            }
        }
        ++valid;
    }
    if (line_no == 0) throw SessionLogError("session log is empty");
    if (!ended) {
        ++line_no;
        throw truncated("missing end record");
    }
    return log;
}

SessionLog read_session_log(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SessionLogError("cannot read session log \"" + path + "\"");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_session_log(text.str());
}

std::vector<std::string> replay_session(const SessionLog& log) {
    ReplayDriver driver(log.events, log.options);
    std::vector<std::string> out;
    auto append = [&](std::vector<std::string> lines) {
        for (std::string& l : lines) out.push_back(std::move(l));
    };
    for (const auto& r : log.records)
        if (const auto* c = std::get_if<SessionLog::Control>(&r)) append(driver.apply(c->command, c->clock));
    append(driver.advance(log.final_clock));
    return out;
}

std::vector<std::string> verify_session(const SessionLog& log) {
    std::vector<std::string> replayed = replay_session(log);
    const std::vector<std::string> recorded = log.outputs();
    const std::size_t n = std::min(replayed.size(), recorded.size());
    for (std::size_t i = 0; i < n; ++i)
        if (replayed[i] != recorded[i])
            throw SessionLogError("replay diverges at broadcast line " + std::to_string(i + 1));
    if (replayed.size() != recorded.size())
        throw SessionLogError("replay produced " + std::to_string(replayed.size()) + " lines, log has " +
                              std::to_string(recorded.size()));
    return replayed;
}

}  // namespace graphstage
