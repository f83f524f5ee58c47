#include "graphstage/staging.hpp"

#include <json.hpp>

#include <algorithm>

namespace graphstage {

namespace {

/// Start of the t_i-aligned window (counted from `from`) that contains ts;
/// window ends are inclusive.
Millis aligned_window(Millis from, Millis ts, Millis t_i) {
    if (ts <= from) return from;
    const Millis k = (ts - from + t_i - 1) / t_i - 1;
    return from + k * t_i;
}

}  // namespace

StagingEngine::StagingEngine(StagingConfig config, Millis origin)
    : config_(config), window_start_(origin), busy_until_(origin), last_fed_(origin), last_poll_(origin) {
    config_.validate();
}

void StagingEngine::feed(GraphEvent event) {
    if (input_closed_) throw std::logic_error("feed after close_input");
    if (event.timestamp < last_fed_)
        throw std::invalid_argument("timestamp regression: event at " + std::to_string(event.timestamp) +
                                    " ms after event at " + std::to_string(last_fed_) + " ms");
    if (event.timestamp < last_poll_)
        throw std::invalid_argument("event at " + std::to_string(event.timestamp) +
                                    " ms is older than the polled clock " + std::to_string(last_poll_) + " ms");
    last_fed_ = event.timestamp;
    pending_.push_back(std::move(event));
}

void StagingEngine::close_input() { input_closed_ = true; }

std::size_t StagingEngine::count_until(Millis t) const {
    auto it = std::upper_bound(pending_.begin(), pending_.end(), t,
                               [](Millis v, const GraphEvent& ev) { return v < ev.timestamp; });
    return static_cast<std::size_t>(it - pending_.begin());
}

std::optional<StagingEngine::Candidate> StagingEngine::candidate() const {
    const Millis t_i = config_.t_i;
    const std::size_t n = config_.n_events;

    if (pending_.empty()) {
        // Idle hybrid windows converge the existing layout; nothing to converge on an empty graph.
        if (config_.strategy == Strategy::Hybrid && !graph_.empty())
            return Candidate{std::max(window_start_ + t_i, busy_until_), TriggerCause::ConvergenceTick, 0, window_start_};
        return std::nullopt;
    }

    const Millis first = pending_.front().timestamp;
    switch (config_.strategy) {
    case Strategy::TimeBased: {
        const Millis w = aligned_window(window_start_, first, t_i);
        const Millis trigger = std::max(w + t_i, busy_until_);
        return Candidate{trigger, TriggerCause::TimeThreshold, count_until(trigger), w};
    }
    case Strategy::EventBased: {
        const Millis w = std::min(window_start_, first);
        if (pending_.size() >= n)
            return Candidate{std::max(pending_[n - 1].timestamp, busy_until_), TriggerCause::EventThreshold, n, w};
        if (input_closed_)
            return Candidate{std::max({pending_.back().timestamp, busy_until_, window_start_}), TriggerCause::Flush,
                             pending_.size(), w};
        return std::nullopt;
    }
    case Strategy::Hybrid: {
        // Without convergence ticks (empty graph) windows pass silently; realign.
        const Millis w = graph_.empty() ? aligned_window(window_start_, first, t_i) : window_start_;
        Millis earliest = w + t_i;
        if (pending_.size() >= n) earliest = std::min(earliest, pending_[n - 1].timestamp);
        const Millis trigger = std::max(earliest, busy_until_);
        const std::size_t ready = count_until(trigger);
        if (ready >= n) return Candidate{trigger, TriggerCause::EventThreshold, n, std::min(w, first)};
        if (ready > 0) return Candidate{trigger, TriggerCause::TimeThreshold, ready, std::min(w, first)};
        return Candidate{trigger, TriggerCause::ConvergenceTick, 0, w};
    }
    }
    return std::nullopt;
}

std::optional<Millis> StagingEngine::next_trigger() const {
    if (auto c = candidate()) return c->trigger;
    return std::nullopt;
}

std::optional<Stage> StagingEngine::poll(Millis now) {
    last_poll_ = std::max(last_poll_, now);
    const auto cand = candidate();
    if (!cand || cand->trigger > now) return std::nullopt;

    Stage stage;
    stage.config = config_;
    Bin& bin = stage.bin;
    bin.stage_id = next_stage_id_++;
    bin.strategy = config_.strategy;
    bin.window_start = cand->window_start;
    bin.trigger_time = cand->trigger;
    bin.cause = cand->cause;
    bin.events.reserve(cand->count);
    for (std::size_t i = 0; i < cand->count; ++i) {
        bin.events.push_back(std::move(pending_.front()));
        pending_.pop_front();
    }

    stage.diff = compose_stage(bin, graph_);
    apply_diff(graph_, stage.diff);
    stage.timing = stage_timing(stage.diff, config_);
    busy_until_ = cand->trigger + stage.timing.total;
    window_start_ = cand->trigger;

    if (staged_) {
        if (staged_->t_i) config_.t_i = *staged_->t_i;
        if (staged_->n_events) config_.n_events = *staged_->n_events;
        staged_.reset();
    }
    return stage;
}

std::size_t StagingEngine::backlog() const {
    if (config_.strategy == Strategy::TimeBased) return 0;
    return pending_.size() > config_.n_events ? pending_.size() - config_.n_events : 0;
}

void StagingEngine::set_strategy(Strategy s) {
    StagingConfig next = config_;
    next.strategy = s;
    next.validate();
    if (staged_) {
        StagingConfig later = next;
        if (staged_->t_i) later.t_i = *staged_->t_i;
        if (staged_->n_events) later.n_events = *staged_->n_events;
        later.validate();
    }
    config_ = next;
}

void StagingEngine::set_thresholds(std::optional<Millis> t_i, std::optional<std::uint32_t> n_events) {
    StagingConfig next = config_;
    ThresholdChange change = staged_.value_or(ThresholdChange{});
    if (t_i) change.t_i = t_i;
    if (n_events) change.n_events = n_events;
    if (change.t_i) next.t_i = *change.t_i;
    if (change.n_events) next.n_events = *change.n_events;
    next.validate();
    staged_ = change;
}

// ---------------------------------------------------------------------------
// Checkpoint

namespace {

nlohmann::ordered_json event_to_json(const GraphEvent& ev) {
    nlohmann::ordered_json j;
    j["seq"] = ev.seq;
    j["timestamp_ms"] = ev.timestamp;
    j["kind"] = to_token(ev.kind);
    j["subject_a"] = ev.a;
    j["subject_b"] = ev.b;
    j["label"] = ev.label ? nlohmann::ordered_json(*ev.label) : nlohmann::ordered_json(nullptr);
    j["synthetic"] = ev.synthetic;
    return j;
}

GraphEvent event_from_json(const nlohmann::json& j) {
    GraphEvent ev;
    ev.seq = j.at("seq").get<std::uint64_t>();
    ev.timestamp = j.at("timestamp_ms").get<Millis>();
    const auto kind = event_kind_from_token(j.at("kind").get<std::string>());
    if (!kind) throw std::invalid_argument("checkpoint: unknown event kind");
    ev.kind = *kind;
    ev.a = j.at("subject_a").get<std::string>();
    ev.b = j.at("subject_b").get<std::string>();
    if (!j.at("label").is_null()) ev.label = j.at("label").get<std::string>();
    ev.synthetic = j.at("synthetic").get<bool>();
    return ev;
}

nlohmann::ordered_json config_to_json(const StagingConfig& c) {
    nlohmann::ordered_json j;
    j["strategy"] = to_token(c.strategy);
    j["t_i"] = c.t_i;
    j["n_events"] = c.n_events;
    j["t_d"] = c.t_d;
    j["t_m"] = c.t_m;
    j["t_a"] = c.t_a;
    j["t_p"] = c.t_p;
    return j;
}

StagingConfig config_from_json(const nlohmann::json& j) {
    StagingConfig c;
    const auto s = strategy_from_token(j.at("strategy").get<std::string>());
    if (!s) throw std::invalid_argument("checkpoint: unknown strategy");
    c.strategy = *s;
    c.t_i = j.at("t_i").get<Millis>();
    c.n_events = j.at("n_events").get<std::uint32_t>();
    c.t_d = j.at("t_d").get<Millis>();
    c.t_m = j.at("t_m").get<Millis>();
    c.t_a = j.at("t_a").get<Millis>();
    c.t_p = j.at("t_p").get<Millis>();
    return c;
}

}  // namespace

std::string StagingEngine::checkpoint() const {
    nlohmann::ordered_json j;
    j["checkpoint_version"] = kCheckpointVersion;
    j["config"] = config_to_json(config_);
    if (staged_) {
        nlohmann::ordered_json s = nlohmann::ordered_json::object();
        if (staged_->t_i) s["t_i"] = *staged_->t_i;
        if (staged_->n_events) s["n_events"] = *staged_->n_events;
        j["staged"] = s;
    } else {
        j["staged"] = nullptr;
    }
    j["window_start"] = window_start_;
    j["busy_until"] = busy_until_;
    j["last_fed"] = last_fed_;
    j["last_poll"] = last_poll_;
    j["input_closed"] = input_closed_;
    j["next_stage_id"] = next_stage_id_;
    auto& pending = j["pending"] = nlohmann::ordered_json::array();
    for (const GraphEvent& ev : pending_) pending.push_back(event_to_json(ev));
    auto& nodes = j["nodes"] = nlohmann::ordered_json::array();
    for (const NodeId& n : graph_.nodes()) nodes.push_back(n);
    auto& edges = j["edges"] = nlohmann::ordered_json::array();
    for (const EdgeKey& e : graph_.edges()) edges.push_back({e.a, e.b});
    j["labels"] = graph_.labels();
    return j.dump();
}

StagingEngine StagingEngine::restore(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("checkpoint: malformed: ") + e.what());
    }
    const int version = j.value("checkpoint_version", -1);
    if (version != kCheckpointVersion)
        throw std::invalid_argument("checkpoint: version " + std::to_string(version) + " unsupported (expected " +
                                    std::to_string(kCheckpointVersion) + ")");
    StagingEngine engine(config_from_json(j.at("config")));
    if (const auto& s = j.at("staged"); !s.is_null()) {
        ThresholdChange change;
        if (s.contains("t_i")) change.t_i = s.at("t_i").get<Millis>();
        if (s.contains("n_events")) change.n_events = s.at("n_events").get<std::uint32_t>();
        engine.staged_ = change;
    }
    engine.window_start_ = j.at("window_start").get<Millis>();
    engine.busy_until_ = j.at("busy_until").get<Millis>();
    engine.last_fed_ = j.at("last_fed").get<Millis>();
    engine.last_poll_ = j.at("last_poll").get<Millis>();
    engine.input_closed_ = j.at("input_closed").get<bool>();
    engine.next_stage_id_ = j.at("next_stage_id").get<std::uint64_t>();
    for (const auto& ev : j.at("pending")) engine.pending_.push_back(event_from_json(ev));
    for (const auto& n : j.at("nodes")) engine.graph_.add_node(n.get<std::string>());
    for (const auto& e : j.at("edges")) engine.graph_.add_edge(EdgeKey{e.at(0).get<std::string>(), e.at(1).get<std::string>()});
    for (const auto& [id, label] : j.at("labels").items()) engine.graph_.set_label(id, label.get<std::string>());
    return engine;
}

}  // namespace graphstage
