// graphstage: staged animation of streaming graph events.

#include "graphstage/logging.hpp"
#include "graphstage/pipeline.hpp"
#include "graphstage/service.hpp"
#include "graphstage/session_log.hpp"
#include "graphstage/simulator.hpp"
#include "graphstage/wire.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace graphstage;

namespace {

/// Bad input data (as opposed to bad usage): exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read \"" + path + "\"");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Writes to `path`, or stdout when empty or "-".
template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
    if (path.empty() || path == "-") {
        fn(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write \"" + path + "\"");
    fn(out);
    if (!out) throw DataError("write failed on \"" + path + "\"");
}

struct StagingFlags {
    std::string strategy = "hybrid";
    std::string preset = "default";
    std::optional<Millis> t_i;
    std::optional<std::uint32_t> n_events;

    void add(CLI::App& app) {
        app.add_option("--strategy", strategy, "Staging strategy")
            ->check(CLI::IsMember({"time", "event", "hybrid"}))
            ->capture_default_str();
        app.add_option("--preset", preset, "Timing preset")
            ->check(CLI::IsMember({"default", "monitoring", "slow-motion"}))
            ->capture_default_str();
        app.add_option("--ti-ms", t_i, "Time threshold t_i in ms");
        app.add_option("--n-events", n_events, "Event threshold N");
    }

    StagingConfig config() const {
        const Strategy s = *strategy_from_token(strategy);
        StagingConfig c = preset == "monitoring"    ? StagingConfig::monitoring(s)
                          : preset == "slow-motion" ? StagingConfig::slow_motion(s)
                                                    : StagingConfig::defaults(s);
        if (t_i) c.t_i = *t_i;
        if (n_events) c.n_events = *n_events;
        c.validate();
        return c;
    }
};

struct InputFlags {
    std::string path;
    std::string format;
    Millis min_lifetime = 0;

    void add(CLI::App& app) {
        app.add_option("--in", path, "Event file")->required();
        app.add_option("--format", format, "Input format (default: from the file extension)")
            ->check(CLI::IsMember({"csv", "jsonl", "flow-csv"}));
        app.add_option("--min-lifetime-ms", min_lifetime, "Minimum edge lifetime for flow-csv input")
            ->check(CLI::NonNegativeNumber);
    }

    InputFormat input_format() const {
        if (!format.empty()) return *input_format_from_token(format);
        return std::filesystem::path(path).extension() == ".jsonl" ? InputFormat::NativeJsonl : InputFormat::NativeCsv;
    }

    std::vector<GraphEvent> load() const {
        const std::string text = read_file(path);
        try {
            return load_events(text, input_format(), min_lifetime);
        } catch (const ParseError& e) {
            throw DataError(path + ": " + e.what());
        }
    }
};

ReplayServer* g_server = nullptr;

extern "C" void on_signal(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    log::init_from_env();

    CLI::App app{"Staged animation of streaming graph events"};
    app.require_subcommand(1);
    std::uint64_t seed = 42;
    app.add_option("--seed", seed, "Seed for every randomised choice")->capture_default_str();

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Run one cell of the scalability model");
    StagingFlags sim_staging;
    sim_staging.strategy = "event";
    sim_staging.add(*simulate);
    SimulationSpec sim_spec;
    std::string sim_out;
    simulate->add_option("--chunk", sim_spec.chunk_size, "Events per chunk (n)")->check(CLI::Range(1, 10));
    simulate->add_option("--tau-ms", sim_spec.interval, "Interval between chunks")->check(CLI::PositiveNumber);
    simulate->add_option("--duration-ms", sim_spec.run_duration, "Run length")->capture_default_str();
    simulate->add_option("--cap", sim_spec.event_cap, "Events per stage")->capture_default_str();
    simulate->add_option("--out", sim_out, "Per-event delays as CSV (default: summary only)");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Sweep chunk sizes against intervals");
    StagingFlags sweep_staging;
    sweep_staging.strategy = "event";
    sweep_staging.add(*sweep);
    std::string sweep_out, sweep_long;
    std::vector<Millis> sweep_taus;
    std::uint32_t sweep_cap = 5;
    Millis sweep_duration = 60000;
    unsigned sweep_threads = 0;
    sweep->add_option("--out", sweep_out, "Matrix CSV (default: stdout)");
    sweep->add_option("--long-out", sweep_long, "Long-form CSV: strategy,n,tau_ms,metric,value");
    sweep->add_option("--taus", sweep_taus, "Interval grid in ms")->delimiter(',');
    sweep->add_option("--cap", sweep_cap, "Events per stage")->capture_default_str();
    sweep->add_option("--duration-ms", sweep_duration, "Run length")->capture_default_str();
    sweep->add_option("--threads", sweep_threads, "Worker threads (0 = all cores)");

    // compose
    auto* compose = app.add_subcommand("compose", "Offline: event file to stage messages, one per line");
    InputFlags compose_in;
    compose_in.add(*compose);
    StagingFlags compose_staging;
    compose_staging.add(*compose);
    std::string compose_out;
    compose->add_option("--out", compose_out, "Output NDJSON (default: stdout)");

    // frames
    auto* frames = app.add_subcommand("frames", "Evaluate one stage's animation at fixed steps");
    InputFlags frames_in;
    frames_in.add(*frames);
    StagingFlags frames_staging;
    frames_staging.add(*frames);
    std::uint64_t frames_stage = 1;
    Millis frames_step = 50;
    std::string frames_out, frames_svg;
    frames->add_option("--stage", frames_stage, "Stage id")->capture_default_str();
    frames->add_option("--step-ms", frames_step, "Frame step")->check(CLI::PositiveNumber)->capture_default_str();
    frames->add_option("--out", frames_out, "Frame records, NDJSON (default: stdout)");
    frames->add_option("--svg-dir", frames_svg, "Also write one SVG per frame here");

    // validate
    auto* validate = app.add_subcommand("validate", "Check an event file");
    InputFlags validate_in;
    validate_in.add(*validate);

    // replay-serve
    auto* serve = app.add_subcommand("replay-serve", "Replay an event file to TCP clients");
    InputFlags serve_in;
    serve_in.add(*serve);
    StagingFlags serve_staging;
    serve_staging.add(*serve);
    SessionConfig session;
    serve->add_option("--speed", session.speed_multiplier, "Replay speed multiplier")->capture_default_str();
    serve->add_option("--listen", session.listen, "host:port")->capture_default_str();
    serve->add_option("--session-log", session.session_log_path, "Record the session here");
    serve->add_option("--await-clients", session.await_clients, "Start the clock once this many clients joined");
    serve->add_flag("--exit-when-complete", session.exit_when_complete, "Stop once the replay is complete");

    // replay-session
    auto* replay = app.add_subcommand("replay-session", "Recompute and verify a recorded session");
    std::string replay_log, replay_out;
    replay->add_option("--log", replay_log, "Session log")->required();
    replay->add_option("--out", replay_out, "Broadcast lines (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    auto options_for = [&](const StagingFlags& flags) {
        PipelineOptions o;
        o.staging = flags.config();
        o.seed = seed;
        return o;
    };

    try {
        if (*simulate) {
            const StagingConfig c = sim_staging.config();
            sim_spec.strategy = c.strategy;
            sim_spec.timing = c;
            const SimulationResult r = run(sim_spec);
            std::cout << "strategy=" << to_token(sim_spec.strategy) << " n=" << sim_spec.chunk_size
                      << " tau_ms=" << sim_spec.interval << " generated=" << r.generated << " depicted=" << r.depicted
                      << " backlog_at_end=" << r.backlog_at_end << " offset_ms=" << r.offset
                      << " mean_delay_ms=" << r.mean_delay() << " max_delay_ms=" << r.max_delay()
                      << " mean_events_per_cycle=" << r.mean_events_per_cycle() << '\n';
            if (!sim_out.empty())
                with_output(sim_out, [&](std::ostream& out) {
                    out << "index,delay_ms\n";
                    for (std::size_t i = 0; i < r.per_event_delay.size(); ++i)
                        out << i << ',' << r.per_event_delay[i] << '\n';
                });
        } else if (*sweep) {
            const StagingConfig c = sweep_staging.config();
            SimulationSpec templ;
            templ.strategy = c.strategy;
            templ.timing = c;
            templ.event_cap = sweep_cap;
            templ.run_duration = sweep_duration;
            const GridResult grid = grid_sweep(templ, default_chunk_sizes(),
                                               sweep_taus.empty() ? default_intervals() : sweep_taus, sweep_threads);
            with_output(sweep_out, [&](std::ostream& out) { write_matrix_csv(out, grid); });
            if (!sweep_long.empty()) with_output(sweep_long, [&](std::ostream& out) { write_long_csv(out, grid); });
        } else if (*compose) {
            const auto events = compose_in.load();
            const auto stages = compose_all(events, options_for(compose_staging));
            with_output(compose_out, [&](std::ostream& out) {
                for (const StageOutput& s : stages) out << wire::stage(s) << '\n';
            });
        } else if (*frames) {
            const auto events = frames_in.load();
            const auto stages = compose_all(events, options_for(frames_staging));
            if (frames_stage < 1 || frames_stage > stages.size())
                throw DataError("stage " + std::to_string(frames_stage) + " does not exist (" +
                                std::to_string(stages.size()) + " stages)");
            const StageScript& script = stages[frames_stage - 1].script;
            if (!frames_svg.empty()) std::filesystem::create_directories(frames_svg);
            with_output(frames_out, [&](std::ostream& out) {
                std::vector<Millis> ts;
                for (Millis t = 0; t < script.timing.total; t += frames_step) ts.push_back(t);
                ts.push_back(script.timing.total);
                for (Millis t : ts) {
                    const FrameSnapshot f = frame_at(script, t);
                    out << frame_to_json(f) << '\n';
                    if (!frames_svg.empty()) {
                        std::ofstream svg(std::filesystem::path(frames_svg) / ("frame_" + std::to_string(t) + ".svg"));
                        svg << frame_to_svg(f);
                    }
                }
            });
        } else if (*validate) {
            const auto events = validate_in.load();
            GraphState state;
            ApplyLog log;
            for (const GraphEvent& ev : events) apply_event(state, ev, &log, ApplyMode::Lenient);
            std::cout << "ok: " << events.size() << " events, " << state.node_count() << " nodes and "
                      << state.edge_count() << " edges at end, " << log.warnings.size() << " lenient warnings\n";
        } else if (*serve) {
            session.events_path = serve_in.path;
            session.format = serve_in.input_format();
            session.min_lifetime = serve_in.min_lifetime;
            session.pipeline = options_for(serve_staging);
            ReplayServer server(session);
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "listening on port " << server.port() << std::endl;
            server.run();
            g_server = nullptr;
        } else if (*replay) {
            const SessionLog log = read_session_log(replay_log);
            const auto lines = verify_session(log);
            with_output(replay_out, [&](std::ostream& out) {
                for (const std::string& l : lines) out << l << '\n';
            });
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const SessionLogError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
