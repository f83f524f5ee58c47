#include "graphstage/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <ostream>
#include <thread>

namespace graphstage {

void SimulationSpec::validate() const {
    if (chunk_size < 1 || chunk_size > 10)
        throw ConfigError("chunk size must lie in 1..10 (got " + std::to_string(chunk_size) + ")");
    if (interval <= 0) throw ConfigError("interval must be > 0 ms");
    if (run_duration <= 0) throw ConfigError("run duration must be > 0 ms");
    if (event_cap < 1) throw ConfigError("event cap must be >= 1");
    staging().validate();
}

StagingConfig SimulationSpec::staging() const {
    StagingConfig c = timing;
    c.strategy = strategy;
    c.n_events = event_cap;
    return c;
}

double SimulationResult::mean_delay() const {
    if (per_event_delay.empty()) return 0.0;
    const double sum = std::accumulate(per_event_delay.begin(), per_event_delay.end(), 0.0);
    return sum / static_cast<double>(per_event_delay.size());
}

Millis SimulationResult::max_delay() const {
    return per_event_delay.empty() ? 0 : *std::max_element(per_event_delay.begin(), per_event_delay.end());
}

double SimulationResult::mean_events_per_cycle() const {
    if (events_per_cycle.empty()) return 0.0;
    const double sum = std::accumulate(events_per_cycle.begin(), events_per_cycle.end(), 0.0);
    return sum / static_cast<double>(events_per_cycle.size());
}

SimulationResult run(const SimulationSpec& spec) {
    spec.validate();
    StagingEngine engine(spec.staging());
    SimulationResult result;

    const Millis end = spec.run_duration;
    const std::size_t chunks = static_cast<std::size_t>((end - 1) / spec.interval) + 1;
    result.generated = chunks * spec.chunk_size;
    std::size_t next_chunk = 0;
    std::uint64_t seq = 0;

    while (true) {
        const std::optional<Millis> trigger = engine.next_trigger();
        const bool more = next_chunk < chunks;
        const Millis arrival = more ? static_cast<Millis>(next_chunk) * spec.interval : end;
        if (trigger && *trigger < arrival && *trigger < end) {
            const std::optional<Stage> stage = engine.poll(*trigger);
            const Millis depicted = stage->bin.trigger_time + stage->timing.addition_begin();
            for (const GraphEvent& ev : stage->bin.events) result.per_event_delay.push_back(depicted - ev.timestamp);
            result.depicted += stage->bin.events.size();
            if (result.stages.empty()) result.offset = stage->bin.trigger_time;
            if (stage->bin.cause != TriggerCause::ConvergenceTick)
                result.events_per_cycle.push_back(stage->bin.events.size());
            result.stages.push_back({stage->bin.trigger_time, stage->bin.cause, stage->bin.events.size(),
                                     stage->timing.total});
            continue;
        }
        if (!more) break;
        for (std::uint32_t k = 0; k < spec.chunk_size; ++k) {
            GraphEvent ev = node_event(EventKind::NodeAdd, arrival, "e" + std::to_string(seq));
            ev.seq = ++seq;
            engine.feed(std::move(ev));
        }
        ++next_chunk;
    }
    result.backlog_at_end = result.generated - result.depicted;
    return result;
}

const SimulationResult& GridResult::at(std::uint32_t n, Millis tau) const {
    const auto i = std::find(ns.begin(), ns.end(), n);
    const auto j = std::find(taus.begin(), taus.end(), tau);
    if (i == ns.end() || j == taus.end()) throw std::out_of_range("no grid cell for n=" + std::to_string(n) +
                                                                  " tau=" + std::to_string(tau));
    return cells[static_cast<std::size_t>(i - ns.begin())][static_cast<std::size_t>(j - taus.begin())];
}

double GridResult::headline(std::size_t i, std::size_t j) const {
    const SimulationResult& r = cells[i][j];
    return strategy == Strategy::TimeBased ? r.mean_events_per_cycle() : r.mean_delay();
}

std::vector<std::uint32_t> default_chunk_sizes() { return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}; }

std::vector<Millis> default_intervals() {
    return {8000, 6000, 4000, 3000, 2000, 1500, 1000, 750, 500, 250, 100, 50, 10, 5, 1};
}

GridResult grid_sweep(const SimulationSpec& templ, const std::vector<std::uint32_t>& ns,
                      const std::vector<Millis>& taus, unsigned threads) {
    if (ns.empty() || taus.empty()) throw ConfigError("sweep grids must be non-empty");
    GridResult grid;
    grid.strategy = templ.strategy;
    grid.ns = ns;
    grid.taus = taus;
    grid.cells.assign(ns.size(), std::vector<SimulationResult>(taus.size()));

    std::vector<SimulationSpec> specs;
    for (std::uint32_t n : ns) {
        for (Millis tau : taus) {
            SimulationSpec s = templ;
            s.chunk_size = n;
            s.interval = tau;
            s.validate();
            specs.push_back(s);
        }
    }

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(specs.size()));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < specs.size(); k = next++)
            grid.cells[k / taus.size()][k % taus.size()] = run(specs[k]);
    };
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    return grid;
}

void write_matrix_csv(std::ostream& out, const GridResult& grid) {
    out << "n";
    for (Millis tau : grid.taus) out << ',' << tau;
    out << '\n';
    for (std::size_t i = 0; i < grid.ns.size(); ++i) {
        out << grid.ns[i];
        for (std::size_t j = 0; j < grid.taus.size(); ++j) out << ',' << grid.headline(i, j);
        out << '\n';
    }
}

void write_long_csv(std::ostream& out, const GridResult& grid, bool header) {
    if (header) out << "strategy,n,tau_ms,metric,value\n";
    const std::string_view strategy = to_token(grid.strategy);
    for (std::size_t i = 0; i < grid.ns.size(); ++i) {
        for (std::size_t j = 0; j < grid.taus.size(); ++j) {
            const SimulationResult& r = grid.cells[i][j];
            auto row = [&](std::string_view metric, auto value) {
                out << strategy << ',' << grid.ns[i] << ',' << grid.taus[j] << ',' << metric << ',' << value << '\n';
            };
            row("mean_delay_ms", r.mean_delay());
            row("max_delay_ms", r.max_delay());
            row("offset_ms", r.offset);
            row("mean_events_per_cycle", r.mean_events_per_cycle());
            row("backlog_at_end", r.backlog_at_end);
        }
    }
}

}  // namespace graphstage
