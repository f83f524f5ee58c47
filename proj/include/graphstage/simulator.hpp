#pragma once

#include "graphstage/staging.hpp"

#include <iosfwd>
#include <vector>

namespace graphstage {

/// One cell of the scalability model: n simultaneous additions every tau ms.
struct SimulationSpec {
    Strategy strategy = Strategy::EventBased;
    std::uint32_t chunk_size = 1;   // n
    Millis interval = 8000;         // tau
    Millis run_duration = 60000;
    std::uint32_t event_cap = 5;    // events per stage (event-based and hybrid)
    StagingConfig timing = StagingConfig::defaults(Strategy::EventBased);

    /// Throws ConfigError.
    void validate() const;
    /// Staging config actually driven: timing with strategy and cap applied.
    StagingConfig staging() const;
};

struct SimulatedStage {
    Millis trigger = 0;
    TriggerCause cause = TriggerCause::TimeThreshold;
    std::size_t events = 0;
    Millis duration = 0;  // T_an
};

struct SimulationResult {
    std::vector<Millis> per_event_delay;   // depicted events, in stream order
    std::vector<std::size_t> events_per_cycle;  // per non-tick stage
    std::vector<SimulatedStage> stages;
    Millis offset = 0;  // first trigger minus first arrival; 0 if nothing triggered
    std::size_t generated = 0;
    std::size_t depicted = 0;
    std::size_t backlog_at_end = 0;  // generated - depicted

    double mean_delay() const;
    Millis max_delay() const;
    double mean_events_per_cycle() const;
};

/// Drives the synthetic stream through StagingEngine. Events arrive at 0, tau,
/// 2 tau, ... < run_duration; a stage counts if it triggers before run_duration,
/// and an event's delay runs to the start of its addition sub-stage.
SimulationResult run(const SimulationSpec& spec);

struct GridResult {
    Strategy strategy = Strategy::EventBased;
    std::vector<std::uint32_t> ns;
    std::vector<Millis> taus;
    std::vector<std::vector<SimulationResult>> cells;  // [n index][tau index]

    const SimulationResult& at(std::uint32_t n, Millis tau) const;
    /// Mean events per cycle for time-based, mean delay otherwise.
    double headline(std::size_t i, std::size_t j) const;
};

/// Default sweep axes: n = 1..10, tau from 8000 ms down to 1 ms.
std::vector<std::uint32_t> default_chunk_sizes();
std::vector<Millis> default_intervals();

/// Runs every (n, tau) cell, using up to `threads` workers (0 = hardware).
/// Results do not depend on the thread count.
GridResult grid_sweep(const SimulationSpec& templ, const std::vector<std::uint32_t>& ns,
                      const std::vector<Millis>& taus, unsigned threads = 0);

/// Matrix CSV: header "n" then tau values, one row per n.
void write_matrix_csv(std::ostream& out, const GridResult& grid);
/// Long form: strategy,n,tau_ms,metric,value.
void write_long_csv(std::ostream& out, const GridResult& grid, bool header = true);

}  // namespace graphstage
