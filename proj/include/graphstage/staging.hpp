#pragma once

#include "graphstage/event_model.hpp"

#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace graphstage {

enum class Strategy : std::uint8_t { TimeBased, EventBased, Hybrid };

std::string_view to_token(Strategy s);  // "time", "event", "hybrid"
std::optional<Strategy> strategy_from_token(std::string_view token);

/// Trigger rule plus sub-stage durations. Durations in ms.
struct StagingConfig {
    Strategy strategy = Strategy::Hybrid;
    Millis t_i = 2000;          // time threshold
    std::uint32_t n_events = 5; // event threshold N
    Millis t_d = 450;           // deletion
    Millis t_m = 600;           // movement
    Millis t_a = 450;           // addition
    Millis t_p = 500;           // pause

    Millis full_animation() const { return t_d + t_m + t_a + t_p; }

    /// Throws ConfigError when a duration is non-positive, N is zero, or (for
    /// time-based and hybrid) a window is shorter than one full animation.
    void validate() const;

    /// Study defaults: 450/600/450/500 ms, t_i = 2 s, N = 5.
    static StagingConfig defaults(Strategy s);
    /// Monitoring preset: defaults with N = 3.
    static StagingConfig monitoring(Strategy s);
    /// Presentation timings of 0.5 s delete, 1.2 s move, 0.5 s add (t_i widened to fit).
    static StagingConfig slow_motion(Strategy s);

    bool operator==(const StagingConfig&) const = default;
};

enum class TriggerCause : std::uint8_t { TimeThreshold, EventThreshold, ConvergenceTick, Flush };

std::string_view to_token(TriggerCause c);
std::optional<TriggerCause> trigger_cause_from_token(std::string_view token);

struct Bin {
    std::uint64_t stage_id = 0;
    Strategy strategy = Strategy::Hybrid;
    Millis window_start = 0;
    Millis trigger_time = 0;
    TriggerCause cause = TriggerCause::TimeThreshold;
    std::vector<GraphEvent> events;
};

/// How a raw bin event shows up in the stage.
enum class EventRole : std::uint8_t {
    Addition,   // its effect survives as a net addition
    Deletion,   // its effect survives as a net deletion
    Ephemeral,  // cancelled by a later event on the same entity within the bin
    NoOp,       // no effect (lenient duplicate or absent removal)
};

struct EphemeralPair {
    Entity entity;
    GraphEvent first;   // the earlier event (add or remove)
    GraphEvent second;  // the event that cancelled it
};

/// Net effect of one bin relative to the pre-bin graph.
struct StageDiff {
    std::set<NodeId> node_deletions;
    std::set<EdgeKey> edge_deletions;
    std::set<NodeId> node_additions;
    std::set<EdgeKey> edge_additions;
    std::map<NodeId, std::string> added_labels;
    std::map<NodeId, std::string> deleted_labels;  // labels the deleted nodes carried
    std::vector<EphemeralPair> ephemeral;
    std::vector<EventRole> roles;  // parallel to source_bin.events
    std::vector<ApplyWarning> warnings;
    Bin source_bin;

    bool has_deletions() const { return !node_deletions.empty() || !edge_deletions.empty(); }
    bool has_additions() const { return !node_additions.empty() || !edge_additions.empty(); }
    bool empty() const { return !has_deletions() && !has_additions(); }
};

/// Net diff of a bin against `pre_state` (lenient application), with
/// add/remove pairs on the same entity collapsed into `ephemeral`.
StageDiff compose_stage(const Bin& bin, const GraphState& pre_state);

/// Deletions (edges, then nodes) followed by additions (nodes, then edges).
void apply_diff(GraphState& state, const StageDiff& diff);

/// Sub-stage durations of one stage. Absent sub-stages are nullopt (hybrid only).
struct StageTiming {
    std::optional<Millis> deletion;
    Millis movement = 0;
    std::optional<Millis> addition;
    Millis pause = 0;
    Millis total = 0;

    Millis deletion_begin() const { return 0; }
    Millis movement_begin() const { return deletion.value_or(0); }
    Millis addition_begin() const { return movement_begin() + movement; }
    Millis pause_begin() const { return addition_begin() + addition.value_or(0); }

    bool operator==(const StageTiming&) const = default;
};

StageTiming stage_timing(const StageDiff& diff, const StagingConfig& config);

/// A triggered stage: the bin, its net diff, and its animation timing. The
/// animation starts at bin.trigger_time.
struct Stage {
    Bin bin;
    StageDiff diff;
    StageTiming timing;
    StagingConfig config;  // config in force when the stage triggered
};

/// Binning state machine. Feed events in timestamp order, then poll with a
/// non-decreasing clock. Before poll(now), every event with timestamp <= now
/// must have been fed; trigger times are then independent of how often poll
/// is called. Not thread-safe.
class StagingEngine {
public:
    explicit StagingEngine(StagingConfig config, Millis origin = 0);

    /// Throws std::invalid_argument on timestamp regression.
    void feed(GraphEvent event);

    /// Emits at most one stage whose trigger time is <= now.
    std::optional<Stage> poll(Millis now);

    /// Earliest time poll could emit without further input; nullopt if none.
    std::optional<Millis> next_trigger() const;

    /// Marks end of input; event-based staging then flushes its final partial batch.
    void close_input();
    bool input_closed() const { return input_closed_; }
    bool drained() const { return input_closed_ && pending_.empty(); }

    /// Applies immediately; the pending buffer is retained. Throws ConfigError.
    void set_strategy(Strategy s);
    /// Validated now, applied when the current window closes. Throws ConfigError.
    void set_thresholds(std::optional<Millis> t_i, std::optional<std::uint32_t> n_events);

    struct ThresholdChange {
        std::optional<Millis> t_i;
        std::optional<std::uint32_t> n_events;
    };

    const StagingConfig& config() const { return config_; }
    const std::optional<ThresholdChange>& staged_thresholds() const { return staged_; }
    const GraphState& graph() const { return graph_; }
    std::size_t pending() const { return pending_.size(); }
    /// Pending events that will not fit into the next stage.
    std::size_t backlog() const;
    Millis busy_until() const { return busy_until_; }
    Millis window_start() const { return window_start_; }
    std::uint64_t stages_emitted() const { return next_stage_id_ - 1; }

    /// Versioned text checkpoint of the whole engine state.
    std::string checkpoint() const;
    static StagingEngine restore(std::string_view checkpoint);

    static constexpr int kCheckpointVersion = 1;

private:
    struct Candidate {
        Millis trigger;
        TriggerCause cause;
        std::size_t count;     // events taken from the front of pending
        Millis window_start;   // window the bin belongs to
    };
    std::optional<Candidate> candidate() const;
    std::size_t count_until(Millis t) const;

    StagingConfig config_;
    std::optional<ThresholdChange> staged_;
    std::deque<GraphEvent> pending_;
    GraphState graph_;
    Millis window_start_ = 0;
    Millis busy_until_ = 0;
    Millis last_fed_ = 0;
    Millis last_poll_ = 0;  // events older than the polled clock are rejected
    bool input_closed_ = false;
    std::uint64_t next_stage_id_ = 1;
};

}  // namespace graphstage
