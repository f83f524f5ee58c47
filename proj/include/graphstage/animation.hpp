#pragma once

#include "graphstage/layout.hpp"
#include "graphstage/staging.hpp"

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace graphstage {

enum class Easing : std::uint8_t { SlowInSlowOut, Linear };

/// ease(0)=0, ease(1)=1, ease(0.5)=0.5; the slow-in/slow-out curve has zero slope at both ends.
double ease(Easing easing, double u);

inline constexpr double kHighlightFraction = 0.3;
inline constexpr double kDeletedLabelOpacity = 0.5;

struct DeletionSubStage {
    std::set<NodeId> nodes;
    std::set<EdgeKey> edges;
    double highlight_fraction = kHighlightFraction;
};
struct MovementSubStage {
    std::vector<Move> moves;
    Easing easing = Easing::SlowInSlowOut;
};
struct AdditionSubStage {
    std::set<NodeId> nodes;
    std::set<EdgeKey> edges;
    double highlight_fraction = kHighlightFraction;
};
struct PauseSubStage {};

using SubStageBody = std::variant<DeletionSubStage, MovementSubStage, AdditionSubStage, PauseSubStage>;

struct SubStage {
    Millis begin = 0;  // relative to the stage start
    Millis end = 0;
    SubStageBody body;

    std::string_view name() const;
};

/// Everything visible during a stage besides the changes themselves.
struct Scene {
    std::map<NodeId, Vec2> node_positions;  // survivors at pre-stage positions, deleted nodes frozen, additions at final positions
    std::set<NodeId> survivor_nodes;
    std::set<EdgeKey> survivor_edges;
    std::map<NodeId, std::string> labels;
};

struct StageScript {
    std::uint64_t stage_id = 0;
    Millis start_time = 0;  // clock time of the animation start
    TriggerCause cause = TriggerCause::TimeThreshold;
    Strategy strategy = Strategy::Hybrid;
    std::vector<SubStage> sub_stages;  // deletion?, movement, addition?, pause
    StageTiming timing;
    std::vector<EphemeralPair> ephemeral;
    Scene scene;

    const SubStage* find(std::size_t variant_index) const;
    const DeletionSubStage* deletion() const;
    const MovementSubStage& movement() const;
    const AdditionSubStage* addition() const;
};

/// Builds the keyframe program for one stage. `before`/`after` are the layout
/// states around the stage and `post_graph` the graph after it.
StageScript build_script(const StageDiff& diff, const std::vector<Move>& moves, const StageTiming& timing,
                         Millis start_time, const GraphState& post_graph, const LayoutState& before,
                         const LayoutState& after, Easing easing = Easing::SlowInSlowOut);

enum class Highlight : std::uint8_t { None, DeleteOrange, AddBlue };

std::string_view to_token(Highlight h);

struct EntityVisual {
    double opacity = 1.0;
    Highlight highlight = Highlight::None;
    double highlight_strength = 0.0;  // 1 = full colour, fades to 0
    bool operator==(const EntityVisual&) const = default;
};

struct FrameSnapshot {
    Millis t = 0;  // relative to the stage start
    std::map<NodeId, Vec2> positions;
    std::map<Entity, EntityVisual> entities;
    std::map<NodeId, double> label_opacity;

    /// Entities drawn at full opacity.
    std::set<Entity> opaque_entities() const;
};

/// Evaluates the script at t in [0, T_an]; throws std::out_of_range otherwise.
FrameSnapshot frame_at(const StageScript& script, Millis t);

/// One frame as a single-line JSON record.
std::string frame_to_json(const FrameSnapshot& frame);

/// One frame as a standalone SVG document; coordinates are scaled to fit.
std::string frame_to_svg(const FrameSnapshot& frame, double width = 640, double height = 480);

// ---------------------------------------------------------------------------
// Lag accounting

struct LagRecord {
    std::uint64_t seq = 0;
    Millis timestamp = 0;
    Millis depiction_start = 0;  // start of the sub-stage depicting the event
    Millis lag = 0;
    EventRole role = EventRole::NoOp;
    Strategy strategy = Strategy::Hybrid;
    std::uint64_t stage_id = 0;
    bool excluded = false;  // ephemeral or no-op: not depicted
};

/// Lag records for every raw event of one stage.
std::vector<LagRecord> stage_lag(const Stage& stage, const StageScript& script);

struct LagSummary {
    std::size_t count = 0;
    double mean = 0.0;
    Millis max = 0;
    Millis p95 = 0;  // nearest-rank
};

struct LagReport {
    std::vector<LagRecord> records;
    std::map<Strategy, LagSummary> by_strategy;
};

LagReport lag_report(const std::vector<std::pair<Stage, StageScript>>& history);
LagSummary summarize_lags(std::vector<Millis> lags);

}  // namespace graphstage
