#pragma once

#include "graphstage/event_model.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

namespace graphstage {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double norm() const { return std::sqrt(x * x + y * y); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
    bool operator==(const Vec2&) const = default;
};

/// Spring-electrical model with a central pull.
///
/// Forces on node i (k = ideal_edge_length):
///   repulsion from every j:   repulsion_constant * k^2 / d, along (p_i - p_j)
///   spring along each edge:   (d^2 - k^2) / k toward the neighbour (zero at d = k)
///   central pull:             central_strength * |p_i - centroid|, toward the centroid
/// A connected pair in isolation rests at d = k * x, the positive root of
///   x^3 + (c/2) x^2 - x - C = 0   (C = repulsion_constant, c = central_strength).
struct LayoutParams {
    double ideal_edge_length = 1.0;
    double repulsion_constant = 1.0;
    double central_strength = 0.1;
    double step_size = 0.1;
    double cooling_factor = 0.95;
    double energy_threshold = 1e-4;
    std::uint32_t max_refine_iters = 200;
    std::uint32_t layout_iters = 30;   // global relaxation sweeps per stage
    double max_displacement = 0.5;     // per-sweep displacement cap, layout units

    void validate() const;  // throws ConfigError
    bool operator==(const LayoutParams&) const = default;
};

struct LayoutState {
    std::map<NodeId, Vec2> positions;
    std::map<NodeId, double> energy;  // squared net force magnitude
    std::uint64_t rng_seed = 42;

    bool all_finite() const;
    bool operator==(const LayoutState&) const = default;
};

/// Positions new nodes: barycenter of placed neighbours plus a seed-derived
/// jitter of length k/4, or (no placed neighbour) a ring of radius 2k around
/// the current centroid. The first node of an empty layout goes to the origin.
void place_new(LayoutState& state, const std::set<NodeId>& additions, const GraphState& graph,
               const LayoutParams& params);

struct RefineResult {
    std::uint32_t sweeps = 0;       // sweeps attempted
    std::uint32_t accepted = 0;     // sweeps whose move was kept
    bool converged = false;         // max energy <= threshold on exit
    std::vector<double> max_energy; // per sweep, after the sweep
};

/// Moves the nodes whose energy exceeds the threshold along their net force.
/// A sweep is kept only if it does not raise the maximum node energy; the step
/// is cooled every sweep. Stops when converged or after max_refine_iters.
RefineResult refine(LayoutState& state, const GraphState& graph, const LayoutParams& params);

/// One global step: every node moves by step_size * force, capped at `cap`.
void layout_step(LayoutState& state, const GraphState& graph, const LayoutParams& params, double cap);

/// layout_iters global steps with a cooling displacement cap.
void layout_pass(LayoutState& state, const GraphState& graph, const LayoutParams& params);

/// Recomputes state.energy from current positions.
void update_energy(LayoutState& state, const GraphState& graph, const LayoutParams& params);

struct Move {
    NodeId id;
    Vec2 from;
    Vec2 to;
    double displacement() const { return (to - from).norm(); }
    bool operator==(const Move&) const = default;
};

inline constexpr double kMoveEpsilon = 0.001;

/// Survivors displaced by more than kMoveEpsilon, in id order.
std::vector<Move> movements(const LayoutState& before, const LayoutState& after, const std::set<NodeId>& survivors);

/// Full per-stage preparation on the post-stage graph: drop deleted nodes,
/// place additions, refine, then run the global layout pass.
LayoutState prepare_stage_layout(const LayoutState& before, const GraphState& post_graph,
                                 const std::set<NodeId>& node_deletions, const std::set<NodeId>& node_additions,
                                 const LayoutParams& params);

/// Radius of the smallest centroid-centred circle containing every node.
double bounding_radius(const LayoutState& state);

/// Deterministic 64-bit mix of a seed and a string.
std::uint64_t seeded_hash(std::uint64_t seed, std::string_view text);

}  // namespace graphstage
