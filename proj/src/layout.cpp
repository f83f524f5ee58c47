#include "graphstage/layout.hpp"

#include "graphstage/kernels/repulsion.hpp"

#include <algorithm>
#include <numbers>

namespace graphstage {

void LayoutParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be > 0");
    };
    positive(ideal_edge_length, "ideal_edge_length");
    positive(repulsion_constant, "repulsion_constant");
    positive(step_size, "step_size");
    positive(energy_threshold, "energy_threshold");
    positive(max_displacement, "max_displacement");
    if (!(central_strength >= 0.0) || !std::isfinite(central_strength)) throw ConfigError("central_strength must be >= 0");
    if (!(cooling_factor > 0.0 && cooling_factor < 1.0)) throw ConfigError("cooling_factor must lie in (0, 1)");
}

bool LayoutState::all_finite() const {
    return std::all_of(positions.begin(), positions.end(), [](const auto& kv) { return kv.second.finite(); }) &&
           std::all_of(energy.begin(), energy.end(), [](const auto& kv) { return std::isfinite(kv.second); });
}

std::uint64_t seeded_hash(std::uint64_t seed, std::string_view text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    // splitmix64 finaliser
    std::uint64_t z = h ^ (seed + 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

namespace {

double unit_interval(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

Vec2 seeded_direction(std::uint64_t seed, std::string_view text) {
    const double angle = 2.0 * std::numbers::pi * unit_interval(seeded_hash(seed, text));
    return {std::cos(angle), std::sin(angle)};
}

/// Node order and edge list for force evaluation.
struct Topology {
    std::vector<NodeId> ids;
    std::vector<std::pair<std::size_t, std::size_t>> edges;

    explicit Topology(const GraphState& graph) {
        const auto nodes = graph.nodes();
        ids.assign(nodes.begin(), nodes.end());
        std::map<NodeId, std::size_t> index;
        for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);
        for (const EdgeKey& e : graph.edges()) edges.emplace_back(index.at(e.a), index.at(e.b));
    }
    std::size_t size() const { return ids.size(); }
};

/// Structure-of-arrays coordinates, padded for the kernels.
struct Coords {
    std::vector<double> xs, ys;

    Coords(const LayoutState& state, const Topology& topo) {
        xs.assign(kernels::padded_size(topo.size()), 0.0);
        ys.assign(xs.size(), 0.0);
        for (std::size_t i = 0; i < topo.size(); ++i) {
            const Vec2 p = state.positions.at(topo.ids[i]);
            xs[i] = p.x;
            ys[i] = p.y;
        }
    }
};

struct Forces {
    std::vector<double> fx, fy, energy;
    double max_energy() const { return energy.empty() ? 0.0 : *std::max_element(energy.begin(), energy.end()); }
};

Forces compute_forces(const Topology& t, const Coords& f, const LayoutParams& p, std::uint64_t seed) {
    const std::size_t n = t.size();
    const double k = p.ideal_edge_length;
    const double strength = p.repulsion_constant * k * k;
    Forces out;
    out.fx.assign(n, 0.0);
    out.fy.assign(n, 0.0);
    out.energy.assign(n, 0.0);
    if (n == 0) return out;

    const std::size_t coincident = kernels::repulsion_kernel()(f.xs.data(), f.ys.data(), n, strength, out.fx.data(),
                                                                 out.fy.data());
    if (coincident > 0) {
        // Push coincident pairs apart along a seed-derived direction.
        const double magnitude = strength / std::sqrt(kernels::kMinDistance2);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double dx = f.xs[i] - f.xs[j];
                const double dy = f.ys[i] - f.ys[j];
                if (dx * dx + dy * dy >= kernels::kMinDistance2) continue;
                const Vec2 u = seeded_direction(seed, t.ids[i] + '\x1f' + t.ids[j]);
                out.fx[i] += magnitude * u.x;
                out.fy[i] += magnitude * u.y;
                out.fx[j] -= magnitude * u.x;
                out.fy[j] -= magnitude * u.y;
            }
        }
    }

    std::vector<double> sx(n, 0.0), sy(n, 0.0);
    for (const auto& [a, b] : t.edges) {
        const double dx = f.xs[a] - f.xs[b];
        const double dy = f.ys[a] - f.ys[b];
        const double d2 = dx * dx + dy * dy;
        if (d2 < kernels::kMinDistance2) continue;
        const double d = std::sqrt(d2);
        const double s = ((d2 - k * k) / k) / d;
        sx[a] -= s * dx;
        sy[a] -= s * dy;
        sx[b] += s * dx;
        sy[b] += s * dy;
    }

    double cx = 0.0, cy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cx += f.xs[i];
        cy += f.ys[i];
    }
    cx /= static_cast<double>(n);
    cy /= static_cast<double>(n);

    for (std::size_t i = 0; i < n; ++i) {
        out.fx[i] = (out.fx[i] + sx[i]) - p.central_strength * (f.xs[i] - cx);
        out.fy[i] = (out.fy[i] + sy[i]) - p.central_strength * (f.ys[i] - cy);
        out.energy[i] = out.fx[i] * out.fx[i] + out.fy[i] * out.fy[i];
    }
    return out;
}

Vec2 capped(double dx, double dy, double cap) {
    const double len = std::sqrt(dx * dx + dy * dy);
    if (len > cap) {
        const double s = cap / len;
        return {dx * s, dy * s};
    }
    return {dx, dy};
}

void write_back(LayoutState& state, const Topology& t, const Coords& f, const Forces& forces) {
    for (std::size_t i = 0; i < t.size(); ++i) {
        state.positions[t.ids[i]] = {f.xs[i], f.ys[i]};
        state.energy[t.ids[i]] = forces.energy[i];
    }
}

Vec2 centroid(const LayoutState& state) {
    if (state.positions.empty()) return {};
    double x = 0.0, y = 0.0;
    for (const auto& [_, p] : state.positions) {
        x += p.x;
        y += p.y;
    }
    const double n = static_cast<double>(state.positions.size());
    return {x / n, y / n};
}

}  // namespace

void update_energy(LayoutState& state, const GraphState& graph, const LayoutParams& params) {
    const Topology t(graph);
    const Coords f(state, t);
    state.energy.clear();
    write_back(state, t, f, compute_forces(t, f, params, state.rng_seed));
}

void place_new(LayoutState& state, const std::set<NodeId>& additions, const GraphState& graph,
               const LayoutParams& params) {
    const double k = params.ideal_edge_length;
    std::vector<NodeId> remaining;
    for (const NodeId& n : additions)
        if (!state.positions.count(n)) remaining.push_back(n);

    while (!remaining.empty()) {
        std::vector<std::pair<NodeId, Vec2>> round;
        for (const NodeId& n : remaining) {
            Vec2 sum;
            std::size_t count = 0;
            for (const NodeId& nb : graph.neighbors(n)) {
                auto it = state.positions.find(nb);
                if (it == state.positions.end()) continue;
                sum = sum + it->second;
                ++count;
            }
            if (count == 0) continue;
            const Vec2 jitter = seeded_direction(state.rng_seed, "jitter\x1f" + n) * (k / 4.0);
            round.emplace_back(n, sum * (1.0 / static_cast<double>(count)) + jitter);
        }
        if (round.empty()) {
            // Nothing attaches to the placed graph: seed one node on the ring.
            const NodeId n = remaining.front();
            Vec2 p;
            if (!state.positions.empty()) p = centroid(state) + seeded_direction(state.rng_seed, "ring\x1f" + n) * (2.0 * k);
            round.emplace_back(n, p);
        }
        for (auto& [n, p] : round) state.positions[n] = p;
        std::erase_if(remaining, [&](const NodeId& n) { return state.positions.count(n) != 0; });
    }
}

RefineResult refine(LayoutState& state, const GraphState& graph, const LayoutParams& params) {
    RefineResult result;
    const Topology t(graph);
    Coords f(state, t);
    Forces forces = compute_forces(t, f, params, state.rng_seed);
    const double threshold = params.energy_threshold;
    double step = params.step_size;

    for (std::uint32_t it = 0; it < params.max_refine_iters; ++it) {
        const double current = forces.max_energy();
        if (current <= threshold) break;
        ++result.sweeps;

        Coords candidate = f;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (forces.energy[i] <= threshold) continue;
            const Vec2 d = capped(step * forces.fx[i], step * forces.fy[i], params.max_displacement);
            candidate.xs[i] += d.x;
            candidate.ys[i] += d.y;
        }
        Forces next = compute_forces(t, candidate, params, state.rng_seed);
        if (next.max_energy() <= current) {
            f = std::move(candidate);
            forces = std::move(next);
            ++result.accepted;
        }
        result.max_energy.push_back(forces.max_energy());
        step *= params.cooling_factor;
    }
    result.converged = forces.max_energy() <= threshold;
    write_back(state, t, f, forces);
    return result;
}

void layout_step(LayoutState& state, const GraphState& graph, const LayoutParams& params, double cap) {
    const Topology t(graph);
    const Coords f(state, t);
    const Forces forces = compute_forces(t, f, params, state.rng_seed);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const Vec2 d = capped(params.step_size * forces.fx[i], params.step_size * forces.fy[i], cap);
        state.positions[t.ids[i]] = {f.xs[i] + d.x, f.ys[i] + d.y};
    }
}

void layout_pass(LayoutState& state, const GraphState& graph, const LayoutParams& params) {
    double cap = params.max_displacement;
    for (std::uint32_t it = 0; it < params.layout_iters; ++it) {
        layout_step(state, graph, params, cap);
        cap *= params.cooling_factor;
    }
    update_energy(state, graph, params);
}

std::vector<Move> movements(const LayoutState& before, const LayoutState& after, const std::set<NodeId>& survivors) {
    std::vector<Move> out;
    for (const NodeId& n : survivors) {
        auto b = before.positions.find(n);
        auto a = after.positions.find(n);
        if (b == before.positions.end() || a == after.positions.end()) continue;
        Move m{n, b->second, a->second};
        if (m.displacement() > kMoveEpsilon) out.push_back(std::move(m));
    }
    return out;
}

LayoutState prepare_stage_layout(const LayoutState& before, const GraphState& post_graph,
                                 const std::set<NodeId>& node_deletions, const std::set<NodeId>& node_additions,
                                 const LayoutParams& params) {
    LayoutState next = before;
    for (const NodeId& n : node_deletions) {
        next.positions.erase(n);
        next.energy.erase(n);
    }
    std::erase_if(next.positions, [&](const auto& kv) { return !post_graph.has_node(kv.first); });
    std::erase_if(next.energy, [&](const auto& kv) { return !post_graph.has_node(kv.first); });

    std::set<NodeId> to_place = node_additions;
    for (const NodeId& n : post_graph.nodes())
        if (!next.positions.count(n)) to_place.insert(n);
    place_new(next, to_place, post_graph, params);
    refine(next, post_graph, params);
    layout_pass(next, post_graph, params);
    return next;
}

double bounding_radius(const LayoutState& state) {
    const Vec2 c = centroid(state);
    double r = 0.0;
    for (const auto& [_, p] : state.positions) r = std::max(r, (p - c).norm());
    return r;
}

}  // namespace graphstage
