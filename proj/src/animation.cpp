#include "graphstage/animation.hpp"

#include <algorithm>
#include <cmath>

namespace graphstage {

double ease(Easing easing, double u) {
    u = std::clamp(u, 0.0, 1.0);
    if (easing == Easing::Linear) return u;
    return u * u * (3.0 - 2.0 * u);
}

std::string_view SubStage::name() const {
    switch (body.index()) {
    case 0: return "deletion";
    case 1: return "movement";
    case 2: return "addition";
    default: return "pause";
    }
}

std::string_view to_token(Highlight h) {
    switch (h) {
    case Highlight::None: return "none";
    case Highlight::DeleteOrange: return "delete-orange";
    case Highlight::AddBlue: return "add-blue";
    }
    return "?";
}

const SubStage* StageScript::find(std::size_t variant_index) const {
    for (const SubStage& s : sub_stages)
        if (s.body.index() == variant_index) return &s;
    return nullptr;
}

const DeletionSubStage* StageScript::deletion() const {
    const SubStage* s = find(0);
    return s ? &std::get<DeletionSubStage>(s->body) : nullptr;
}

const MovementSubStage& StageScript::movement() const { return std::get<MovementSubStage>(find(1)->body); }

const AdditionSubStage* StageScript::addition() const {
    const SubStage* s = find(2);
    return s ? &std::get<AdditionSubStage>(s->body) : nullptr;
}

std::set<Entity> FrameSnapshot::opaque_entities() const {
    std::set<Entity> out;
    for (const auto& [e, v] : entities)
        if (v.opacity == 1.0) out.insert(e);
    return out;
}

StageScript build_script(const StageDiff& diff, const std::vector<Move>& moves, const StageTiming& timing,
                         Millis start_time, const GraphState& post_graph, const LayoutState& before,
                         const LayoutState& after, Easing easing) {
    StageScript script;
    script.stage_id = diff.source_bin.stage_id;
    script.start_time = start_time;
    script.cause = diff.source_bin.cause;
    script.strategy = diff.source_bin.strategy;
    script.timing = timing;
    script.ephemeral = diff.ephemeral;

    Scene& scene = script.scene;
    for (const NodeId& n : post_graph.nodes()) {
        if (diff.node_additions.count(n)) continue;
        scene.survivor_nodes.insert(n);
        auto it = before.positions.find(n);
        scene.node_positions[n] = it != before.positions.end() ? it->second : after.positions.at(n);
    }
    for (const EdgeKey& e : post_graph.edges())
        if (!diff.edge_additions.count(e)) scene.survivor_edges.insert(e);
    for (const NodeId& n : diff.node_deletions) {
        auto it = before.positions.find(n);
        scene.node_positions[n] = it != before.positions.end() ? it->second : Vec2{};
    }
    for (const NodeId& n : diff.node_additions) scene.node_positions[n] = after.positions.at(n);
    scene.labels = post_graph.labels();
    for (const auto& [n, label] : diff.deleted_labels) scene.labels[n] = label;

    Millis cursor = 0;
    if (timing.deletion) {
        script.sub_stages.push_back({cursor, cursor + *timing.deletion,
                                     DeletionSubStage{diff.node_deletions, diff.edge_deletions, kHighlightFraction}});
        cursor += *timing.deletion;
    }
    script.sub_stages.push_back({cursor, cursor + timing.movement, MovementSubStage{moves, easing}});
    cursor += timing.movement;
    if (timing.addition) {
        script.sub_stages.push_back({cursor, cursor + *timing.addition,
                                     AdditionSubStage{diff.node_additions, diff.edge_additions, kHighlightFraction}});
        cursor += *timing.addition;
    }
    script.sub_stages.push_back({cursor, cursor + timing.pause, PauseSubStage{}});
    return script;
}

namespace {

/// Opacity and highlight strength of an entity being deleted, u in [0, 1).
std::pair<double, double> deletion_ramp(double u, double flash) {
    if (u < flash) return {1.0, 1.0};
    return {1.0 - (u - flash) / (1.0 - flash), 1.0};
}

}  // namespace

FrameSnapshot frame_at(const StageScript& script, Millis t) {
    const StageTiming& timing = script.timing;
    if (t < 0 || t > timing.total)
        throw std::out_of_range("frame time " + std::to_string(t) + " ms outside [0, " + std::to_string(timing.total) + "]");

    const Millis mov_begin = timing.movement_begin();
    const Millis add_begin = timing.addition_begin();
    const Millis pause_begin = timing.pause_begin();

    FrameSnapshot frame;
    frame.t = t;
    const Scene& scene = script.scene;
    frame.positions = scene.node_positions;

    const MovementSubStage& movement = script.movement();
    for (const Move& m : movement.moves) {
        Vec2 p = m.from;
        if (t >= add_begin) {
            p = m.to;
        } else if (t >= mov_begin) {
            const double u = static_cast<double>(t - mov_begin) / static_cast<double>(timing.movement);
            p = m.from + (m.to - m.from) * ease(movement.easing, u);
        }
        frame.positions[m.id] = p;
    }

    for (const NodeId& n : scene.survivor_nodes) {
        frame.entities[Entity::node(n)] = {};
        frame.label_opacity[n] = 1.0;
    }
    for (const EdgeKey& e : scene.survivor_edges) frame.entities[Entity::edge(e)] = {};

    if (const DeletionSubStage* del = script.deletion()) {
        EntityVisual v{0.0, Highlight::None, 0.0};
        double label = 0.0;
        if (t < mov_begin) {
            const double u = static_cast<double>(t) / static_cast<double>(*timing.deletion);
            const auto [opacity, strength] = deletion_ramp(u, del->highlight_fraction);
            v = {opacity, Highlight::DeleteOrange, strength};
            label = 1.0 - (1.0 - kDeletedLabelOpacity) * (1.0 - opacity);
        } else if (t < add_begin) {
            label = kDeletedLabelOpacity;
        }
        for (const NodeId& n : del->nodes) {
            frame.entities[Entity::node(n)] = v;
            frame.label_opacity[n] = label;
        }
        for (const EdgeKey& e : del->edges) frame.entities[Entity::edge(e)] = v;
    }

    if (const AdditionSubStage* add = script.addition()) {
        EntityVisual v{0.0, Highlight::None, 0.0};
        if (t >= pause_begin) {
            v = {1.0, Highlight::None, 0.0};
        } else if (t >= add_begin) {
            const double u = static_cast<double>(t - add_begin) / static_cast<double>(*timing.addition);
            const double strength = u < add->highlight_fraction ? 1.0 : 1.0 - (u - add->highlight_fraction) / (1.0 - add->highlight_fraction);
            v = {u, Highlight::AddBlue, strength};
        }
        for (const NodeId& n : add->nodes) {
            frame.entities[Entity::node(n)] = v;
            frame.label_opacity[n] = v.opacity;
        }
        for (const EdgeKey& e : add->edges) frame.entities[Entity::edge(e)] = v;
    }
    return frame;
}

// ---------------------------------------------------------------------------

std::vector<LagRecord> stage_lag(const Stage& stage, const StageScript& script) {
    std::vector<LagRecord> out;
    const auto& events = stage.bin.events;
    out.reserve(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
        LagRecord r;
        r.seq = events[i].seq;
        r.timestamp = events[i].timestamp;
        r.role = stage.diff.roles[i];
        r.strategy = stage.bin.strategy;
        r.stage_id = stage.bin.stage_id;
        switch (r.role) {
        case EventRole::Addition: r.depiction_start = script.start_time + script.timing.addition_begin(); break;
        case EventRole::Deletion: r.depiction_start = script.start_time + script.timing.deletion_begin(); break;
        case EventRole::Ephemeral:
        case EventRole::NoOp: r.excluded = true; break;
        }
        if (!r.excluded) r.lag = r.depiction_start - r.timestamp;
        out.push_back(r);
    }
    return out;
}

LagSummary summarize_lags(std::vector<Millis> lags) {
    LagSummary s;
    s.count = lags.size();
    if (lags.empty()) return s;
    std::sort(lags.begin(), lags.end());
    double sum = 0.0;
    for (Millis l : lags) sum += static_cast<double>(l);
    s.mean = sum / static_cast<double>(lags.size());
    s.max = lags.back();
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(lags.size())));
    s.p95 = lags[std::max<std::size_t>(rank, 1) - 1];
    return s;
}

LagReport lag_report(const std::vector<std::pair<Stage, StageScript>>& history) {
    LagReport report;
    std::map<Strategy, std::vector<Millis>> lags;
    for (const auto& [stage, script] : history) {
        for (LagRecord& r : stage_lag(stage, script)) {
            if (!r.excluded) lags[r.strategy].push_back(r.lag);
            report.records.push_back(r);
        }
    }
    for (auto& [strategy, values] : lags) report.by_strategy[strategy] = summarize_lags(std::move(values));
    return report;
}

}  // namespace graphstage
