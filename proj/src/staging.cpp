#include "graphstage/staging.hpp"

#include <algorithm>
#include <map>

namespace graphstage {

std::string_view to_token(Strategy s) {
    switch (s) {
    case Strategy::TimeBased: return "time";
    case Strategy::EventBased: return "event";
    case Strategy::Hybrid: return "hybrid";
    }
    return "?";
}

std::optional<Strategy> strategy_from_token(std::string_view token) {
    if (token == "time") return Strategy::TimeBased;
    if (token == "event") return Strategy::EventBased;
    if (token == "hybrid") return Strategy::Hybrid;
    return std::nullopt;
}

std::string_view to_token(TriggerCause c) {
    switch (c) {
    case TriggerCause::TimeThreshold: return "time_threshold";
    case TriggerCause::EventThreshold: return "event_threshold";
    case TriggerCause::ConvergenceTick: return "convergence_tick";
    case TriggerCause::Flush: return "flush";
    }
    return "?";
}

std::optional<TriggerCause> trigger_cause_from_token(std::string_view token) {
    for (auto c : {TriggerCause::TimeThreshold, TriggerCause::EventThreshold, TriggerCause::ConvergenceTick,
                   TriggerCause::Flush})
        if (to_token(c) == token) return c;
    return std::nullopt;
}

void StagingConfig::validate() const {
    auto positive = [](Millis v, const char* name) {
        if (v <= 0) throw ConfigError(std::string(name) + " must be > 0 (got " + std::to_string(v) + ")");
    };
    positive(t_d, "t_d");
    positive(t_m, "t_m");
    positive(t_a, "t_a");
    positive(t_p, "t_p");
    positive(t_i, "t_i");
    if (n_events == 0) throw ConfigError("N must be >= 1");
    if (strategy != Strategy::EventBased && t_i < full_animation())
        throw ConfigError("t_i (" + std::to_string(t_i) + " ms) must be >= t_d + t_m + t_a + t_p (" +
                          std::to_string(full_animation()) + " ms) for " + std::string(to_token(strategy)) +
                          " staging");
}

StagingConfig StagingConfig::defaults(Strategy s) {
    StagingConfig c;
    c.strategy = s;
    return c;
}

StagingConfig StagingConfig::monitoring(Strategy s) {
    StagingConfig c = defaults(s);
    c.n_events = 3;
    return c;
}

StagingConfig StagingConfig::slow_motion(Strategy s) {
    StagingConfig c = defaults(s);
    c.t_d = 500;
    c.t_m = 1200;
    c.t_a = 500;
    c.t_i = c.full_animation();
    return c;
}

// ---------------------------------------------------------------------------
// compose_stage

namespace {

/// Copy-on-write view over the pre-bin graph; replays a bin without copying it.
class GraphOverlay {
public:
    explicit GraphOverlay(const GraphState& base) : base_(base) {}

    bool has_node(const NodeId& n) const {
        auto it = nodes_.find(n);
        return it != nodes_.end() ? it->second : base_.has_node(n);
    }
    bool has_edge(const EdgeKey& e) const {
        auto it = edges_.find(e);
        return it != edges_.end() ? it->second : base_.has_edge(e);
    }
    std::vector<EdgeKey> incident_edges(const NodeId& n) const {
        std::set<EdgeKey> out;
        for (const NodeId& nb : base_.neighbors(n)) {
            EdgeKey e = EdgeKey::make(n, nb);
            if (has_edge(e)) out.insert(std::move(e));
        }
        if (auto it = added_adj_.find(n); it != added_adj_.end()) {
            for (const NodeId& nb : it->second) {
                EdgeKey e = EdgeKey::make(n, nb);
                if (has_edge(e)) out.insert(std::move(e));
            }
        }
        return {out.begin(), out.end()};
    }
    void add_node(const NodeId& n, std::optional<std::string> label) {
        nodes_[n] = true;
        if (label) labels_[n] = std::move(*label);
        else labels_.erase(n);
    }
    void remove_node(const NodeId& n) { nodes_[n] = false; }
    void add_edge(const EdgeKey& e) {
        edges_[e] = true;
        added_adj_[e.a].insert(e.b);
        added_adj_[e.b].insert(e.a);
    }
    void remove_edge(const EdgeKey& e) { edges_[e] = false; }

    const std::map<NodeId, std::string>& labels() const { return labels_; }

private:
    const GraphState& base_;
    std::map<NodeId, bool> nodes_;
    std::map<EdgeKey, bool> edges_;
    std::map<NodeId, std::set<NodeId>> added_adj_;
    std::map<NodeId, std::string> labels_;
};

struct ChangeRecord {
    std::size_t order;      // global change counter
    std::size_t event;      // index into bin.events
    EntityChange change;
};

GraphEvent event_for_change(const GraphEvent& raw, const EntityChange& ch) {
    if (!ch.synthetic) return raw;
    GraphEvent ev = ch.entity.is_node()
                        ? node_event(ch.added ? EventKind::NodeAdd : EventKind::NodeRemove, raw.timestamp, ch.entity.a)
                        : edge_event(ch.added ? EventKind::EdgeAdd : EventKind::EdgeRemove, raw.timestamp, ch.entity.a,
                                     ch.entity.b);
    ev.seq = raw.seq;
    ev.synthetic = true;
    return ev;
}

}  // namespace

StageDiff compose_stage(const Bin& bin, const GraphState& pre_state) {
    StageDiff diff;
    diff.source_bin = bin;
    diff.roles.assign(bin.events.size(), EventRole::NoOp);

    GraphOverlay overlay(pre_state);
    ApplyLog log;
    std::map<Entity, std::vector<ChangeRecord>> history;
    std::vector<std::optional<std::pair<Entity, std::size_t>>> own_change(bin.events.size());
    std::size_t order = 0;

    for (std::size_t i = 0; i < bin.events.size(); ++i) {
        const GraphEvent& ev = bin.events[i];
        for (EntityChange& ch : apply_event(overlay, ev, &log, ApplyMode::Lenient)) {
            auto& list = history[ch.entity];
            if (!ch.synthetic) own_change[i] = std::make_pair(ch.entity, list.size());
            list.push_back({order++, i, std::move(ch)});
        }
    }
    diff.warnings = std::move(log.warnings);

    // Changes on one entity alternate add/remove; consecutive pairs cancel.
    std::vector<std::pair<std::size_t, EphemeralPair>> pairs;
    for (const auto& [entity, list] : history) {
        const std::size_t paired = list.size() - list.size() % 2;
        for (std::size_t k = 0; k < paired; k += 2) {
            const ChangeRecord& x = list[k];
            const ChangeRecord& y = list[k + 1];
            pairs.emplace_back(y.order, EphemeralPair{entity, event_for_change(bin.events[x.event], x.change),
                                                      event_for_change(bin.events[y.event], y.change)});
        }
        if (paired == list.size()) continue;
        const ChangeRecord& net = list.back();
        if (entity.is_node()) {
            if (net.change.added) {
                diff.node_additions.insert(entity.a);
                if (auto it = overlay.labels().find(entity.a); it != overlay.labels().end())
                    diff.added_labels.emplace(entity.a, it->second);
            } else {
                diff.node_deletions.insert(entity.a);
                if (auto it = pre_state.labels().find(entity.a); it != pre_state.labels().end())
                    diff.deleted_labels.emplace(entity.a, it->second);
            }
        } else {
            (net.change.added ? diff.edge_additions : diff.edge_deletions).insert(entity.edge_key());
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    for (auto& [_, p] : pairs) diff.ephemeral.push_back(std::move(p));

    for (std::size_t i = 0; i < bin.events.size(); ++i) {
        if (!own_change[i]) continue;
        const auto& [entity, pos] = *own_change[i];
        const auto& list = history.at(entity);
        const bool cancelled = pos < list.size() - list.size() % 2;
        if (cancelled) diff.roles[i] = EventRole::Ephemeral;
        else diff.roles[i] = bin.events[i].is_add() ? EventRole::Addition : EventRole::Deletion;
    }
    return diff;
}

void apply_diff(GraphState& state, const StageDiff& diff) {
    for (const EdgeKey& e : diff.edge_deletions) state.remove_edge(e);
    for (const NodeId& n : diff.node_deletions) state.remove_node(n);
    for (const NodeId& n : diff.node_additions) {
        auto it = diff.added_labels.find(n);
        state.add_node(n, it == diff.added_labels.end() ? std::nullopt : std::optional<std::string>(it->second));
    }
    for (const EdgeKey& e : diff.edge_additions) state.add_edge(e);
}

StageTiming stage_timing(const StageDiff& diff, const StagingConfig& config) {
    StageTiming t;
    const bool variable = config.strategy == Strategy::Hybrid;
    if (!variable || diff.has_deletions()) t.deletion = config.t_d;
    t.movement = config.t_m;
    if (!variable || diff.has_additions()) t.addition = config.t_a;
    t.pause = config.t_p;
    t.total = t.deletion.value_or(0) + t.movement + t.addition.value_or(0) + t.pause;
    return t;
}

}  // namespace graphstage
