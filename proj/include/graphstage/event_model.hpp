#pragma once

#include "graphstage/common.hpp"

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace graphstage {

enum class EventKind : std::uint8_t { NodeAdd, NodeRemove, EdgeAdd, EdgeRemove };

std::string_view to_token(EventKind kind);
std::optional<EventKind> event_kind_from_token(std::string_view token);

/// One timestamped change to the network.
struct GraphEvent {
    std::uint64_t seq = 0;
    Millis timestamp = 0;
    EventKind kind = EventKind::NodeAdd;
    NodeId a;
    NodeId b;  // empty for node kinds
    std::optional<std::string> label;
    bool synthetic = false;

    bool is_node_event() const { return kind == EventKind::NodeAdd || kind == EventKind::NodeRemove; }
    bool is_add() const { return kind == EventKind::NodeAdd || kind == EventKind::EdgeAdd; }
    EdgeKey edge() const { return EdgeKey::make(a, b); }
    Entity subject() const { return is_node_event() ? Entity::node(a) : Entity::edge(edge()); }

    bool operator==(const GraphEvent&) const = default;
};

GraphEvent node_event(EventKind kind, Millis ts, NodeId id, std::optional<std::string> label = std::nullopt);
GraphEvent edge_event(EventKind kind, Millis ts, NodeId x, NodeId y);

/// Node and edge sets with an adjacency index. Edges always join two present nodes.
class GraphState {
public:
    bool has_node(const NodeId& id) const { return adjacency_.count(id) != 0; }
    bool has_edge(const EdgeKey& e) const { return edges_.count(e) != 0; }
    bool has(const Entity& e) const { return e.is_node() ? has_node(e.a) : has_edge(e.edge_key()); }

    void add_node(const NodeId& id, std::optional<std::string> label = std::nullopt);
    /// Removes the node; the caller must have removed incident edges first.
    void remove_node(const NodeId& id);
    void add_edge(const EdgeKey& e);
    void remove_edge(const EdgeKey& e);
    void set_label(const NodeId& id, std::string label) { labels_[id] = std::move(label); }

    /// Incident edges of a node, sorted.
    std::vector<EdgeKey> incident_edges(const NodeId& id) const;
    const std::set<NodeId>& neighbors(const NodeId& id) const;

    std::set<NodeId> nodes() const;
    const std::set<EdgeKey>& edges() const { return edges_; }
    const std::map<NodeId, std::string>& labels() const { return labels_; }
    std::size_t node_count() const { return adjacency_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    bool empty() const { return adjacency_.empty(); }

    bool operator==(const GraphState&) const = default;

private:
    std::map<NodeId, std::set<NodeId>> adjacency_;
    std::set<EdgeKey> edges_;
    std::map<NodeId, std::string> labels_;
};

enum class ApplyMode : std::uint8_t { Lenient, Strict };

/// Strict-mode violation; names the offending event.
class EventError : public std::runtime_error {
public:
    EventError(std::uint64_t seq, const std::string& what)
        : std::runtime_error("event seq " + std::to_string(seq) + ": " + what), seq_(seq) {}
    std::uint64_t seq() const { return seq_; }

private:
    std::uint64_t seq_;
};

struct ApplyWarning {
    std::uint64_t seq = 0;
    std::string message;
    bool operator==(const ApplyWarning&) const = default;
};

/// Side products of applying events: lenient no-op warnings and the synthetic
/// events implied by auto-creation (EdgeAdd to absent node) and cascading
/// edge removal (NodeRemove of a node with incident edges).
struct ApplyLog {
    std::vector<ApplyWarning> warnings;
    std::vector<GraphEvent> synthetic;
};

/// One state change caused by an event, in application order.
struct EntityChange {
    Entity entity;
    bool added = false;
    bool synthetic = false;  // caused indirectly (auto-create, cascade)
};

/// Minimal interface apply_event needs; GraphState and the staging overlay model it.
template <class G>
concept MutableGraph = requires(G g, const G cg, const NodeId& n, const EdgeKey& e) {
    { cg.has_node(n) } -> std::convertible_to<bool>;
    { cg.has_edge(e) } -> std::convertible_to<bool>;
    { cg.incident_edges(n) } -> std::convertible_to<std::vector<EdgeKey>>;
    g.add_node(n, std::optional<std::string>{});
    g.remove_node(n);
    g.add_edge(e);
    g.remove_edge(e);
};

/// Applies one event. Returns the effective changes (empty for a lenient no-op).
template <MutableGraph G>
std::vector<EntityChange> apply_event(G& g, const GraphEvent& ev, ApplyLog* log = nullptr,
                                      ApplyMode mode = ApplyMode::Lenient);

/// Value form: returns the mutated copy.
GraphState applied(GraphState state, const GraphEvent& ev, ApplyMode mode = ApplyMode::Lenient,
                   ApplyLog* log = nullptr);

/// Replays events in order onto a copy of `start`.
GraphState replay(GraphState start, std::span<const GraphEvent> events, ApplyMode mode = ApplyMode::Lenient,
                  ApplyLog* log = nullptr);

// ---------------------------------------------------------------------------
// Input formats

enum class InputFormat : std::uint8_t { NativeCsv, NativeJsonl, FlowCsv };

std::string_view to_token(InputFormat f);
std::optional<InputFormat> input_format_from_token(std::string_view token);

/// Parses native-csv or native-jsonl. Output is stably sorted by timestamp and
/// renumbered with seq = 1, 2, ...
std::vector<GraphEvent> parse_event_stream(std::string_view text, InputFormat format);

/// Writes events as native-csv (header included).
std::string format_events_csv(std::span<const GraphEvent> events);

struct FlowRecord {
    Millis time = 0;
    Millis duration = 0;
    NodeId source;
    NodeId destination;
    std::vector<std::pair<std::string, std::string>> attributes;
};

std::vector<FlowRecord> parse_flow_csv(std::string_view text);

struct FlowAdapterResult {
    std::vector<GraphEvent> events;
    std::vector<std::string> skipped;  // one diagnostic per rejected record
};

/// Maps flow records onto edge lifetimes with reference-counted endpoint nodes.
FlowAdapterResult flow_adapter(std::span<const FlowRecord> records, Millis min_lifetime);

/// Loads and converts any supported input format into graph events.
std::vector<GraphEvent> load_events(std::string_view text, InputFormat format, Millis min_lifetime = 0);

// ---------------------------------------------------------------------------

template <MutableGraph G>
std::vector<EntityChange> apply_event(G& g, const GraphEvent& ev, ApplyLog* log, ApplyMode mode) {
    std::vector<EntityChange> changes;
    const bool strict = mode == ApplyMode::Strict;
    auto noop = [&](const std::string& msg) {
        if (strict) throw EventError(ev.seq, msg);
        if (log) log->warnings.push_back({ev.seq, msg});
    };
    auto synth = [&](EventKind kind, NodeId x, NodeId y) {
        if (!log) return;
        GraphEvent s = y.empty() ? node_event(kind, ev.timestamp, std::move(x)) : edge_event(kind, ev.timestamp, std::move(x), std::move(y));
        s.seq = ev.seq;
        s.synthetic = true;
        log->synthetic.push_back(std::move(s));
    };

    switch (ev.kind) {
    case EventKind::NodeAdd:
        if (g.has_node(ev.a)) {
            noop("duplicate add of node " + ev.a);
            break;
        }
        g.add_node(ev.a, ev.label);
        changes.push_back({Entity::node(ev.a), true, false});
        break;
    case EventKind::NodeRemove: {
        if (!g.has_node(ev.a)) {
            noop("remove of absent node " + ev.a);
            break;
        }
        for (const EdgeKey& e : g.incident_edges(ev.a)) {
            g.remove_edge(e);
            changes.push_back({Entity::edge(e), false, true});
            synth(EventKind::EdgeRemove, e.a, e.b);
        }
        g.remove_node(ev.a);
        changes.push_back({Entity::node(ev.a), false, false});
        break;
    }
    case EventKind::EdgeAdd: {
        if (ev.a == ev.b) throw EventError(ev.seq, "self-loop on node " + ev.a);
        const EdgeKey e = ev.edge();
        if (g.has_edge(e)) {
            noop("duplicate add of edge " + e.a + "--" + e.b);
            break;
        }
        for (const NodeId* n : {&e.a, &e.b}) {
            if (g.has_node(*n)) continue;
            if (strict) throw EventError(ev.seq, "edge references absent node " + *n);
            g.add_node(*n, std::nullopt);
            changes.push_back({Entity::node(*n), true, true});
            synth(EventKind::NodeAdd, *n, {});
        }
        g.add_edge(e);
        changes.push_back({Entity::edge(e), true, false});
        break;
    }
    case EventKind::EdgeRemove: {
        if (ev.a == ev.b) throw EventError(ev.seq, "self-loop on node " + ev.a);
        const EdgeKey e = ev.edge();
        if (!g.has_edge(e)) {
            noop("remove of absent edge " + e.a + "--" + e.b);
            break;
        }
        g.remove_edge(e);
        changes.push_back({Entity::edge(e), false, false});
        break;
    }
    }
    return changes;
}

}  // namespace graphstage
