#include "graphstage/event_model.hpp"

#include "graphstage/logging.hpp"

#include <algorithm>

namespace graphstage {

namespace {
const std::set<NodeId> kNoNeighbors;
}

std::string_view to_token(EventKind kind) {
    switch (kind) {
    case EventKind::NodeAdd: return "node_add";
    case EventKind::NodeRemove: return "node_remove";
    case EventKind::EdgeAdd: return "edge_add";
    case EventKind::EdgeRemove: return "edge_remove";
    }
    return "?";
}

std::optional<EventKind> event_kind_from_token(std::string_view token) {
    if (token == "node_add") return EventKind::NodeAdd;
    if (token == "node_remove") return EventKind::NodeRemove;
    if (token == "edge_add") return EventKind::EdgeAdd;
    if (token == "edge_remove") return EventKind::EdgeRemove;
    return std::nullopt;
}

std::string_view to_token(InputFormat f) {
    switch (f) {
    case InputFormat::NativeCsv: return "csv";
    case InputFormat::NativeJsonl: return "jsonl";
    case InputFormat::FlowCsv: return "flow-csv";
    }
    return "?";
}

std::optional<InputFormat> input_format_from_token(std::string_view token) {
    if (token == "csv") return InputFormat::NativeCsv;
    if (token == "jsonl") return InputFormat::NativeJsonl;
    if (token == "flow-csv") return InputFormat::FlowCsv;
    return std::nullopt;
}

GraphEvent node_event(EventKind kind, Millis ts, NodeId id, std::optional<std::string> label) {
    GraphEvent ev;
    ev.timestamp = ts;
    ev.kind = kind;
    ev.a = std::move(id);
    ev.label = std::move(label);
    return ev;
}

GraphEvent edge_event(EventKind kind, Millis ts, NodeId x, NodeId y) {
    GraphEvent ev;
    ev.timestamp = ts;
    ev.kind = kind;
    ev.a = std::move(x);
    ev.b = std::move(y);
    return ev;
}

void GraphState::add_node(const NodeId& id, std::optional<std::string> label) {
    adjacency_.try_emplace(id);
    if (label) labels_[id] = std::move(*label);
}

void GraphState::remove_node(const NodeId& id) {
    auto it = adjacency_.find(id);
    if (it == adjacency_.end()) return;
    for (const NodeId& other : it->second) {
        edges_.erase(EdgeKey::make(id, other));
        adjacency_[other].erase(id);
    }
    adjacency_.erase(it);
    labels_.erase(id);
}

void GraphState::add_edge(const EdgeKey& e) {
    adjacency_[e.a].insert(e.b);
    adjacency_[e.b].insert(e.a);
    edges_.insert(e);
}

void GraphState::remove_edge(const EdgeKey& e) {
    if (edges_.erase(e) == 0) return;
    adjacency_[e.a].erase(e.b);
    adjacency_[e.b].erase(e.a);
}

std::vector<EdgeKey> GraphState::incident_edges(const NodeId& id) const {
    std::vector<EdgeKey> out;
    for (const NodeId& other : neighbors(id)) out.push_back(EdgeKey::make(id, other));
    std::sort(out.begin(), out.end());
    return out;
}

const std::set<NodeId>& GraphState::neighbors(const NodeId& id) const {
    auto it = adjacency_.find(id);
    return it == adjacency_.end() ? kNoNeighbors : it->second;
}

std::set<NodeId> GraphState::nodes() const {
    std::set<NodeId> out;
    for (const auto& [id, _] : adjacency_) out.insert(out.end(), id);
    return out;
}

GraphState applied(GraphState state, const GraphEvent& ev, ApplyMode mode, ApplyLog* log) {
    apply_event(state, ev, log, mode);
    return state;
}

GraphState replay(GraphState start, std::span<const GraphEvent> events, ApplyMode mode, ApplyLog* log) {
    for (const GraphEvent& ev : events) apply_event(start, ev, log, mode);
    return start;
}

std::vector<GraphEvent> load_events(std::string_view text, InputFormat format, Millis min_lifetime) {
    if (format == InputFormat::FlowCsv) {
        const auto records = parse_flow_csv(text);
        FlowAdapterResult result = flow_adapter(records, min_lifetime);
        for (const std::string& why : result.skipped) log::warn("flow record skipped: " + why);
        return std::move(result.events);
    }
    return parse_event_stream(text, format);
}

}  // namespace graphstage
