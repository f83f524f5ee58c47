#pragma once

#include "graphstage/event_model.hpp"
#include "graphstage/staging.hpp"

#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace testing {

using graphstage::EventKind;
using graphstage::GraphEvent;
using graphstage::Millis;

/// Plain-set graph used as an independent oracle for lenient replay.
struct SetGraph {
    std::set<std::string> nodes;
    std::set<std::pair<std::string, std::string>> edges;  // first < second

    static std::pair<std::string, std::string> key(const std::string& a, const std::string& b) {
        return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    }

    void apply(const GraphEvent& ev) {
        switch (ev.kind) {
        case EventKind::NodeAdd: nodes.insert(ev.a); break;
        case EventKind::NodeRemove:
            nodes.erase(ev.a);
            for (auto it = edges.begin(); it != edges.end();) {
                if (it->first == ev.a || it->second == ev.a) it = edges.erase(it);
                else ++it;
            }
            break;
        case EventKind::EdgeAdd:
            nodes.insert(ev.a);
            nodes.insert(ev.b);
            edges.insert(key(ev.a, ev.b));
            break;
        case EventKind::EdgeRemove: edges.erase(key(ev.a, ev.b)); break;
        }
    }

    static SetGraph from(const graphstage::GraphState& g) {
        SetGraph s;
        for (const auto& n : g.nodes()) s.nodes.insert(n);
        for (const auto& e : g.edges()) s.edges.insert({e.a, e.b});
        return s;
    }

    bool operator==(const SetGraph&) const = default;
};

/// Every node and edge of a graph as entities.
inline std::set<graphstage::Entity> entities_of(const graphstage::GraphState& g) {
    std::set<graphstage::Entity> out;
    for (const auto& n : g.nodes()) out.insert(graphstage::Entity::node(n));
    for (const auto& e : g.edges()) out.insert(graphstage::Entity::edge(e));
    return out;
}

/// Random event stream over a small node pool, so duplicates, removals of
/// absent entities and intra-bin cancellations are common.
inline std::vector<GraphEvent> random_stream(std::mt19937_64& rng, std::size_t count, int pool = 10,
                                             Millis max_gap = 900) {
    std::uniform_int_distribution<int> node(0, pool - 1);
    std::uniform_int_distribution<int> kind(0, 3);
    std::uniform_int_distribution<Millis> gap(0, max_gap);
    std::bernoulli_distribution same_time(0.2);
    std::vector<GraphEvent> out;
    Millis t = gap(rng);
    for (std::size_t i = 0; i < count; ++i) {
        if (!same_time(rng)) t += gap(rng);
        const std::string a = "n" + std::to_string(node(rng));
        std::string b = "n" + std::to_string(node(rng));
        while (b == a) b = "n" + std::to_string(node(rng));
        GraphEvent ev;
        switch (kind(rng)) {
        case 0: ev = graphstage::node_event(EventKind::NodeAdd, t, a); break;
        case 1: ev = graphstage::node_event(EventKind::NodeRemove, t, a); break;
        case 2: ev = graphstage::edge_event(EventKind::EdgeAdd, t, a, b); break;
        default: ev = graphstage::edge_event(EventKind::EdgeRemove, t, a, b); break;
        }
        ev.seq = i + 1;
        out.push_back(std::move(ev));
    }
    return out;
}

/// Feeds the whole stream, closes input and drains the engine.
inline std::vector<graphstage::Stage> drain_offline(const std::vector<GraphEvent>& events,
                                                    const graphstage::StagingConfig& config) {
    graphstage::StagingEngine engine(config);
    for (const auto& ev : events) engine.feed(ev);
    engine.close_input();
    std::vector<graphstage::Stage> out;
    while (!engine.drained()) {
        const auto t = engine.next_trigger();
        if (!t) break;
        out.push_back(*engine.poll(*t));
    }
    return out;
}

/// Feeds events as a clock advances in random steps, polling at every step.
inline std::vector<graphstage::Stage> drain_online(const std::vector<GraphEvent>& events,
                                                   const graphstage::StagingConfig& config, std::mt19937_64& rng) {
    graphstage::StagingEngine engine(config);
    std::uniform_int_distribution<Millis> step(1, 700);
    std::vector<graphstage::Stage> out;
    std::size_t next = 0;
    Millis now = 0;
    while (!engine.drained()) {
        while (next < events.size() && events[next].timestamp <= now) engine.feed(events[next++]);
        if (next == events.size() && !engine.input_closed()) engine.close_input();
        while (!engine.drained()) {
            auto stage = engine.poll(now);
            if (!stage) break;
            out.push_back(std::move(*stage));
        }
        now += step(rng);
    }
    return out;
}

}  // namespace testing
