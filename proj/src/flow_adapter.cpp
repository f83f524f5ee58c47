#include "graphstage/event_model.hpp"

#include <algorithm>
#include <map>

namespace graphstage {

namespace {

struct Interval {
    EdgeKey pair;
    Millis start;
    Millis end;
    std::size_t order;  // index of the record that opened it
};

}  // namespace

FlowAdapterResult flow_adapter(std::span<const FlowRecord> records, Millis min_lifetime) {
    FlowAdapterResult result;

    std::vector<std::size_t> order(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return records[x].time < records[y].time; });

    // Union of active intervals per pair. A flow starting at or before the
    // current expiry extends the open interval instead of starting a new edge.
    std::map<EdgeKey, std::size_t> open;
    std::vector<Interval> intervals;
    for (std::size_t idx : order) {
        const FlowRecord& rec = records[idx];
        if (rec.source == rec.destination) {
            result.skipped.push_back("record " + std::to_string(idx + 1) + ": source equals destination (" + rec.source + ")");
            continue;
        }
        const EdgeKey pair = EdgeKey::make(rec.source, rec.destination);
        const Millis end = rec.time + std::max(rec.duration, min_lifetime);
        auto it = open.find(pair);
        if (it != open.end() && rec.time <= intervals[it->second].end) {
            intervals[it->second].end = std::max(intervals[it->second].end, end);
            continue;
        }
        open[pair] = intervals.size();
        intervals.push_back({pair, rec.time, end, intervals.size()});
    }

    // Edge boundaries in time order; at equal times additions precede removals so
    // a node handed from one edge to another is not removed and re-added.
    struct Boundary {
        Millis time;
        bool add;
        std::size_t interval;
    };
    std::vector<Boundary> bounds;
    bounds.reserve(intervals.size() * 2);
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        bounds.push_back({intervals[i].start, true, i});
        bounds.push_back({intervals[i].end, false, i});
    }
    std::stable_sort(bounds.begin(), bounds.end(), [](const Boundary& x, const Boundary& y) {
        if (x.time != y.time) return x.time < y.time;
        return x.add && !y.add;
    });

    std::map<NodeId, std::size_t> refcount;
    for (const Boundary& b : bounds) {
        const EdgeKey& pair = intervals[b.interval].pair;
        if (b.add) {
            for (const NodeId* n : {&pair.a, &pair.b})
                if (refcount[*n]++ == 0) result.events.push_back(node_event(EventKind::NodeAdd, b.time, *n));
            result.events.push_back(edge_event(EventKind::EdgeAdd, b.time, pair.a, pair.b));
        } else {
            result.events.push_back(edge_event(EventKind::EdgeRemove, b.time, pair.a, pair.b));
            for (const NodeId* n : {&pair.a, &pair.b})
                if (--refcount[*n] == 0) result.events.push_back(node_event(EventKind::NodeRemove, b.time, *n));
        }
    }

    std::uint64_t seq = 0;
    for (GraphEvent& ev : result.events) {
        ev.seq = ++seq;
        ev.synthetic = true;
    }
    return result;
}

}  // namespace graphstage
