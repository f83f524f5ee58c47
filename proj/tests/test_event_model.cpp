#include "graphstage/event_model.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>

using namespace graphstage;

namespace {

GraphEvent with_seq(GraphEvent ev, std::uint64_t seq) {
    ev.seq = seq;
    return ev;
}

}  // namespace

TEST_CASE("node add on an empty graph") {
    const GraphState g = applied({}, node_event(EventKind::NodeAdd, 0, "A"));
    CHECK(g.nodes() == std::set<NodeId>{"A"});
    CHECK(g.edges().empty());
}

TEST_CASE("edge add auto-creates endpoints as synthetic node adds") {
    GraphState g;
    ApplyLog log;
    const auto changes = apply_event(g, with_seq(edge_event(EventKind::EdgeAdd, 40, "A", "B"), 1), &log);
    CHECK(g.nodes() == std::set<NodeId>{"A", "B"});
    CHECK(g.has_edge(EdgeKey::make("B", "A")));
    REQUIRE(log.synthetic.size() == 2);
    for (const GraphEvent& ev : log.synthetic) {
        CHECK(ev.kind == EventKind::NodeAdd);
        CHECK(ev.synthetic);
        CHECK(ev.timestamp == 40);
    }
    REQUIRE(changes.size() == 3);
    CHECK(changes[0].synthetic);
    CHECK(changes[1].synthetic);
    CHECK_FALSE(changes[2].synthetic);
    CHECK(log.warnings.empty());
}

TEST_CASE("node remove cascades its edges first") {
    GraphState g;
    apply_event(g, edge_event(EventKind::EdgeAdd, 0, "A", "B"));
    ApplyLog log;
    const auto changes = apply_event(g, with_seq(node_event(EventKind::NodeRemove, 5, "A"), 2), &log);
    CHECK(g.nodes() == std::set<NodeId>{"B"});
    CHECK(g.edges().empty());
    REQUIRE(changes.size() == 2);
    CHECK(changes[0].entity == Entity::edge(EdgeKey::make("A", "B")));
    CHECK(changes[0].synthetic);
    CHECK(changes[1].entity == Entity::node("A"));

    // Oracle: plain-set replay of the same list.
    testing::SetGraph oracle;
    oracle.apply(edge_event(EventKind::EdgeAdd, 0, "A", "B"));
    oracle.apply(node_event(EventKind::NodeRemove, 5, "A"));
    CHECK(testing::SetGraph::from(g) == oracle);
}

TEST_CASE("lenient no-ops warn, strict mode names the seq") {
    GraphState g;
    apply_event(g, node_event(EventKind::NodeAdd, 0, "A"));

    ApplyLog log;
    CHECK(apply_event(g, with_seq(node_event(EventKind::NodeAdd, 1, "A"), 7), &log).empty());
    CHECK(apply_event(g, with_seq(node_event(EventKind::NodeRemove, 1, "Z"), 8), &log).empty());
    CHECK(apply_event(g, with_seq(edge_event(EventKind::EdgeRemove, 1, "A", "Z"), 9), &log).empty());
    REQUIRE(log.warnings.size() == 3);
    CHECK(log.warnings[0].seq == 7);
    CHECK(log.warnings[2].seq == 9);

    auto strict_seq = [&](GraphEvent ev) -> std::uint64_t {
        GraphState copy = g;
        try {
            apply_event(copy, ev, nullptr, ApplyMode::Strict);
        } catch (const EventError& e) {
            return e.seq();
        }
        return 0;
    };
    CHECK(strict_seq(with_seq(node_event(EventKind::NodeAdd, 1, "A"), 11)) == 11);
    CHECK(strict_seq(with_seq(node_event(EventKind::NodeRemove, 1, "Q"), 12)) == 12);
    CHECK(strict_seq(with_seq(edge_event(EventKind::EdgeAdd, 1, "A", "Q"), 13)) == 13);
    CHECK(strict_seq(with_seq(edge_event(EventKind::EdgeRemove, 1, "A", "Q"), 14)) == 14);
}

TEST_CASE("self-loops are rejected") {
    GraphState g;
    GraphEvent ev;
    ev.kind = EventKind::EdgeAdd;
    ev.a = ev.b = "A";
    CHECK_THROWS(apply_event(g, ev));
}

TEST_CASE("conservation: replay matches a plain-set oracle on random streams") {
    std::mt19937_64 rng(7);
    for (int round = 0; round < 200; ++round) {
        const auto events = testing::random_stream(rng, 120);
        testing::SetGraph oracle;
        for (const auto& ev : events) oracle.apply(ev);
        const GraphState g = replay({}, events);
        CHECK(testing::SetGraph::from(g) == oracle);
        for (const EdgeKey& e : g.edges()) {
            CHECK(g.has_node(e.a));
            CHECK(g.has_node(e.b));
            CHECK(e.a != e.b);
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing

TEST_CASE("native csv parses, sorts stably and renumbers") {
    const std::string text =
        "seq,timestamp_ms,kind,subject_a,subject_b,label\n"
        "1,300,node_add,C,,\n"
        "2,100,node_add,A,,alpha\n"
        "3,200,edge_add,A,B,\n"
        "4,100,node_add,\"B,2\",,\n";
    const auto events = parse_event_stream(text, InputFormat::NativeCsv);
    REQUIRE(events.size() == 4);
    CHECK(events[0].a == "A");
    CHECK(events[0].label == std::optional<std::string>("alpha"));
    CHECK(events[1].a == "B,2");  // same timestamp keeps input order
    CHECK(events[2].kind == EventKind::EdgeAdd);
    CHECK(events[3].timestamp == 300);
    for (std::size_t i = 0; i < events.size(); ++i) CHECK(events[i].seq == i + 1);
}

TEST_CASE("empty input gives an empty stream") {
    CHECK(parse_event_stream("", InputFormat::NativeCsv).empty());
    CHECK(parse_event_stream("", InputFormat::NativeJsonl).empty());
    CHECK(parse_event_stream("seq,timestamp_ms,kind,subject_a,subject_b,label\n", InputFormat::NativeCsv).empty());
}

TEST_CASE("native jsonl parses the same fields") {
    const std::string text =
        "{\"seq\":1,\"timestamp_ms\":5,\"kind\":\"edge_add\",\"subject_a\":\"x\",\"subject_b\":\"y\"}\n"
        "\n"
        "{\"seq\":2,\"timestamp_ms\":2,\"kind\":\"node_add\",\"subject_a\":\"z\",\"label\":\"zed\"}\n";
    const auto events = parse_event_stream(text, InputFormat::NativeJsonl);
    REQUIRE(events.size() == 2);
    CHECK(events[0].a == "z");
    CHECK(events[0].label == std::optional<std::string>("zed"));
    CHECK(events[1].b == "y");
}

TEST_CASE("malformed rows report their line") {
    const std::string header = "seq,timestamp_ms,kind,subject_a,subject_b,label\n";
    auto line_of = [&](const std::string& body, InputFormat f = InputFormat::NativeCsv) -> std::size_t {
        try {
            parse_event_stream(body, f);
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    CHECK(line_of(header + "1,10,node_add,A,,\n2,abc,node_add,B,,\n") == 3);
    CHECK(line_of(header + "1,10,node_jump,A,,\n") == 2);
    CHECK(line_of(header + "1,-5,node_add,A,,\n") == 2);
    CHECK(line_of(header + "1,5,edge_add,A,,\n") == 2);
    CHECK(line_of(header + "1,5,node_add,A,B,\n") == 2);
    CHECK(line_of(header + "1,5,edge_add,A,A,\n") == 2);
    CHECK(line_of("{\"seq\":1,\"timestamp_ms\":5,\"kind\":\"node_add\",\"subject_a\":\"x\"}\n{oops\n",
                  InputFormat::NativeJsonl) == 2);
}

TEST_CASE("csv round trip through format_events_csv") {
    std::mt19937_64 rng(3);
    auto events = testing::random_stream(rng, 50);
    const auto labelled = std::find_if(events.begin(), events.end(), [](const GraphEvent& e) { return e.kind == EventKind::NodeAdd; });
    REQUIRE(labelled != events.end());
    labelled->label = "has,comma \"quoted\"";
    const auto back = parse_event_stream(format_events_csv(events), InputFormat::NativeCsv);
    REQUIRE(back.size() == events.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
        CHECK(back[i].timestamp == events[i].timestamp);
        CHECK(back[i].kind == events[i].kind);
        CHECK(back[i].a == events[i].a);
        CHECK(back[i].b == events[i].b);
        CHECK(back[i].label == events[i].label);
    }
}

// ---------------------------------------------------------------------------
// Flow adapter

namespace {

FlowRecord flow(Millis t, Millis d, std::string s, std::string dst) { return FlowRecord{t, d, std::move(s), std::move(dst), {}}; }

/// Independent oracle: union of [t, t + max(d, min_life)] intervals per pair,
/// touching intervals merged.
std::map<std::pair<std::string, std::string>, std::vector<std::pair<Millis, Millis>>> interval_union(
    const std::vector<FlowRecord>& records, Millis min_life) {
    std::map<std::pair<std::string, std::string>, std::vector<std::pair<Millis, Millis>>> raw, merged;
    for (const auto& r : records) {
        if (r.source == r.destination) continue;
        raw[testing::SetGraph::key(r.source, r.destination)].push_back({r.time, r.time + std::max(r.duration, min_life)});
    }
    for (auto& [pair, list] : raw) {
        std::sort(list.begin(), list.end());
        auto& out = merged[pair];
        for (const auto& iv : list) {
            if (!out.empty() && iv.first <= out.back().second) out.back().second = std::max(out.back().second, iv.second);
            else out.push_back(iv);
        }
    }
    return merged;
}

}  // namespace

TEST_CASE("single flow record") {
    const std::vector<FlowRecord> records{flow(100000, 30000, "C1", "C2")};
    const auto result = flow_adapter(records, 0);
    std::multiset<std::tuple<Millis, EventKind, std::string>> got;
    for (const auto& ev : result.events) {
        CHECK(ev.synthetic);
        got.insert({ev.timestamp, ev.kind, ev.is_node_event() ? ev.a : ev.a + "-" + ev.b});
    }
    const std::multiset<std::tuple<Millis, EventKind, std::string>> want{
        {100000, EventKind::NodeAdd, "C1"},    {100000, EventKind::NodeAdd, "C2"},
        {100000, EventKind::EdgeAdd, "C1-C2"}, {130000, EventKind::EdgeRemove, "C1-C2"},
        {130000, EventKind::NodeRemove, "C1"}, {130000, EventKind::NodeRemove, "C2"}};
    CHECK(got == want);
}

TEST_CASE("overlapping flows extend one edge") {
    const std::vector<FlowRecord> records{flow(0, 10000, "C1", "C2"), flow(5000, 10000, "C2", "C1")};
    const auto result = flow_adapter(records, 0);
    std::vector<std::pair<Millis, EventKind>> edges;
    for (const auto& ev : result.events)
        if (!ev.is_node_event()) edges.push_back({ev.timestamp, ev.kind});
    REQUIRE(edges.size() == 2);
    CHECK(edges[0] == std::make_pair(Millis{0}, EventKind::EdgeAdd));
    CHECK(edges[1] == std::make_pair(Millis{15000}, EventKind::EdgeRemove));
    const auto oracle = interval_union(records, 0);
    CHECK(oracle.begin()->second == std::vector<std::pair<Millis, Millis>>{{0, 15000}});
}

TEST_CASE("min lifetime stretches short flows") {
    const auto result = flow_adapter(std::vector<FlowRecord>{flow(10, 0, "a", "b")}, 2000);
    Millis add = -1, remove = -1;
    for (const auto& ev : result.events) {
        if (ev.kind == EventKind::EdgeAdd) add = ev.timestamp;
        if (ev.kind == EventKind::EdgeRemove) remove = ev.timestamp;
    }
    CHECK(remove - add == 2000);
}

TEST_CASE("self-loop records are skipped with a diagnostic") {
    const auto result = flow_adapter(std::vector<FlowRecord>{flow(0, 5, "a", "a"), flow(1, 5, "a", "b")}, 0);
    CHECK(result.skipped.size() == 1);
    CHECK(result.skipped[0].find("record 1") != std::string::npos);
    CHECK(result.events.size() == 6);
}

TEST_CASE("flow csv parsing keeps extra columns as attributes") {
    const auto records = parse_flow_csv("time_ms,duration_ms,source,destination,proto,bytes\n5,10,C1,C2,tcp,400\n");
    REQUIRE(records.size() == 1);
    CHECK(records[0].attributes.size() == 2);
    CHECK(records[0].attributes[0] == std::make_pair(std::string("proto"), std::string("tcp")));
    CHECK_THROWS_AS(parse_flow_csv("time_ms,duration_ms,source,destination\n5,-1,a,b\n"), ParseError);
    CHECK_THROWS_AS(parse_flow_csv("time_ms,source,destination\n5,a,b\n"), ParseError);
}

TEST_CASE("adapter output is self-consistent on random flows") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> host(0, 6);
    std::uniform_int_distribution<Millis> gap(0, 3000), dur(0, 9000);
    for (int round = 0; round < 200; ++round) {
        std::vector<FlowRecord> records;
        Millis t = 0;
        for (int i = 0; i < 60; ++i) {
            t += gap(rng);
            records.push_back(flow(t, dur(rng), "h" + std::to_string(host(rng)), "h" + std::to_string(host(rng))));
        }
        const Millis min_life = round % 2 ? 1500 : 0;
        const auto result = flow_adapter(records, min_life);

        // Lenient replay never warns; the graph ends empty.
        ApplyLog log;
        GraphState g = replay({}, result.events, ApplyMode::Strict, &log);
        CHECK(log.warnings.empty());
        CHECK(g.empty());

        // Per pair: alternating add/remove matching the interval union.
        std::map<std::pair<std::string, std::string>, std::vector<std::pair<Millis, Millis>>> got;
        for (const auto& ev : result.events) {
            if (ev.is_node_event()) continue;
            auto& list = got[testing::SetGraph::key(ev.a, ev.b)];
            if (ev.kind == EventKind::EdgeAdd) {
                CHECK((list.empty() || list.back().second >= 0));
                list.push_back({ev.timestamp, -1});
            } else {
                REQUIRE(!list.empty());
                CHECK(list.back().second == -1);
                list.back().second = ev.timestamp;
            }
        }
        CHECK(got == interval_union(records, min_life));

        for (std::size_t i = 1; i < result.events.size(); ++i) {
            CHECK(result.events[i - 1].timestamp <= result.events[i].timestamp);
            CHECK(result.events[i - 1].seq < result.events[i].seq);
        }
    }
}
