#include "graphstage/animation.hpp"
#include "graphstage/pipeline.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace graphstage;

namespace {

std::vector<std::size_t> order_of(const StageScript& s) {
    std::vector<std::size_t> out;
    for (const SubStage& sub : s.sub_stages) out.push_back(sub.body.index());
    return out;
}

GraphEvent ev(EventKind kind, Millis t, std::string a, std::string b = {}) {
    return b.empty() ? node_event(kind, t, std::move(a)) : edge_event(kind, t, std::move(a), std::move(b));
}

std::vector<GraphEvent> numbered(std::vector<GraphEvent> events) {
    for (std::size_t i = 0; i < events.size(); ++i) events[i].seq = i + 1;
    return events;
}

}  // namespace

TEST_CASE("easing curves") {
    for (Easing e : {Easing::SlowInSlowOut, Easing::Linear}) {
        CHECK(ease(e, 0.0) == 0.0);
        CHECK(ease(e, 1.0) == 1.0);
        CHECK(ease(e, 0.5) == doctest::Approx(0.5));
        double prev = 0.0;
        for (int i = 1; i <= 100; ++i) {
            const double v = ease(e, i / 100.0);
            CHECK(v >= prev);
            prev = v;
        }
    }
    CHECK(ease(Easing::SlowInSlowOut, 0.01) < 0.01);
    CHECK(ease(Easing::SlowInSlowOut, 0.99) > 0.99);
}

TEST_CASE("hand-traced time-based lag: event at 100 ms is depicted at 3050 ms") {
    PipelineOptions options;
    options.staging = StagingConfig::defaults(Strategy::TimeBased);
    const auto out = compose_all(numbered({ev(EventKind::NodeAdd, 100, "A")}), options);
    REQUIRE(out.size() == 1);
    REQUIRE(out[0].lag.size() == 1);
    CHECK(out[0].script.start_time == 2000);
    CHECK(out[0].lag[0].depiction_start == 3050);
    CHECK(out[0].lag[0].lag == 2950);
}

TEST_CASE("deletion lag points at the deletion sub-stage") {
    PipelineOptions options;
    options.staging = StagingConfig::defaults(Strategy::TimeBased);
    const auto out = compose_all(numbered({ev(EventKind::NodeAdd, 100, "A"), ev(EventKind::NodeRemove, 2500, "A")}), options);
    REQUIRE(out.size() == 2);
    CHECK(out[1].lag[0].depiction_start == 4000);
    CHECK(out[1].lag[0].role == EventRole::Deletion);
}

TEST_CASE("ephemeral and no-op events are excluded from lag") {
    PipelineOptions options;
    const auto out = compose_all(numbered({ev(EventKind::NodeAdd, 10, "A"), ev(EventKind::NodeRemove, 20, "A"),
                                           ev(EventKind::NodeRemove, 30, "ghost"), ev(EventKind::NodeAdd, 40, "B")}),
                                 options);
    REQUIRE(!out.empty());
    const auto& lag = out[0].lag;
    REQUIRE(lag.size() == 4);
    CHECK(lag[0].excluded);
    CHECK(lag[1].excluded);
    CHECK(lag[2].excluded);
    CHECK_FALSE(lag[3].excluded);
}

TEST_CASE("highlights, label persistence and fades") {
    PipelineOptions options;
    options.staging = StagingConfig::defaults(Strategy::TimeBased);
    GraphEvent labelled = ev(EventKind::NodeAdd, 0, "R");
    labelled.label = "router";
    const auto out = compose_all(numbered({labelled, ev(EventKind::EdgeAdd, 1, "R", "S"), ev(EventKind::NodeRemove, 2500, "R"),
                                           ev(EventKind::NodeAdd, 2600, "T")}),
                                 options);
    REQUIRE(out.size() == 2);
    const StageScript& s = out[1].script;
    const Entity r = Entity::node("R"), t = Entity::node("T"), rs = Entity::edge(EdgeKey::make("R", "S"));

    const FrameSnapshot flash = frame_at(s, 100);
    CHECK(flash.entities.at(r).highlight == Highlight::DeleteOrange);
    CHECK(flash.entities.at(r).opacity == 1.0);
    CHECK(flash.entities.at(rs).highlight == Highlight::DeleteOrange);
    CHECK(flash.entities.at(t).opacity == 0.0);

    const FrameSnapshot fading = frame_at(s, 400);
    CHECK(fading.entities.at(r).opacity < 1.0);
    CHECK(fading.label_opacity.at("R") > kDeletedLabelOpacity);

    const FrameSnapshot moving = frame_at(s, 700);
    CHECK(moving.entities.at(r).opacity == 0.0);
    CHECK(moving.label_opacity.at("R") == kDeletedLabelOpacity);

    const FrameSnapshot adding = frame_at(s, 1100);
    CHECK(adding.entities.at(t).highlight == Highlight::AddBlue);
    CHECK(adding.entities.at(t).highlight_strength == 1.0);
    CHECK(adding.entities.at(t).opacity > 0.0);
    CHECK(adding.entities.at(t).opacity < 1.0);

    const FrameSnapshot done = frame_at(s, 1600);
    CHECK(done.entities.at(t) == EntityVisual{1.0, Highlight::None, 0.0});
    CHECK(done.label_opacity.at("R") == 0.0);

    CHECK_THROWS_AS(frame_at(s, -1), std::out_of_range);
    CHECK_THROWS_AS(frame_at(s, 2001), std::out_of_range);

    const std::string svg = frame_to_svg(flash);
    CHECK(svg.find("#ff8c00") != std::string::npos);
    CHECK(frame_to_svg(adding).find("#1e90ff") != std::string::npos);
    CHECK(frame_to_json(done).find("\"T\"") != std::string::npos);
    CHECK(to_token(Highlight::DeleteOrange) == "delete-orange");
    CHECK(to_token(Highlight::AddBlue) == "add-blue");
}

TEST_CASE("random stages: endpoints match replay, order holds, lags are non-negative") {
    std::mt19937_64 rng(12);
    std::size_t checked = 0;
    for (int round = 0; round < 12; ++round) {
        const Strategy strategy = static_cast<Strategy>(round % 3);
        PipelineOptions options;
        options.staging = StagingConfig::defaults(strategy);
        const auto events = testing::random_stream(rng, 60, 8);
        StagePipeline pipeline(options);
        for (const auto& e : events) pipeline.feed(e);
        pipeline.close_input();
        GraphState graph;
        while (const auto t = pipeline.next_trigger()) {
            if (pipeline.drained()) break;
            const LayoutState before = pipeline.layout();
            const auto out = pipeline.poll(*t);
            REQUIRE(out.has_value());
            const StageScript& s = out->script;
            const auto first = frame_at(s, 0);
            CHECK(first.opaque_entities() == testing::entities_of(graph));
            for (const auto& [n, p] : before.positions) CHECK(first.positions.at(n) == p);
            apply_diff(graph, out->stage.diff);
            const auto last = frame_at(s, s.timing.total);
            CHECK(last.opaque_entities() == testing::entities_of(graph));
            for (const auto& [n, p] : pipeline.layout().positions) CHECK(last.positions.at(n) == p);

            const auto order = order_of(s);
            CHECK(std::is_sorted(order.begin(), order.end()));
            REQUIRE(!order.empty());
            CHECK(order.back() == 3);
            CHECK(s.sub_stages.front().begin == 0);
            CHECK(s.sub_stages.back().end == s.timing.total);
            for (std::size_t i = 1; i < s.sub_stages.size(); ++i)
                CHECK(s.sub_stages[i].begin == s.sub_stages[i - 1].end);
            for (const LagRecord& r : out->lag)
                if (!r.excluded) CHECK(r.lag >= 0);
            ++checked;
        }
    }
    CHECK(checked > 50);
}

TEST_CASE("lag summary uses nearest rank") {
    const LagSummary s = summarize_lags({10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 110, 120, 130, 140, 150, 160, 170, 180, 190, 200});
    CHECK(s.count == 20);
    CHECK(s.max == 200);
    CHECK(s.p95 == 190);
    CHECK(s.mean == doctest::Approx(105.0));
    CHECK(summarize_lags({}).count == 0);
    CHECK(summarize_lags({7}).p95 == 7);
}
