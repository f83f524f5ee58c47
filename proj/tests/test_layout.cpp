#include "graphstage/layout.hpp"
#include "graphstage/staging.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace graphstage;

namespace {

// Largest real root of x^3 + a x^2 + b x + c by Cardano / trigonometric form.
double largest_cubic_root(double a, double b, double c) {
    const double p = b - a * a / 3.0;
    const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    const double disc = q * q / 4.0 + p * p * p / 27.0;
    double t;
    if (disc > 0) {
        const double s = std::sqrt(disc);
        t = std::cbrt(-q / 2.0 + s) + std::cbrt(-q / 2.0 - s);
    } else {
        const double r = 2.0 * std::sqrt(-p / 3.0);
        const double phi = std::acos(std::clamp(3.0 * q / (p * r), -1.0, 1.0)) / 3.0;
        t = r * std::cos(phi);
    }
    return t - a / 3.0;
}

GraphState graph_of(std::initializer_list<std::pair<const char*, const char*>> edges) {
    GraphState g;
    for (const auto& [a, b] : edges) {
        g.add_node(a);
        g.add_node(b);
        g.add_edge(EdgeKey::make(a, b));
    }
    return g;
}

double distance(const LayoutState& s, const NodeId& a, const NodeId& b) {
    return (s.positions.at(a) - s.positions.at(b)).norm();
}

double max_energy(const LayoutState& s) {
    double m = 0.0;
    for (const auto& [_, e] : s.energy) m = std::max(m, e);
    return m;
}

GraphState random_graph(std::mt19937_64& rng, int nodes, double edge_p) {
    GraphState g;
    for (int i = 0; i < nodes; ++i) g.add_node("v" + std::to_string(i));
    std::bernoulli_distribution coin(edge_p);
    for (int i = 0; i < nodes; ++i)
        for (int j = i + 1; j < nodes; ++j)
            if (coin(rng)) g.add_edge(EdgeKey::make("v" + std::to_string(i), "v" + std::to_string(j)));
    return g;
}

LayoutState random_positions(std::mt19937_64& rng, const GraphState& g, double spread) {
    std::uniform_real_distribution<double> u(-spread, spread);
    LayoutState s;
    for (const auto& n : g.nodes()) s.positions[n] = {u(rng), u(rng)};
    return s;
}

}  // namespace

TEST_CASE("layout params validation") {
    LayoutParams p;
    CHECK_NOTHROW(p.validate());
    p.cooling_factor = 1.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = LayoutParams{};
    p.central_strength = -0.1;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = LayoutParams{};
    p.ideal_edge_length = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("connected pair settles at the closed-form equilibrium") {
    struct Case {
        double k, C, c;
    };
    for (const Case& cs : {Case{1.0, 1.0, 0.1}, Case{2.0, 1.0, 0.1}, Case{1.0, 0.5, 0.0}, Case{1.5, 2.0, 0.4}}) {
        LayoutParams p;
        p.ideal_edge_length = cs.k;
        p.repulsion_constant = cs.C;
        p.central_strength = cs.c;
        const double expected = cs.k * largest_cubic_root(cs.c / 2.0, -1.0, -cs.C);
        const GraphState g = graph_of({{"A", "B"}});
        LayoutState s;
        s.positions = {{"A", {0.0, 0.0}}, {"B", {cs.k, 0.0}}};
        for (int i = 0; i < 4000; ++i) layout_step(s, g, p, 10.0 * cs.k);
        CHECK(distance(s, "A", "B") == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("refine approaches the pair equilibrium monotonically") {
    LayoutParams p;
    const double expected = largest_cubic_root(p.central_strength / 2.0, -1.0, -p.repulsion_constant);
    const GraphState g = graph_of({{"A", "B"}});
    LayoutState s;
    s.positions = {{"A", {0.0, 0.0}}, {"B", {1.0, 0.0}}};
    p.max_refine_iters = 1;
    p.energy_threshold = 1e-14;
    double gap = std::abs(distance(s, "A", "B") - expected);
    CHECK(gap > 0.1);
    for (int i = 0; i < 60; ++i) {
        refine(s, g, p);
        const double next = std::abs(distance(s, "A", "B") - expected);
        CHECK(next <= gap);
        gap = next;
    }
    CHECK(gap < 1e-6);
}

TEST_CASE("refine leaves a settled layout untouched") {
    std::mt19937_64 rng(2);
    const GraphState g = random_graph(rng, 12, 0.3);
    LayoutState s = random_positions(rng, g, 3.0);
    LayoutParams p;
    p.energy_threshold = 1e12;
    const auto before = s.positions;
    const RefineResult r = refine(s, g, p);
    CHECK(r.converged);
    CHECK(r.accepted == 0);
    CHECK(s.positions == before);
}

TEST_CASE("refine never raises the maximum energy") {
    std::mt19937_64 rng(4);
    for (int round = 0; round < 40; ++round) {
        const GraphState g = random_graph(rng, 2 + static_cast<int>(rng() % 49), 0.1);
        LayoutState s = random_positions(rng, g, 4.0);
        LayoutParams p;
        update_energy(s, g, p);
        double prev = max_energy(s);
        const RefineResult r = refine(s, g, p);
        for (double e : r.max_energy) {
            CHECK(e <= prev);
            prev = e;
        }
        CHECK(s.all_finite());
    }
}

TEST_CASE("place_new rules") {
    LayoutParams p;
    SUBCASE("first node goes to the origin") {
        LayoutState s;
        GraphState g;
        g.add_node("A");
        place_new(s, {"A"}, g, p);
        CHECK(s.positions.at("A") == Vec2{0.0, 0.0});
    }
    SUBCASE("barycenter of placed neighbours plus jitter") {
        GraphState g = graph_of({{"L", "X"}, {"R", "X"}});
        LayoutState s;
        s.positions = {{"L", {0.0, 0.0}}, {"R", {2.0, 0.0}}};
        place_new(s, {"X"}, g, p);
        CHECK((s.positions.at("X") - Vec2{1.0, 0.0}).norm() == doctest::Approx(0.25 * p.ideal_edge_length));
    }
    SUBCASE("isolated nodes land on the ring") {
        GraphState g = graph_of({{"L", "R"}});
        g.add_node("Z");
        LayoutState s;
        s.positions = {{"L", {0.0, 0.0}}, {"R", {2.0, 0.0}}};
        place_new(s, {"Z"}, g, p);
        CHECK((s.positions.at("Z") - Vec2{1.0, 0.0}).norm() == doctest::Approx(2.0 * p.ideal_edge_length));
    }
    SUBCASE("chains of new nodes are all placed") {
        GraphState g = graph_of({{"A", "B"}, {"B", "C"}, {"C", "D"}});
        LayoutState s;
        s.positions = {{"A", {0.0, 0.0}}};
        place_new(s, {"B", "C", "D"}, g, p);
        CHECK(s.positions.size() == 4);
        CHECK(s.all_finite());
    }
    SUBCASE("same seed gives identical placement; another seed differs") {
        GraphState g = graph_of({{"A", "B"}});
        LayoutState s1, s2, s3;
        s1.positions = s2.positions = s3.positions = {{"A", {0.0, 0.0}}};
        s3.rng_seed = 7;
        place_new(s1, {"B"}, g, p);
        place_new(s2, {"B"}, g, p);
        place_new(s3, {"B"}, g, p);
        CHECK(s1.positions == s2.positions);
        CHECK(s1.positions != s3.positions);
    }
}

TEST_CASE("coincident nodes separate deterministically") {
    const GraphState g = graph_of({{"A", "B"}, {"B", "C"}});
    LayoutState s;
    s.positions = {{"A", {1.0, 1.0}}, {"B", {1.0, 1.0}}, {"C", {1.0, 1.0}}};
    LayoutParams p;
    LayoutState t = s;
    layout_pass(s, g, p);
    layout_pass(t, g, p);
    CHECK(s == t);
    CHECK(s.all_finite());
    CHECK(distance(s, "A", "B") > 1e-3);
    CHECK(distance(s, "A", "C") > 1e-3);
}

TEST_CASE("movements") {
    LayoutState before, after;
    before.positions = {{"A", {0, 0}}, {"B", {1, 1}}, {"C", {5, 5}}, {"D", {0, 0}}};
    CHECK(movements(before, before, {"A", "B", "C"}).empty());
    after.positions = {{"A", {3, 4}}, {"B", {1.0005, 1}}, {"C", {9, 9}}, {"E", {0, 0}}};
    const auto moves = movements(before, after, {"A", "B"});
    REQUIRE(moves.size() == 1);
    CHECK(moves[0].id == "A");
    CHECK(moves[0].displacement() == doctest::Approx(5.0));
}

TEST_CASE("two components stay confined over 10,000 steps") {
    // Two 10-node components: a ring and a star.
    GraphState full;
    auto link = [&](const std::string& a, const std::string& b) {
        full.add_node(a);
        full.add_node(b);
        full.add_edge(EdgeKey::make(a, b));
    };
    for (int i = 0; i < 10; ++i) link("r" + std::to_string(i), "r" + std::to_string((i + 1) % 10));
    for (int i = 1; i < 10; ++i) link("s0", "s" + std::to_string(i));
    std::mt19937_64 rng(11);
    LayoutState s = random_positions(rng, full, 3.0);
    const LayoutParams p;
    double worst = 0.0, midway = 0.0;
    for (int i = 0; i < 10000; ++i) {
        layout_step(s, full, p, p.max_displacement);
        worst = std::max(worst, bounding_radius(s));
        if (i == 4999) midway = bounding_radius(s);
        if (!s.all_finite()) break;
    }
    CHECK(s.all_finite());
    // Regression bound measured with the default parameters (plateau near 9.6).
    CHECK(worst < 10.0);
    CHECK(bounding_radius(s) - midway < 0.01);
}

TEST_CASE("two 3-cliques stay bounded after 1000 refine sweeps") {
    const GraphState g = graph_of({{"a", "b"}, {"b", "c"}, {"a", "c"}, {"x", "y"}, {"y", "z"}, {"x", "z"}});
    LayoutState s;
    s.positions = {{"a", {0, 0}}, {"b", {1, 0}}, {"c", {0, 1}}, {"x", {5, 5}}, {"y", {6, 5}}, {"z", {5, 6}}};
    LayoutParams p;
    p.max_refine_iters = 1000;
    p.energy_threshold = 0.0;
    p.cooling_factor = 0.999;
    refine(s, g, p);
    CHECK(s.all_finite());
    CHECK(bounding_radius(s) < 6.0);
}

TEST_CASE("stage layouts are bit-deterministic and finite") {
    std::mt19937_64 rng(31);
    for (int round = 0; round < 15; ++round) {
        const auto events = testing::random_stream(rng, 40 + rng() % 80, 15);
        const auto stages = testing::drain_offline(events, StagingConfig::defaults(Strategy::Hybrid));
        const LayoutParams p;
        auto run = [&] {
            std::vector<LayoutState> states;
            LayoutState layout;
            GraphState graph;
            for (const Stage& st : stages) {
                apply_diff(graph, st.diff);
                layout = prepare_stage_layout(layout, graph, st.diff.node_deletions, st.diff.node_additions, p);
                states.push_back(layout);
            }
            return states;
        };
        const auto first = run();
        const auto second = run();
        REQUIRE(first.size() == second.size());
        GraphState graph;
        for (std::size_t i = 0; i < first.size(); ++i) {
            CHECK(first[i] == second[i]);
            CHECK(first[i].all_finite());
            apply_diff(graph, stages[i].diff);
            CHECK(first[i].positions.size() == graph.node_count());
        }
    }
}
