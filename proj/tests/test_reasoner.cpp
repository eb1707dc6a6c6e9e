#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "geoforge/reasoner.hpp"
#include "support.hpp"

using namespace geoforge;
using gftest::P;

namespace {

std::size_t rule_of(const char* id) { return *rule_index(id); }

StatementSet set_of(std::initializer_list<Statement> items) {
    StatementSet s;
    for (const auto& x : items) s.insert(x);
    return s;
}

// Statements 0..2 initial; a diamond: 3 <- {0}, 4 <- {1}, 5 <- {3}, 5 <- {4, 2}.
ReasoningGraph diamond() {
    StatementSet s0 = set_of({st::seg_len(P('A'), P('B'), Rational(1)), st::seg_len(P('A'), P('C'), Rational(2)),
                              st::seg_len(P('A'), P('D'), Rational(3))});
    ReasoningGraph g(s0, ReasonMode::Multi);
    for (int k = 0; k < 3; ++k) g.add_statement(st::seg_len(P('B'), PointId(static_cast<std::uint16_t>(2 + k)), Rational(1 + k)));
    g.add_transition({{0}, rule_of("seg_value_substitution"), 3});
    g.add_transition({{1}, rule_of("seg_value_substitution"), 4});
    g.add_transition({{3}, rule_of("seg_value_substitution"), 5});
    g.add_transition({{2, 4}, rule_of("ratio_length"), 5});
    return g;
}

}  // namespace

TEST_CASE("isosceles legs give equal base angles") {
    auto scene = generate_base_scene("isosceles_triangle", 7);
    StatementSet s0 = set_of({st::eq_seg(P('A'), P('B'), P('A'), P('C'))});
    auto g = saturate(scene.geometry, s0);
    auto id = g.statements().index_of(st::eq_angle(P('A'), P('B'), P('C'), P('A'), P('C'), P('B')));
    REQUIRE(id);
    const auto& in = g.incoming(*id);
    REQUIRE(in.size() == 1);
    CHECK(rule_catalog()[g.transitions()[in[0]].rule].id == "isosceles_base_angles");
}

TEST_CASE("3-4-5 hypotenuse through the right angle") {
    SceneGeometry geo({{0, 3}, {0, 0}, {4, 0}});
    StatementSet s0 = set_of({st::angle_val(P('A'), P('B'), P('C'), Rational(90)),
                              st::seg_len(P('A'), P('B'), Rational(3)), st::seg_len(P('B'), P('C'), Rational(4))});
    auto g = saturate(geo, s0);
    auto id = g.statements().index_of(st::seg_len(P('A'), P('C'), Rational(5)));
    REQUIRE(id);
    CHECK(rule_catalog()[g.transitions()[g.incoming(*id)[0]].rule].id.starts_with("pythagoras"));
    CHECK_FALSE(g.truncated());
}

TEST_CASE("upstream dependencies") {
    auto g = diamond();
    CHECK(upstream_dependencies(g, 1) == std::vector<StatementId>{1});
    // chain 0 -> 3
    CHECK(upstream_dependencies(g, 3) == std::vector<StatementId>{0, 3});
    auto up = upstream_dependencies(g, 5);
    auto oracle = gftest::upstream_oracle(g, 5);
    CHECK(up == std::vector<StatementId>(oracle.begin(), oracle.end()));
    CHECK(up == std::vector<StatementId>{0, 1, 2, 3, 4, 5});
    CHECK_THROWS_AS(upstream_dependencies(g, 42), UnknownStatement);
    CHECK_THROWS_AS(g.incoming(42), UnknownStatement);
}

TEST_CASE("hand-built graphs reject malformed transitions") {
    auto g = diamond();
    // duplicate
    CHECK_FALSE(g.add_transition({{0}, rule_of("seg_value_substitution"), 3}));
    CHECK_FALSE(g.add_transition({{}, rule_of("seg_value_substitution"), 4}));
    CHECK_FALSE(g.add_transition({{5}, rule_of("seg_value_substitution"), 4}));
    CHECK_FALSE(g.add_transition({{0}, rule_of("seg_value_substitution"), 1}));
    CHECK_FALSE(g.add_transition({{3}, rule_of("seg_value_substitution"), 3}));
    CHECK_FALSE(g.add_transition({{0}, rule_catalog().size(), 4}));
    CHECK(g.transitions().size() == 4);

    StatementSet s0 = set_of({st::seg_len(P('A'), P('B'), Rational(1))});
    ReasoningGraph single(s0, ReasonMode::Single);
    single.add_statement(st::seg_len(P('A'), P('C'), Rational(1)));
    CHECK(single.add_transition({{0}, rule_of("seg_value_substitution"), 1}));
    CHECK_FALSE(single.add_transition({{0}, rule_of("ratio_length"), 1}));
}

TEST_CASE("graph JSON round trip") {
    auto g = diamond();
    auto j = g.to_json();
    auto back = ReasoningGraph::from_json(j);
    CHECK(back.to_json() == j);
    CHECK(back.size() == g.size());
    CHECK(back.transitions() == g.transitions());
    CHECK(j.at("mode") == "multi");
}

TEST_CASE("single projection keeps the first derivation") {
    auto g = diamond();
    auto s = g.single_projection();
    CHECK(s.mode() == ReasonMode::Single);
    REQUIRE(s.incoming(5).size() == 1);
    CHECK(s.transitions()[s.incoming(5)[0]].premises == std::vector<StatementId>{3});
}

TEST_CASE("budgets truncate and flag") {
    auto scene = gftest::random_scene(3, 4);
    Budget tiny{scene.initial.size() + 3, 20000, 50};
    auto g = saturate(scene.geometry, scene.initial, ReasonMode::Single, tiny);
    CHECK(g.truncated());
    CHECK(g.size() <= tiny.max_statements);

    auto one_round = saturate(scene.geometry, scene.initial, ReasonMode::Single, Budget{5000, 20000, 1});
    CHECK(one_round.rounds() <= 1);
}

TEST_CASE("property: closure invariants over random scenes") {
    std::size_t compared = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto scene = gftest::random_scene(seed, 3);
        auto single = saturate(scene.geometry, scene.initial, ReasonMode::Single);
        auto multi = saturate(scene.geometry, scene.initial, ReasonMode::Multi);
        CAPTURE(seed);

        // trust invariant
        for (const auto& s : single.statements()) CHECK(check_statement(scene.geometry, s).holds);

        // structural invariants
        std::set<Transition> multi_set(multi.transitions().begin(), multi.transitions().end());
        CHECK(multi_set.size() == multi.transitions().size());
        for (StatementId s = single.initial_count(); s < single.size(); ++s) CHECK(single.incoming(s).size() == 1);
        for (StatementId s = multi.initial_count(); s < multi.size(); ++s) CHECK(multi.incoming(s).size() >= 1);
        for (StatementId s = 0; s < multi.initial_count(); ++s) CHECK(multi.incoming(s).empty());
        for (const auto& t : multi.transitions()) {
            CHECK_FALSE(t.premises.empty());
            CHECK(std::is_sorted(t.premises.begin(), t.premises.end()));
            CHECK(t.premises.back() < t.conclusion);
        }

        if (single.truncated() || multi.truncated()) continue;
        ++compared;
        // same statements, single transitions are first derivations of the multi graph
        CHECK(single.statements().items() == multi.statements().items());
        for (const auto& t : single.transitions()) CHECK(multi_set.count(t) == 1);
        CHECK(multi.single_projection().transitions() == single.transitions());

        // fixpoint idempotence
        auto again = saturate(scene.geometry, single.statements());
        CHECK(again.size() == single.size());

        // upstream agrees with a recursive oracle
        for (StatementId s = 0; s < multi.size(); s += 7) {
            auto up = upstream_dependencies(multi, s);
            auto oracle = gftest::upstream_oracle(multi, s);
            CHECK(up == std::vector<StatementId>(oracle.begin(), oracle.end()));
        }
    }
    CHECK(compared >= 90);
}

TEST_CASE("saturation is deterministic") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto scene = gftest::random_scene(seed, 3);
        auto a = saturate(scene.geometry, scene.initial, ReasonMode::Multi).to_json().dump();
        auto b = saturate(scene.geometry, scene.initial, ReasonMode::Multi).to_json().dump();
        CHECK(a == b);
    }
}

TEST_CASE("an unsound premise set surfaces as a verifier contradiction") {
    // AB = AC claimed on a scalene triangle: the base-angle conclusion fails numerically
    SceneGeometry geo({{0, 0}, {7, 1}, {2, 5}});
    StatementSet s0 = set_of({st::eq_seg(P('A'), P('B'), P('A'), P('C'))});
    CHECK_THROWS_AS(saturate(geo, s0), VerifierContradiction);
}
