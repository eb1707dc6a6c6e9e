#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "geoforge/geometry.hpp"
#include "support.hpp"

using namespace geoforge;
using gftest::P;

namespace {

SceneGeometry geo(std::initializer_list<Coord> pts) { return SceneGeometry(std::vector<Coord>(pts)); }

}  // namespace

TEST_CASE("check_statement examples") {
    CHECK(check_statement(geo({{0, 0}, {2, 0}, {1, 1}}), st::eq_seg(P('A'), P('C'), P('B'), P('C'))).holds);
    CHECK(check_statement(geo({{0, 0}, {1, 0}, {2, 0}}), st::collinear(P('A'), P('B'), P('C'))).holds);
    CHECK(check_statement(geo({{0, 0}, {3, 0}, {0, 4}}), st::seg_len(P('B'), P('C'), Rational(5))).holds);

    auto bad = check_statement(geo({{0, 0}, {3, 0}, {0, 4}}), st::seg_len(P('B'), P('C'), Rational(6)));
    CHECK_FALSE(bad.holds);
    CHECK(bad.residual == doctest::Approx(1.0 / 6.0));

    auto square = geo({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    CHECK(check_statement(square, st::parallel(P('A'), P('B'), P('D'), P('C'))).holds);
    CHECK(check_statement(square, st::perpendicular(P('A'), P('B'), P('A'), P('D'))).holds);
    CHECK(check_statement(square, st::right_angle(P('B'), P('A'), P('D'))).holds);
    CHECK(check_statement(square, st::angle_val(P('B'), P('A'), P('C'), Rational(45))).holds);
    CHECK(check_statement(square, st::congruent(P('A'), P('B'), P('C'), P('C'), P('D'), P('A'))).holds);
    CHECK_FALSE(check_statement(square, st::parallel(P('A'), P('B'), P('A'), P('C'))).holds);
}

TEST_CASE("check_statement rejects unknown points") {
    CHECK_THROWS_AS(check_statement(geo({{0, 0}, {1, 0}}), st::collinear(P('A'), P('B'), P('C'))), UnknownPoint);
}

TEST_CASE("check_scene examples") {
    StatementSet iso;
    iso.insert(st::eq_seg(P('A'), P('B'), P('A'), P('C')));
    CHECK(check_scene(geo({{5, 8}, {2, 1}, {8, 1}}), iso).valid);

    auto coincident = check_scene(geo({{0, 0}, {4, 0}, {4, 0}, {2, 3}}), {});
    CHECK_FALSE(coincident.valid);
    CHECK_FALSE(coincident.degeneracies.empty());

    StatementSet par;
    par.insert(st::parallel(P('A'), P('B'), P('C'), P('D')));
    auto v = check_scene(geo({{0, 0}, {4, 0}, {0, 3}, {4, 4}}), par);
    CHECK_FALSE(v.valid);
    REQUIRE(v.failing.size() == 1);
    CHECK(v.failing[0] == canonicalize(st::parallel(P('A'), P('B'), P('C'), P('D'))));
}

TEST_CASE("numeric_answer examples") {
    auto right = geo({{0, 0}, {3, 0}, {0, 4}});
    auto hyp = numeric_answer(right, st::seg_len(P('B'), P('C'), Rational(1)));
    REQUIRE(hyp.exact);
    CHECK(*hyp.exact == Rational(5));

    double h = std::sqrt(3.0);
    auto equi = geo({{0, 0}, {2, 0}, {1, h}});
    auto ang = numeric_answer(equi, st::angle_val(P('A'), P('B'), P('C'), Rational(1)));
    REQUIRE(ang.exact);
    CHECK(*ang.exact == Rational(60));

    auto iso = geo({{0, 0}, {1, 0}, {0, 1}});
    auto root2 = numeric_answer(iso, st::seg_len(P('B'), P('C'), Rational(1)));
    CHECK_FALSE(root2.exact);
    CHECK(root2.approx == doctest::Approx(1.41421356).epsilon(1e-8));

    CHECK_THROWS_AS(numeric_answer(geo({{0, 0}, {0, 0}}), st::seg_len(P('A'), P('B'), Rational(1))),
                    DegenerateMeasurement);
}

TEST_CASE("snap_rational") {
    CHECK(snap_rational(2.5, 1e-9) == Rational(5, 2));
    CHECK(snap_rational(1.0 / 3.0, 1e-9) == Rational(1, 3));
    CHECK_FALSE(snap_rational(std::sqrt(2.0), 1e-9));
}

TEST_CASE("property: verdicts are invariant under similarity transforms") {
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 150; ++seed) {
        auto scene = gftest::random_scene(seed);
        Rng rng(mix_seed(seed, 77));
        double scale = rng.uniform(0.2, 5.0);
        double deg = rng.uniform(0.0, 360.0);
        Coord shift{rng.uniform(-20.0, 20.0), rng.uniform(-20.0, 20.0)};
        auto moved = gftest::transform(scene.geometry, scale, deg, shift);
        for (const auto& s : scene.initial) {
            REQUIRE(check_statement(scene.geometry, s).holds);
            if (s.predicate() == Predicate::SegmentLength) {
                // lengths scale linearly
                CHECK(measure(moved, s) == doctest::Approx(scale * s.value()->to_double()).epsilon(1e-9));
                continue;
            }
            CHECK(check_statement(moved, s).holds);
            if (s.predicate() == Predicate::AngleMeasure) {
                CHECK(measure(moved, s) == doctest::Approx(measure(scene.geometry, s)).epsilon(1e-9));
            }
            ++checked;
        }
    }
    CHECK(checked > 500);
}

TEST_CASE("property: residuals grow at most linearly under small perturbations") {
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 80; ++seed) {
        auto scene = gftest::random_scene(seed);
        Rng rng(mix_seed(seed, 5));
        for (const auto& s : scene.initial) {
            auto pts = s.points();
            PointId victim = pts[rng.index(pts.size())];
            Coord dir = rotate({1.0, 0.0}, rng.uniform(0.0, 360.0));
            auto perturbed = [&](double delta) {
                auto coords = scene.geometry.points();
                coords[victim.index()] = coords[victim.index()] + delta * dir;
                return check_statement(SceneGeometry(coords), s).residual;
            };
            double r1 = perturbed(1e-6);
            double r2 = perturbed(2e-6);
            CHECK(r1 <= 1e3 * 1e-6);
            CHECK(r2 <= 2.2 * r1 + 1e-11);
            ++checked;
        }
    }
    CHECK(checked > 200);
}

TEST_CASE("basic vector helpers") {
    CHECK(angle_deg({1, 0}, {0, 0}, {0, 1}) == doctest::Approx(90.0));
    CHECK(orientation({0, 0}, {1, 0}, {0, 1}) == 1);
    CHECK(orientation({0, 0}, {0, 1}, {1, 0}) == -1);
    CHECK(orientation({0, 0}, {1, 0}, {2, 0}) == 0);
    CHECK(strictly_between({1, 0}, {0, 0}, {2, 0}));
    CHECK_FALSE(strictly_between({3, 0}, {0, 0}, {2, 0}));
    CHECK(same_side({0, 1}, {5, 2}, {0, 0}, {1, 0}));
    CHECK(opposite_sides({0, 1}, {5, -2}, {0, 0}, {1, 0}));
    auto r = rotate({1, 0}, 90);
    CHECK(r.x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.y == doctest::Approx(1.0));
}
