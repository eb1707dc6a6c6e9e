#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <regex>

#include "geoforge/renderer.hpp"
#include "support.hpp"

using namespace geoforge;

namespace {

struct Parsed {
    std::vector<std::array<double, 4>> lines;
    std::vector<std::array<double, 3>> circles;  // class="circle"
    std::vector<Coord> dots;
    std::vector<std::pair<std::string, Coord>> labels;
    std::size_t right_angles = 0;
    std::size_t ticks = 0;
    double width = 0, height = 0;
};

std::size_t count(const std::string& s, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
    return n;
}

Parsed parse(const std::string& svg) {
    Parsed p;
    static const std::regex line(R"re(<line x1="([-\d.]+)" y1="([-\d.]+)" x2="([-\d.]+)" y2="([-\d.]+)"/>)re");
    static const std::regex circle(R"re(<circle class="circle" cx="([-\d.]+)" cy="([-\d.]+)" r="([-\d.]+)"/>)re");
    static const std::regex dot(R"re(<circle class="point" cx="([-\d.]+)" cy="([-\d.]+)")re");
    static const std::regex text(R"re(<text x="([-\d.]+)" y="([-\d.]+)">([A-Z][0-9]?)</text>)re");
    static const std::regex view(R"re(viewBox="0 0 ([-\d.]+) ([-\d.]+)")re");
    auto all = [&](const std::regex& re, auto fn) {
        for (std::sregex_iterator it(svg.begin(), svg.end(), re), end; it != end; ++it) fn(*it);
    };
    all(line, [&](const std::smatch& m) {
        p.lines.push_back({std::stod(m[1]), std::stod(m[2]), std::stod(m[3]), std::stod(m[4])});
    });
    all(circle, [&](const std::smatch& m) { p.circles.push_back({std::stod(m[1]), std::stod(m[2]), std::stod(m[3])}); });
    all(dot, [&](const std::smatch& m) { p.dots.push_back({std::stod(m[1]), std::stod(m[2])}); });
    all(text, [&](const std::smatch& m) { p.labels.push_back({m[3], {std::stod(m[1]), std::stod(m[2])}}); });
    std::smatch m;
    if (std::regex_search(svg, m, view)) {
        p.width = std::stod(m[1]);
        p.height = std::stod(m[2]);
    }
    p.right_angles = count(svg, "class=\"right-angle\"");
    p.ticks = count(svg, "class=\"tick\"");
    return p;
}

// Fits x' = k x + tx, y' = -k y + ty from the farthest pair of points.
struct Affine {
    double k, tx, ty;
    Coord map(Coord c) const { return {k * c.x + tx, -k * c.y + ty}; }
};

Affine fit(const SceneGeometry& g, const std::vector<Coord>& img) {
    std::size_t a = 0, b = 1;
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (std::size_t j = i + 1; j < g.size(); ++j) {
            if (distance(g.points()[i], g.points()[j]) > distance(g.points()[a], g.points()[b])) {
                a = i;
                b = j;
            }
        }
    }
    double k = distance(img[a], img[b]) / distance(g.points()[a], g.points()[b]);
    return {k, img[a].x - k * g.points()[a].x, img[a].y + k * g.points()[a].y};
}

}  // namespace

TEST_CASE("3-4-5 right triangle") {
    auto scene = generate_base_scene("right_triangle", 0);
    REQUIRE(scene.geometry.size() == 3);
    auto p = parse(render_svg(scene));
    CHECK(p.lines.size() == 3);
    CHECK(p.labels.size() == 3);
    CHECK(p.right_angles == 1);
    CHECK(p.circles.empty());
}

TEST_CASE("circle scenes draw their circle") {
    auto scene = generate_base_scene("circle_inscribed_triangle", 4);
    auto p = parse(render_svg(scene));
    REQUIRE(p.circles.size() == 1);
    REQUIRE(p.dots.size() == scene.geometry.size());
    auto map = fit(scene.geometry, p.dots);
    auto c = scene.drawn_circles().at(0);
    Coord o = map.map(scene.geometry.at(c.center));
    CHECK(p.circles[0][0] == doctest::Approx(o.x).epsilon(1e-3));
    CHECK(p.circles[0][1] == doctest::Approx(o.y).epsilon(1e-3));
    double r = map.k * distance(scene.geometry.at(c.center), scene.geometry.at(c.through));
    CHECK(p.circles[0][2] == doctest::Approx(r).epsilon(1e-3));
}

TEST_CASE("equal segments get tick marks, flags switch decorations off") {
    auto scene = generate_base_scene("isosceles_triangle", 7);
    auto p = parse(render_svg(scene));
    CHECK(p.ticks >= 2);

    DiagramStyle plain;
    plain.show_equal_tick_marks = false;
    plain.show_right_angle_marks = false;
    plain.show_point_dots = false;
    auto q = parse(render_svg(scene, plain));
    CHECK(q.ticks == 0);
    CHECK(q.right_angles == 0);
    CHECK(q.dots.empty());
    CHECK(q.labels.size() == scene.geometry.size());
}

TEST_CASE("style validation") {
    DiagramStyle bad;
    bad.font_size = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK_THROWS_AS(render_svg(generate_base_scene("square", 1), bad), std::invalid_argument);
}

TEST_CASE("property: rendering is deterministic, faithful and fully labeled") {
    for (std::uint64_t seed = 0; seed < 150; ++seed) {
        auto scene = gftest::random_scene(seed, 4);
        auto svg = render_svg(scene);
        CAPTURE(seed);
        CHECK(svg == render_svg(scene));
        auto p = parse(svg);
        REQUIRE(p.dots.size() == scene.geometry.size());

        auto map = fit(scene.geometry, p.dots);
        // rounding to 0.01 px bounds the fit error
        const double tol = 0.02;
        for (std::size_t i = 0; i < scene.geometry.size(); ++i) {
            Coord m = map.map(scene.geometry.points()[i]);
            CHECK(std::abs(m.x - p.dots[i].x) < tol);
            CHECK(std::abs(m.y - p.dots[i].y) < tol);
        }
        auto is_point_image = [&](double x, double y) {
            for (const auto& c : scene.geometry.points()) {
                Coord m = map.map(c);
                if (std::abs(m.x - x) < tol && std::abs(m.y - y) < tol) return true;
            }
            return false;
        };
        for (const auto& l : p.lines) {
            CHECK(is_point_image(l[0], l[1]));
            CHECK(is_point_image(l[2], l[3]));
        }

        // every point labeled once, anchors distinct and inside the canvas
        REQUIRE(p.labels.size() == scene.geometry.size());
        std::set<std::pair<double, double>> anchors;
        for (std::size_t i = 0; i < p.labels.size(); ++i) {
            CHECK(p.labels[i].first == PointId(static_cast<std::uint16_t>(i)).label());
            anchors.insert({p.labels[i].second.x, p.labels[i].second.y});
            CHECK(p.labels[i].second.x >= 0);
            CHECK(p.labels[i].second.x <= p.width);
            CHECK(p.labels[i].second.y >= 0);
            CHECK(p.labels[i].second.y <= p.height);
        }
        CHECK(anchors.size() == p.labels.size());

        // 5% margin: no point closer to the border than 4.5% of the longer side
        double side = std::max(p.width, p.height);
        for (const auto& d : p.dots) {
            CHECK(d.x >= 0.045 * side - tol);
            CHECK(d.y >= 0.045 * side - tol);
            CHECK(p.width - d.x >= 0.045 * side - tol);
            CHECK(p.height - d.y >= 0.045 * side - tol);
        }

        std::size_t right = 0;
        for (const auto& s : scene.initial) right += s.predicate() == Predicate::RightAngle ? 1 : 0;
        CHECK(p.right_angles == right);

        // every segment named by a relational S0 statement is drawn, possibly as part of a longer line
        for (const auto& s : scene.initial) {
            if (s.predicate() != Predicate::EqualSegments && s.predicate() != Predicate::Parallel) continue;
            for (std::size_t k = 0; k < 4; k += 2) {
                Coord a = map.map(scene.geometry.at(s.point(k)));
                Coord b = map.map(scene.geometry.at(s.point(k + 1)));
                bool drawn = false;
                for (const auto& l : p.lines) {
                    Coord c{l[0], l[1]}, d{l[2], l[3]};
                    auto on = [&](Coord x) {
                        double len = distance(c, d);
                        return std::abs(cross(d - c, x - c)) / len < 0.05 && dot(x - c, x - d) <= 0.05 * len;
                    };
                    if (on(a) && on(b)) drawn = true;
                }
                CHECK(drawn);
            }
        }
    }
}
