#include "geoforge/constructor.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

namespace geoforge {

namespace {

PointId P(std::size_t i) { return PointId(static_cast<std::uint16_t>(i)); }

Segment seg(PointId a, PointId b) { return a < b ? Segment{a, b} : Segment{b, a}; }

Coord polar(double r, double deg) {
    double t = deg * std::numbers::pi / 180.0;
    return {r * std::cos(t), r * std::sin(t)};
}

// Random rotation, then a random translation that keeps the figure inside
// [margin, extent - margin]^2. Lengths and angles are preserved.
std::optional<std::vector<Coord>> fit_to_box(std::vector<Coord> pts, Rng& rng) {
    constexpr double kMargin = 0.5;
    double theta = rng.uniform(0.0, 360.0);
    for (auto& p : pts) p = rotate(p, theta);
    SceneGeometry tmp(pts);
    auto box = tmp.bounding_box();
    double w = box.max.x - box.min.x;
    double h = box.max.y - box.min.y;
    double room = kSceneExtent - 2 * kMargin;
    if (w > room || h > room) return std::nullopt;
    double ox = kMargin + rng.uniform(0.0, room - w) - box.min.x;
    double oy = kMargin + rng.uniform(0.0, room - h) - box.min.y;
    for (auto& p : pts) p = p + Coord{ox, oy};
    return pts;
}

bool inside_box(Coord c) { return c.x >= 0.0 && c.x <= kSceneExtent && c.y >= 0.0 && c.y <= kSceneExtent; }

struct Draft {
    std::vector<Coord> points;
    std::vector<Statement> effects;
    std::vector<Segment> segments;
    std::vector<CircleMark> circles;
};

std::vector<Segment> triangle_sides(PointId a, PointId b, PointId c) { return {seg(a, b), seg(b, c), seg(a, c)}; }

// ---------------------------------------------------------------------------
// Base generators. Each returns local coordinates and effects over P(0..n-1);
// the caller rotates/translates the figure and validates it.
// ---------------------------------------------------------------------------

Coord triangle_apex(double c, double alpha, double beta) {
    double gamma = 180.0 - alpha - beta;
    double b = c * std::sin(beta * std::numbers::pi / 180.0) / std::sin(gamma * std::numbers::pi / 180.0);
    return polar(b, alpha);
}

std::optional<Draft> gen_scalene(Rng& rng) {
    auto alpha = rng.uniform_int(30, 100);
    auto beta = rng.uniform_int(30, 100);
    auto gamma = 180 - alpha - beta;
    if (gamma < 30 || alpha == beta || beta == gamma || alpha == gamma) return std::nullopt;
    double c = rng.uniform(4.0, 7.0);
    Draft d;
    d.points = {{0, 0}, {c, 0}, triangle_apex(c, double(alpha), double(beta))};
    d.effects = {st::angle_val(P(1), P(0), P(2), alpha), st::angle_val(P(0), P(1), P(2), beta)};
    d.segments = triangle_sides(P(0), P(1), P(2));
    return d;
}

std::optional<Draft> gen_isosceles(Rng& rng) {
    auto apex = rng.uniform_int(30, 120);
    double leg = rng.uniform(4.0, 6.5);
    Draft d;
    d.points = {{0, 0}, polar(leg, -double(apex) / 2), polar(leg, double(apex) / 2)};
    d.effects = {st::eq_seg(P(0), P(1), P(0), P(2)), st::eq_angle(P(0), P(1), P(2), P(0), P(2), P(1)),
                 st::angle_val(P(1), P(0), P(2), apex)};
    d.segments = triangle_sides(P(0), P(1), P(2));
    return d;
}

std::optional<Draft> gen_equilateral(Rng& rng) {
    auto side = rng.uniform_int(4, 8);
    double s = double(side);
    Draft d;
    d.points = {{0, 0}, {s, 0}, polar(s, 60.0)};
    d.effects = {st::eq_seg(P(0), P(1), P(1), P(2)), st::eq_seg(P(0), P(1), P(0), P(2)),
                 st::seg_len(P(0), P(1), side)};
    d.segments = triangle_sides(P(0), P(1), P(2));
    return d;
}

std::optional<Draft> gen_right_triangle(Rng& rng) {
    static const std::array<std::pair<Rational, Rational>, 4> kLegs = {{
        {Rational(3), Rational(4)}, {Rational(9, 2), Rational(6)}, {Rational(6), Rational(8)}, {Rational(5, 2), Rational(6)},
    }};
    auto [a, b] = kLegs[rng.index(kLegs.size())];
    if (rng.uniform() < 0.5) std::swap(a, b);
    // Right angle at C = P(2).
    Draft d;
    d.points = {{a.to_double(), 0}, {0, b.to_double()}, {0, 0}};
    d.effects = {st::right_angle(P(0), P(2), P(1)), st::seg_len(P(0), P(2), a), st::seg_len(P(1), P(2), b)};
    d.segments = triangle_sides(P(0), P(1), P(2));
    return d;
}

std::optional<Draft> gen_rectangle(Rng& rng) {
    auto w = rng.uniform_int(3, 7);
    auto h = rng.uniform_int(3, 7);
    if (w == h) return std::nullopt;
    Draft d;
    d.points = {{0, 0}, {double(w), 0}, {double(w), double(h)}, {0, double(h)}};
    d.effects = {st::right_angle(P(3), P(0), P(1)), st::parallel(P(0), P(1), P(2), P(3)),
                 st::parallel(P(0), P(3), P(1), P(2)), st::seg_len(P(0), P(1), w), st::seg_len(P(0), P(3), h)};
    d.segments = {seg(P(0), P(1)), seg(P(1), P(2)), seg(P(2), P(3)), seg(P(0), P(3))};
    return d;
}

std::optional<Draft> gen_square(Rng& rng) {
    auto s = rng.uniform_int(3, 7);
    double x = double(s);
    Draft d;
    d.points = {{0, 0}, {x, 0}, {x, x}, {0, x}};
    d.effects = {st::right_angle(P(3), P(0), P(1)), st::parallel(P(0), P(1), P(2), P(3)),
                 st::parallel(P(0), P(3), P(1), P(2)), st::eq_seg(P(0), P(1), P(0), P(3)),
                 st::seg_len(P(0), P(1), s)};
    d.segments = {seg(P(0), P(1)), seg(P(1), P(2)), seg(P(2), P(3)), seg(P(0), P(3))};
    return d;
}

std::optional<Draft> gen_parallelogram(Rng& rng) {
    auto alpha = rng.uniform_int(40, 140);
    if (alpha == 90) return std::nullopt;
    double w = rng.uniform(4.0, 7.0);
    double l = rng.uniform(2.5, 5.0);
    Coord dpt = polar(l, double(alpha));
    Draft d;
    d.points = {{0, 0}, {w, 0}, Coord{w, 0} + dpt, dpt};
    d.effects = {st::parallel(P(0), P(1), P(2), P(3)), st::parallel(P(0), P(3), P(1), P(2)),
                 st::angle_val(P(3), P(0), P(1), alpha)};
    d.segments = {seg(P(0), P(1)), seg(P(1), P(2)), seg(P(2), P(3)), seg(P(0), P(3))};
    return d;
}

std::optional<Draft> gen_trapezoid(Rng& rng) {
    auto alpha = rng.uniform_int(45, 115);
    auto beta = rng.uniform_int(45, 115);
    if (alpha == beta) return std::nullopt;
    double w = rng.uniform(6.0, 8.5);
    double h = rng.uniform(2.0, 4.5);
    double cot_a = 1.0 / std::tan(double(alpha) * std::numbers::pi / 180.0);
    double cot_b = 1.0 / std::tan(double(beta) * std::numbers::pi / 180.0);
    Coord dpt{h * cot_a, h};
    Coord cpt{w - h * cot_b, h};
    if (cpt.x - dpt.x < 1.5) return std::nullopt;
    Draft d;
    d.points = {{0, 0}, {w, 0}, cpt, dpt};
    d.effects = {st::parallel(P(0), P(1), P(2), P(3)), st::angle_val(P(3), P(0), P(1), alpha),
                 st::angle_val(P(0), P(1), P(2), beta)};
    d.segments = {seg(P(0), P(1)), seg(P(1), P(2)), seg(P(2), P(3)), seg(P(0), P(3))};
    return d;
}

std::optional<Draft> gen_circle_triangle(Rng& rng) {
    double r = rng.uniform(3.0, 4.3);
    std::array<std::int64_t, 3> phi = {rng.uniform_int(0, 359), rng.uniform_int(0, 359), rng.uniform_int(0, 359)};
    auto gap = [](std::int64_t a, std::int64_t b) {
        auto d = std::abs(a - b) % 360;
        return std::min<std::int64_t>(d, 360 - d);
    };
    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            if (gap(phi[i], phi[j]) < 25) return std::nullopt;
        }
    }
    auto central = gap(phi[0], phi[1]);
    if (central >= 175) return std::nullopt;
    // Centre A, circle points B, C, D.
    Draft d;
    d.points = {{0, 0}, polar(r, double(phi[0])), polar(r, double(phi[1])), polar(r, double(phi[2]))};
    d.effects = {st::on_circle(P(2), P(0), P(0), P(1)), st::on_circle(P(3), P(0), P(0), P(1)),
                 st::angle_val(P(1), P(0), P(2), central)};
    d.segments = {seg(P(1), P(2)), seg(P(2), P(3)), seg(P(1), P(3)), seg(P(0), P(1)), seg(P(0), P(2))};
    d.circles = {{P(0), P(1)}};
    return d;
}

std::optional<Draft> gen_circle_diameter(Rng& rng) {
    auto diameter = rng.uniform_int(6, 8);
    auto phi = rng.uniform_int(20, 160);
    double r = double(diameter) / 2.0;
    // Diameter AB, centre C, circle point D.
    Draft d;
    d.points = {{-r, 0}, {r, 0}, {0, 0}, polar(r, double(phi))};
    d.effects = {st::midpoint(P(2), P(0), P(1)), st::on_circle(P(3), P(2), P(0), P(2)),
                 st::angle_val(P(3), P(0), P(1), Rational(phi, 2)), st::seg_len(P(0), P(1), diameter)};
    d.segments = {seg(P(0), P(1)), seg(P(0), P(3)), seg(P(1), P(3)), seg(P(2), P(3))};
    d.circles = {{P(2), P(0)}};
    return d;
}

std::optional<Draft> gen_parallel_transversal(Rng& rng) {
    auto x = rng.uniform_int(35, 145);
    if (x == 90) return std::nullopt;
    double phi = 180.0 - double(x);
    double h = rng.uniform(3.0, 5.0);
    Coord dir = polar(1.0, phi);
    double t = h / dir.y;
    Coord b{0, 0};
    Coord c = t * dir;
    double a_len = rng.uniform(2.0, 3.5);
    double d_len = rng.uniform(2.0, 3.5);
    double e_len = rng.uniform(1.0, 2.0);
    double f_len = rng.uniform(1.0, 2.0);
    // A, B on the lower line; C, D on the upper; E and F extend the transversal BC.
    Draft d;
    d.points = {{-a_len, 0}, b, c, c + Coord{d_len, 0}, b - e_len * dir, c + f_len * dir};
    d.effects = {st::parallel(P(0), P(1), P(2), P(3)), st::collinear(P(4), P(1), P(2)),
                 st::collinear(P(1), P(2), P(5)), st::angle_val(P(0), P(1), P(2), x)};
    d.segments = {seg(P(0), P(1)), seg(P(2), P(3)), seg(P(4), P(1)), seg(P(1), P(2)), seg(P(2), P(5))};
    return d;
}

std::optional<Draft> gen_triangle_cevian(Rng& rng) {
    auto x = rng.uniform_int(15, 70);
    auto y = rng.uniform_int(15, 70);
    auto alpha = x + y;
    auto beta = rng.uniform_int(30, 100);
    if (alpha < 40 || alpha > 120 || 180 - alpha - beta < 25) return std::nullopt;
    double c = rng.uniform(4.5, 7.0);
    Coord a{0, 0}, b{c, 0};
    Coord cc = triangle_apex(c, double(alpha), double(beta));
    Coord dir = polar(1.0, double(x));
    // Intersect ray A + s*dir with segment B + u*(C - B).
    Coord bc = cc - b;
    double den = cross(dir, bc);
    double s = cross(b - a, bc) / den;
    Coord dpt = s * dir;
    Draft d;
    d.points = {a, b, cc, dpt};
    d.effects = {st::collinear(P(1), P(3), P(2)), st::angle_val(P(1), P(0), P(3), x),
                 st::angle_val(P(3), P(0), P(2), y), st::angle_val(P(0), P(1), P(2), beta)};
    d.segments = {seg(P(0), P(1)), seg(P(0), P(2)), seg(P(1), P(3)), seg(P(3), P(2)), seg(P(0), P(3))};
    return d;
}

using GeneratorFn = std::optional<Draft> (*)(Rng&);

const std::vector<std::pair<std::string, GeneratorFn>>& generators() {
    static const std::vector<std::pair<std::string, GeneratorFn>> kGenerators = {
        {"scalene_triangle", gen_scalene},
        {"isosceles_triangle", gen_isosceles},
        {"equilateral_triangle", gen_equilateral},
        {"right_triangle", gen_right_triangle},
        {"rectangle", gen_rectangle},
        {"square", gen_square},
        {"parallelogram", gen_parallelogram},
        {"trapezoid", gen_trapezoid},
        {"circle_inscribed_triangle", gen_circle_triangle},
        {"circle_diameter_point", gen_circle_diameter},
        {"parallel_lines_transversal", gen_parallel_transversal},
        {"triangle_cevian", gen_triangle_cevian},
    };
    return kGenerators;
}

// ---------------------------------------------------------------------------
// Constructions
// ---------------------------------------------------------------------------

bool noncollinear(const Scene& s, PointId a, PointId b, PointId c) {
    const auto& g = s.geometry;
    if (orientation(g.at(a), g.at(b), g.at(c), 0.05) == 0) return false;
    for (int k = 0; k < 3; ++k) {
        PointId v = k == 0 ? a : k == 1 ? b : c;
        PointId p = k == 0 ? b : k == 1 ? c : a;
        PointId q = k == 0 ? c : k == 1 ? a : b;
        if (angle_deg(g.at(p), g.at(v), g.at(q)) < 15.0) return false;
    }
    return true;
}

bool triangle_drawn(const Scene& s, PointId a, PointId b, PointId c) {
    return s.has_segment(a, b) && s.has_segment(b, c) && s.has_segment(a, c);
}

ConstructionStep make_step(std::string id, std::span<const PointId> binding, std::span<const PointId> fresh,
                           std::vector<Statement> effects, std::vector<Segment> segments,
                           std::vector<CircleMark> circles = {}) {
    ConstructionStep step;
    step.id = std::move(id);
    step.binding.assign(binding.begin(), binding.end());
    step.new_points.assign(fresh.begin(), fresh.end());
    for (auto& e : effects) step.effects.push_back(canonicalize(e));
    step.segments = std::move(segments);
    step.circles = std::move(circles);
    return step;
}

Coord foot_of(Coord p, Coord a, Coord b) {
    Coord ab = b - a;
    double t = dot(p - a, ab) / dot(ab, ab);
    return a + t * ab;
}

std::vector<Construction> build_catalog() {
    std::vector<Construction> cat;

    cat.push_back(Construction{
        "midpoint", 2, 1, {"segment(a,b)"},
        [](const Scene& s, std::span<const PointId> b) { return b[0] < b[1] && s.has_segment(b[0], b[1]); },
        [](const Scene& s, std::span<const PointId> b, Rng&) -> std::optional<Placement> {
            Coord m = 0.5 * (s.geometry.at(b[0]) + s.geometry.at(b[1]));
            return Placement{{m}, [](std::span<const PointId> bd, std::span<const PointId> f) {
                                 return make_step("midpoint", bd, f, {st::midpoint(f[0], bd[0], bd[1])}, {});
                             }};
        }});

    cat.push_back(Construction{
        "perpendicular_foot", 3, 1, {"segment(b,c)", "!collinear(a,b,c)"},
        [](const Scene& s, std::span<const PointId> b) {
            if (!(b[1] < b[2]) || !s.has_segment(b[1], b[2]) || !noncollinear(s, b[0], b[1], b[2])) return false;
            Coord f = foot_of(s.geometry.at(b[0]), s.geometry.at(b[1]), s.geometry.at(b[2]));
            return strictly_between(f, s.geometry.at(b[1]), s.geometry.at(b[2]));
        },
        [](const Scene& s, std::span<const PointId> b, Rng&) -> std::optional<Placement> {
            Coord f = foot_of(s.geometry.at(b[0]), s.geometry.at(b[1]), s.geometry.at(b[2]));
            return Placement{{f}, [](std::span<const PointId> bd, std::span<const PointId> n) {
                                 return make_step("perpendicular_foot", bd, n,
                                                  {st::perpendicular(bd[0], n[0], bd[1], bd[2]),
                                                   st::collinear(bd[1], n[0], bd[2])},
                                                  {seg(bd[0], n[0])});
                             }};
        }});

    cat.push_back(Construction{
        "angle_bisector_point", 3, 1, {"segment(a,b)", "segment(a,c)", "!collinear(a,b,c)"},
        [](const Scene& s, std::span<const PointId> b) {
            return b[1] < b[2] && s.has_segment(b[0], b[1]) && s.has_segment(b[0], b[2]) &&
                   noncollinear(s, b[0], b[1], b[2]);
        },
        [](const Scene& s, std::span<const PointId> b, Rng&) -> std::optional<Placement> {
            const auto& g = s.geometry;
            double ab = distance(g.at(b[0]), g.at(b[1]));
            double ac = distance(g.at(b[0]), g.at(b[2]));
            Coord d = (1.0 / (ab + ac)) * (ac * g.at(b[1]) + ab * g.at(b[2]));
            return Placement{{d}, [](std::span<const PointId> bd, std::span<const PointId> n) {
                                 return make_step("angle_bisector_point", bd, n,
                                                  {st::eq_angle(bd[1], bd[0], n[0], n[0], bd[0], bd[2]),
                                                   st::collinear(bd[1], n[0], bd[2])},
                                                  {seg(bd[0], n[0]), seg(bd[1], bd[2])});
                             }};
        }});

    cat.push_back(Construction{
        "parallel_through_point", 3, 1, {"segment(b,c)", "!collinear(a,b,c)"},
        [](const Scene& s, std::span<const PointId> b) {
            return b[1] < b[2] && s.has_segment(b[1], b[2]) && noncollinear(s, b[0], b[1], b[2]);
        },
        [](const Scene& s, std::span<const PointId> b, Rng& rng) -> std::optional<Placement> {
            const auto& g = s.geometry;
            double t = rng.uniform(0.4, 1.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
            Coord e = g.at(b[0]) + t * (g.at(b[2]) - g.at(b[1]));
            if (!inside_box(e)) return std::nullopt;
            return Placement{{e}, [](std::span<const PointId> bd, std::span<const PointId> n) {
                                 return make_step("parallel_through_point", bd, n,
                                                  {st::parallel(bd[0], n[0], bd[1], bd[2])}, {seg(bd[0], n[0])});
                             }};
        }});

    cat.push_back(Construction{
        "segment_extension", 2, 1, {"segment(a,b)"},
        [](const Scene& s, std::span<const PointId> b) { return s.has_segment(b[0], b[1]); },
        [](const Scene& s, std::span<const PointId> b, Rng& rng) -> std::optional<Placement> {
            const auto& g = s.geometry;
            double t = rng.uniform(0.3, 0.8);
            Coord e = g.at(b[1]) + t * (g.at(b[1]) - g.at(b[0]));
            if (!inside_box(e)) return std::nullopt;
            return Placement{{e}, [](std::span<const PointId> bd, std::span<const PointId> n) {
                                 return make_step("segment_extension", bd, n, {st::collinear(bd[0], bd[1], n[0])},
                                                  {seg(bd[1], n[0])});
                             }};
        }});

    // Diagonals of a drawn quadrilateral a-b-c-d meet at a new point.
    cat.push_back(Construction{
        "connect_points", 4, 1, {"segment(a,b)", "segment(b,c)", "segment(c,d)", "segment(a,d)", "convex(a,b,c,d)"},
        [](const Scene& s, std::span<const PointId> b) {
            if (!(b[0] < b[1] && b[0] < b[2] && b[0] < b[3] && b[1] < b[3])) return false;
            if (!s.has_segment(b[0], b[1]) || !s.has_segment(b[1], b[2]) || !s.has_segment(b[2], b[3]) ||
                !s.has_segment(b[0], b[3])) {
                return false;
            }
            const auto& g = s.geometry;
            return opposite_sides(g.at(b[1]), g.at(b[3]), g.at(b[0]), g.at(b[2])) &&
                   opposite_sides(g.at(b[0]), g.at(b[2]), g.at(b[1]), g.at(b[3]));
        },
        [](const Scene& s, std::span<const PointId> b, Rng&) -> std::optional<Placement> {
            const auto& g = s.geometry;
            Coord a = g.at(b[0]), c = g.at(b[2]), bb = g.at(b[1]), d = g.at(b[3]);
            Coord r = c - a;
            Coord q = d - bb;
            double t = cross(bb - a, q) / cross(r, q);
            Coord e = a + t * r;
            return Placement{{e}, [](std::span<const PointId> bd, std::span<const PointId> n) {
                                 return make_step("connect_points", bd, n,
                                                  {st::collinear(bd[0], n[0], bd[2]), st::collinear(bd[1], n[0], bd[3])},
                                                  {seg(bd[0], bd[2]), seg(bd[1], bd[3])});
                             }};
        }});

    cat.push_back(Construction{
        "circumcenter", 3, 1, {"triangle(a,b,c)", "!collinear(a,b,c)"},
        [](const Scene& s, std::span<const PointId> b) {
            return b[0] < b[1] && b[1] < b[2] && triangle_drawn(s, b[0], b[1], b[2]) &&
                   noncollinear(s, b[0], b[1], b[2]);
        },
        [](const Scene& s, std::span<const PointId> b, Rng&) -> std::optional<Placement> {
            const auto& g = s.geometry;
            Coord a = g.at(b[0]), bb = g.at(b[1]), c = g.at(b[2]);
            double d = 2.0 * (a.x * (bb.y - c.y) + bb.x * (c.y - a.y) + c.x * (a.y - bb.y));
            double a2 = dot(a, a), b2 = dot(bb, bb), c2 = dot(c, c);
            Coord o{(a2 * (bb.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - bb.y)) / d,
                    (a2 * (c.x - bb.x) + b2 * (a.x - c.x) + c2 * (bb.x - a.x)) / d};
            if (!inside_box(o)) return std::nullopt;
            return Placement{{o}, [](std::span<const PointId> bd, std::span<const PointId> n) {
                                 return make_step("circumcenter", bd, n,
                                                  {st::eq_seg(n[0], bd[0], n[0], bd[1]),
                                                   st::eq_seg(n[0], bd[1], n[0], bd[2])},
                                                  {}, {{n[0], bd[0]}});
                             }};
        }});

    cat.push_back(Construction{
        "median", 3, 1, {"triangle(a,b,c)"},
        [](const Scene& s, std::span<const PointId> b) {
            return b[1] < b[2] && triangle_drawn(s, b[0], b[1], b[2]) && noncollinear(s, b[0], b[1], b[2]);
        },
        [](const Scene& s, std::span<const PointId> b, Rng&) -> std::optional<Placement> {
            Coord m = 0.5 * (s.geometry.at(b[1]) + s.geometry.at(b[2]));
            return Placement{{m}, [](std::span<const PointId> bd, std::span<const PointId> n) {
                                 return make_step("median", bd, n, {st::midpoint(n[0], bd[1], bd[2])},
                                                  {seg(bd[0], n[0])});
                             }};
        }});

    cat.push_back(Construction{
        "reflect_point", 2, 1, {"segment(a,b)"},
        [](const Scene& s, std::span<const PointId> b) { return s.has_segment(b[0], b[1]); },
        [](const Scene& s, std::span<const PointId> b, Rng&) -> std::optional<Placement> {
            Coord r = 2.0 * s.geometry.at(b[1]) - s.geometry.at(b[0]);
            if (!inside_box(r)) return std::nullopt;
            return Placement{{r}, [](std::span<const PointId> bd, std::span<const PointId> n) {
                                 return make_step("reflect_point", bd, n, {st::midpoint(bd[1], bd[0], n[0])},
                                                  {seg(bd[1], n[0])});
                             }};
        }});

    cat.push_back(Construction{
        "midsegment_endpoints", 3, 2, {"triangle(a,b,c)"},
        [](const Scene& s, std::span<const PointId> b) {
            return b[1] < b[2] && triangle_drawn(s, b[0], b[1], b[2]) && noncollinear(s, b[0], b[1], b[2]);
        },
        [](const Scene& s, std::span<const PointId> b, Rng&) -> std::optional<Placement> {
            const auto& g = s.geometry;
            Coord m = 0.5 * (g.at(b[0]) + g.at(b[1]));
            Coord n = 0.5 * (g.at(b[0]) + g.at(b[2]));
            return Placement{{m, n}, [](std::span<const PointId> bd, std::span<const PointId> f) {
                                 return make_step("midsegment_endpoints", bd, f,
                                                  {st::midpoint(f[0], bd[0], bd[1]), st::midpoint(f[1], bd[0], bd[2])},
                                                  {seg(f[0], f[1])});
                             }};
        }});

    return cat;
}

// Validates a candidate scene: every effect holds and the scene passes
// check_scene.
bool scene_ok(const Scene& s) { return check_scene(s.geometry, s.initial).valid; }

void enumerate_bindings(std::size_t n, std::size_t arity, std::vector<PointId>& cur, std::vector<bool>& used,
                        const std::function<void(const std::vector<PointId>&)>& visit) {
    if (cur.size() == arity) {
        visit(cur);
        return;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (used[i]) continue;
        used[i] = true;
        cur.push_back(P(i));
        enumerate_bindings(n, arity, cur, used, visit);
        cur.pop_back();
        used[i] = false;
    }
}

}  // namespace

bool Scene::has_segment(PointId a, PointId b) const {
    Segment key = seg(a, b);
    for (const auto& c : constructions) {
        for (const auto& s : c.segments) {
            if (s == key) return true;
        }
    }
    return false;
}

std::vector<Segment> Scene::drawn_segments() const {
    std::vector<Segment> out;
    for (const auto& c : constructions) {
        for (const auto& s : c.segments) {
            if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
        }
    }
    return out;
}

std::vector<CircleMark> Scene::drawn_circles() const {
    std::vector<CircleMark> out;
    for (const auto& c : constructions) {
        for (const auto& m : c.circles) {
            if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
        }
    }
    return out;
}

const std::vector<Construction>& construction_catalog() {
    static const std::vector<Construction> kCatalog = build_catalog();
    return kCatalog;
}

const Construction* find_construction(std::string_view id) {
    for (const auto& c : construction_catalog()) {
        if (c.id == id) return &c;
    }
    return nullptr;
}

const std::vector<std::string>& generator_catalog() {
    static const std::vector<std::string> kNames = [] {
        std::vector<std::string> names;
        for (const auto& [name, fn] : generators()) names.push_back(name);
        return names;
    }();
    return kNames;
}

Scene generate_base_scene(std::string_view generator_id, std::uint64_t rng_seed) {
    GeneratorFn fn = nullptr;
    for (const auto& [name, f] : generators()) {
        if (name == generator_id) fn = f;
    }
    if (!fn) throw UnknownGenerator("unknown generator '" + std::string(generator_id) + "'");

    Rng rng(rng_seed);
    for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
        auto draft = fn(rng);
        if (!draft) continue;
        auto placed = fit_to_box(draft->points, rng);
        if (!placed) continue;

        Scene scene;
        scene.seed = rng_seed;
        scene.generator = std::string(generator_id);
        scene.geometry = SceneGeometry(*placed);
        std::vector<PointId> fresh;
        for (std::size_t i = 0; i < placed->size(); ++i) fresh.push_back(P(i));
        scene.constructions.push_back(make_step(std::string(generator_id), {}, fresh, draft->effects,
                                                draft->segments, draft->circles));
        for (const auto& e : scene.constructions.back().effects) scene.initial.insert(e);
        if (scene_ok(scene)) return scene;
    }
    throw PlacementFailure("generator '" + std::string(generator_id) + "' produced only degenerate scenes");
}

std::optional<Scene> apply_construction(const Scene& scene, const Construction& c, std::span<const PointId> binding,
                                        Rng& rng) {
    if (scene.geometry.size() + c.new_point_count > kMaxScenePoints) return std::nullopt;
    for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
        auto placement = c.place(scene, binding, rng);
        if (!placement) continue;
        Scene next = scene;
        std::vector<PointId> fresh;
        for (const auto& p : placement->new_points) fresh.push_back(next.geometry.add_point(p));
        next.constructions.push_back(placement->describe(binding, fresh));
        for (const auto& e : next.constructions.back().effects) next.initial.insert(e);
        if (scene_ok(next)) return next;
    }
    return std::nullopt;
}

std::vector<Applicable> applicable_constructions(const Scene& scene) {
    std::vector<Applicable> out;
    std::size_t n = scene.geometry.size();
    for (const auto& c : construction_catalog()) {
        if (n + c.new_point_count > kMaxScenePoints) continue;
        std::vector<PointId> cur;
        std::vector<bool> used(n, false);
        enumerate_bindings(n, c.arity, cur, used, [&](const std::vector<PointId>& b) {
            if (c.admits(scene, b)) out.push_back({&c, b});
        });
    }
    return out;
}

Scene extend_scene(const Scene& scene, int steps, std::uint64_t rng_seed) {
    if (steps < 0) throw std::invalid_argument("steps must be non-negative");
    Scene cur = scene;
    if (steps == 0) return cur;
    Rng rng(rng_seed);
    ExtensionRecord rec{rng_seed, steps, 0};
    for (int i = 0; i < steps; ++i) {
        auto options = applicable_constructions(cur);
        bool applied = false;
        while (!options.empty()) {
            std::size_t pick = rng.index(options.size());
            auto next = apply_construction(cur, *options[pick].construction, options[pick].binding, rng);
            if (next) {
                cur = std::move(*next);
                applied = true;
                break;
            }
            options.erase(options.begin() + static_cast<std::ptrdiff_t>(pick));
        }
        if (!applied) {
            cur.short_of_steps = true;
            break;
        }
        ++rec.applied;
    }
    cur.extensions.push_back(rec);
    return cur;
}

Scene replay_scene(const Scene& scene) {
    Scene out = generate_base_scene(scene.generator, scene.seed);
    for (const auto& ext : scene.extensions) out = extend_scene(out, ext.steps, ext.seed);
    return out;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

nlohmann::json labels(std::span<const PointId> ids) {
    auto arr = nlohmann::json::array();
    for (auto p : ids) arr.push_back(p.label());
    return arr;
}

PointId label_of(const nlohmann::json& j) {
    auto id = PointId::from_label(j.get<std::string>());
    if (!id) throw UnknownPoint("bad point label '" + j.get<std::string>() + "'");
    return *id;
}

}  // namespace

nlohmann::json scene_to_json(const Scene& scene) {
    nlohmann::json j;
    j["seed"] = scene.seed;
    j["generator"] = scene.generator;
    auto cons = nlohmann::json::array();
    for (const auto& c : scene.constructions) {
        nlohmann::json cj;
        cj["id"] = c.id;
        cj["binding"] = labels(c.binding);
        cj["new_points"] = labels(c.new_points);
        auto eff = nlohmann::json::array();
        for (const auto& e : c.effects) eff.push_back(serialize_statement(e));
        cj["effects"] = eff;
        auto segs = nlohmann::json::array();
        for (const auto& s : c.segments) segs.push_back(labels(s));
        cj["segments"] = segs;
        auto circles = nlohmann::json::array();
        for (const auto& m : c.circles) circles.push_back({m.center.label(), m.through.label()});
        cj["circles"] = circles;
        cons.push_back(cj);
    }
    j["constructions"] = cons;
    auto pts = nlohmann::json::object();
    for (std::size_t i = 0; i < scene.geometry.size(); ++i) {
        const auto& c = scene.geometry.points()[i];
        pts[P(i).label()] = {c.x, c.y};
    }
    j["points"] = pts;
    auto s0 = nlohmann::json::array();
    for (const auto& s : scene.initial) s0.push_back(serialize_statement(s));
    j["initial_statements"] = s0;
    auto ext = nlohmann::json::array();
    for (const auto& e : scene.extensions) ext.push_back({{"seed", e.seed}, {"steps", e.steps}, {"applied", e.applied}});
    j["extensions"] = ext;
    j["short"] = scene.short_of_steps;
    return j;
}

Scene scene_from_json(const nlohmann::json& j) {
    Scene s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.generator = j.at("generator").get<std::string>();
    const auto& pts = j.at("points");
    std::vector<Coord> coords(pts.size());
    for (const auto& [label, xy] : pts.items()) {
        auto id = PointId::from_label(label);
        if (!id || id->index() >= coords.size()) throw UnknownPoint("bad point label '" + label + "'");
        coords[id->index()] = {xy.at(0).get<double>(), xy.at(1).get<double>()};
    }
    s.geometry = SceneGeometry(std::move(coords));
    std::size_t limit = s.geometry.size();
    for (const auto& cj : j.at("constructions")) {
        ConstructionStep c;
        c.id = cj.at("id").get<std::string>();
        for (const auto& l : cj.at("binding")) c.binding.push_back(label_of(l));
        for (const auto& l : cj.at("new_points")) c.new_points.push_back(label_of(l));
        for (const auto& e : cj.at("effects")) c.effects.push_back(parse_statement(e.get<std::string>(), limit));
        for (const auto& sg : cj.at("segments")) c.segments.push_back({label_of(sg.at(0)), label_of(sg.at(1))});
        for (const auto& m : cj.at("circles")) c.circles.push_back({label_of(m.at(0)), label_of(m.at(1))});
        for (const auto& e : c.effects) s.initial.insert(e);
        s.constructions.push_back(std::move(c));
    }
    StatementSet listed;
    for (const auto& t : j.at("initial_statements")) listed.insert(parse_statement(t.get<std::string>(), limit));
    if (listed.items() != s.initial.items()) {
        throw std::runtime_error("scene initial_statements disagree with construction effects");
    }
    for (const auto& e : j.at("extensions")) {
        s.extensions.push_back({e.at("seed").get<std::uint64_t>(), e.at("steps").get<int>(), e.at("applied").get<int>()});
    }
    s.short_of_steps = j.value("short", false);
    return s;
}

}  // namespace geoforge
