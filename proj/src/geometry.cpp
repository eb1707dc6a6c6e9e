#include "geoforge/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace geoforge {

double dot(Coord a, Coord b) { return a.x * b.x + a.y * b.y; }
double cross(Coord a, Coord b) { return a.x * b.y - a.y * b.x; }
double norm(Coord a) { return std::hypot(a.x, a.y); }
double distance(Coord a, Coord b) { return norm(b - a); }

double angle_deg(Coord a, Coord vertex, Coord b) {
    Coord u = a - vertex;
    Coord v = b - vertex;
    return std::atan2(std::abs(cross(u, v)), dot(u, v)) * 180.0 / std::numbers::pi;
}

int orientation(Coord a, Coord b, Coord c, double eps) {
    Coord u = b - a;
    Coord v = c - a;
    double scale = std::max({norm(u) * norm(v), 1e-300});
    double s = cross(u, v) / scale;
    if (s > eps) return 1;
    if (s < -eps) return -1;
    return 0;
}

bool strictly_between(Coord p, Coord a, Coord b) { return dot(a - p, b - p) < 0.0; }

bool same_side(Coord p, Coord q, Coord line_a, Coord line_b) {
    int op = orientation(line_a, line_b, p);
    int oq = orientation(line_a, line_b, q);
    return op != 0 && op == oq;
}

bool opposite_sides(Coord p, Coord q, Coord line_a, Coord line_b) {
    int op = orientation(line_a, line_b, p);
    int oq = orientation(line_a, line_b, q);
    return op != 0 && oq != 0 && op != oq;
}

Coord rotate(Coord v, double degrees) {
    double r = degrees * std::numbers::pi / 180.0;
    double c = std::cos(r);
    double s = std::sin(r);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

SceneGeometry::SceneGeometry(std::vector<Coord> points, Tolerances tol) : points_(std::move(points)), tol_(tol) {}

PointId SceneGeometry::add_point(Coord c) {
    if (points_.size() > PointId::kMaxIndex) throw std::length_error("too many points");
    points_.push_back(c);
    return PointId(static_cast<std::uint16_t>(points_.size() - 1));
}

const Coord& SceneGeometry::at(PointId p) const {
    if (p.index() >= points_.size()) throw UnknownPoint("unknown point '" + p.label() + "'");
    return points_[p.index()];
}

BoundingBox SceneGeometry::bounding_box() const {
    if (points_.empty()) return {};
    BoundingBox box{points_.front(), points_.front()};
    for (const auto& p : points_) {
        box.min.x = std::min(box.min.x, p.x);
        box.min.y = std::min(box.min.y, p.y);
        box.max.x = std::max(box.max.x, p.x);
        box.max.y = std::max(box.max.y, p.y);
    }
    return box;
}

namespace {

double rel_diff(double a, double b) {
    double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

double seg_len(const SceneGeometry& g, PointId a, PointId b) { return distance(g.at(a), g.at(b)); }

double angle_at(const SceneGeometry& g, PointId a, PointId v, PointId b) {
    return angle_deg(g.at(a), g.at(v), g.at(b));
}

// |sin| of the angle between the two directions.
double direction_cross(Coord u, Coord v) {
    double s = norm(u) * norm(v);
    return s > 0 ? std::abs(cross(u, v)) / s : 1.0;
}

double direction_dot(Coord u, Coord v) {
    double s = norm(u) * norm(v);
    return s > 0 ? std::abs(dot(u, v)) / s : 1.0;
}

std::array<double, 3> sides(const SceneGeometry& g, std::span<const PointId> t) {
    return {seg_len(g, t[0], t[1]), seg_len(g, t[1], t[2]), seg_len(g, t[2], t[0])};
}

double residual(const SceneGeometry& g, const Statement& s) {
    auto p = s.points();
    switch (s.predicate()) {
        case Predicate::Collinear: {
            Coord a = g.at(p[0]), b = g.at(p[1]), c = g.at(p[2]);
            double scale = std::max({distance(a, b), distance(b, c), distance(a, c)});
            if (scale == 0.0) return 0.0;
            return std::abs(cross(b - a, c - a)) / (scale * scale);
        }
        case Predicate::Parallel:
            return direction_cross(g.at(p[1]) - g.at(p[0]), g.at(p[3]) - g.at(p[2]));
        case Predicate::Perpendicular:
            return direction_dot(g.at(p[1]) - g.at(p[0]), g.at(p[3]) - g.at(p[2]));
        case Predicate::EqualSegments:
            return rel_diff(seg_len(g, p[0], p[1]), seg_len(g, p[2], p[3]));
        case Predicate::EqualAngles:
            return rel_diff(angle_at(g, p[0], p[1], p[2]), angle_at(g, p[3], p[4], p[5]));
        case Predicate::SegmentLength:
            return rel_diff(seg_len(g, p[0], p[1]), s.value()->to_double());
        case Predicate::AngleMeasure:
            return rel_diff(angle_at(g, p[0], p[1], p[2]), s.value()->to_double());
        case Predicate::RightAngle:
            return direction_dot(g.at(p[0]) - g.at(p[1]), g.at(p[2]) - g.at(p[1]));
        case Predicate::Midpoint: {
            Coord mid = 0.5 * (g.at(p[1]) + g.at(p[2]));
            double len = seg_len(g, p[1], p[2]);
            return len > 0 ? distance(g.at(p[0]), mid) / len : 1.0;
        }
        case Predicate::OnCircle:
            return rel_diff(seg_len(g, p[1], p[0]), seg_len(g, p[2], p[3]));
        case Predicate::CongruentTriangles: {
            auto l = sides(g, p.subspan(0, 3));
            auto r = sides(g, p.subspan(3, 3));
            return std::max({rel_diff(l[0], r[0]), rel_diff(l[1], r[1]), rel_diff(l[2], r[2])});
        }
        case Predicate::SimilarTriangles: {
            auto l = sides(g, p.subspan(0, 3));
            auto r = sides(g, p.subspan(3, 3));
            if (l[0] == 0 || l[1] == 0 || l[2] == 0) return 1.0;
            double k0 = r[0] / l[0], k1 = r[1] / l[1], k2 = r[2] / l[2];
            return std::max({rel_diff(k0, k1), rel_diff(k1, k2), rel_diff(k0, k2)});
        }
        case Predicate::SegmentRatio: {
            double den = seg_len(g, p[2], p[3]);
            if (den == 0.0) return 1.0;
            return rel_diff(seg_len(g, p[0], p[1]) / den, s.value()->to_double());
        }
    }
    return 1.0;
}

void collect_angles(const Statement& s, std::vector<std::array<PointId, 3>>& out) {
    auto p = s.points();
    switch (s.predicate()) {
        case Predicate::EqualAngles:
            out.push_back({p[0], p[1], p[2]});
            out.push_back({p[3], p[4], p[5]});
            break;
        case Predicate::AngleMeasure:
        case Predicate::RightAngle:
            out.push_back({p[0], p[1], p[2]});
            break;
        default:
            break;
    }
}

void collect_triangles(const Statement& s, std::vector<std::array<PointId, 3>>& out) {
    auto p = s.points();
    if (s.predicate() == Predicate::CongruentTriangles || s.predicate() == Predicate::SimilarTriangles) {
        out.push_back({p[0], p[1], p[2]});
        out.push_back({p[3], p[4], p[5]});
    }
}

}  // namespace

StatementVerdict check_statement(const SceneGeometry& g, const Statement& s) {
    for (auto p : s.points()) (void)g.at(p);
    if (s.has_value_slot() && !s.value()) throw MalformedStatement("statement without value");
    double r = residual(g, s);
    return {std::isfinite(r) && r <= g.tolerances().eps_rel, r};
}

bool is_nondegenerate(const SceneGeometry& g, const Statement& s) {
    constexpr double kAngleEps = 1e-6;
    std::vector<std::array<PointId, 3>> angles, triangles;
    collect_angles(s, angles);
    collect_triangles(s, triangles);
    for (const auto& a : angles) {
        double deg = angle_at(g, a[0], a[1], a[2]);
        if (!(deg > kAngleEps && deg < 180.0 - kAngleEps)) return false;
    }
    for (const auto& t : triangles) {
        if (orientation(g.at(t[0]), g.at(t[1]), g.at(t[2]), 1e-7) == 0) return false;
    }
    auto p = s.points();
    switch (s.predicate()) {
        case Predicate::Parallel:
        case Predicate::Perpendicular:
        case Predicate::EqualSegments:
        case Predicate::SegmentRatio:
            return seg_len(g, p[0], p[1]) > 0 && seg_len(g, p[2], p[3]) > 0;
        default:
            return true;
    }
}

SceneVerdict check_scene(const SceneGeometry& g, const StatementSet& s0) {
    SceneVerdict v;
    const auto& tol = g.tolerances();
    for (const auto& c : g.points()) {
        if (!std::isfinite(c.x) || !std::isfinite(c.y)) {
            v.valid = false;
            v.degeneracies.push_back("non-finite coordinate");
        }
    }
    double dmin = g.d_min();
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (std::size_t j = i + 1; j < g.size(); ++j) {
            if (distance(g.points()[i], g.points()[j]) < dmin) {
                v.valid = false;
                v.degeneracies.push_back("points " + PointId(static_cast<std::uint16_t>(i)).label() + " and " +
                                         PointId(static_cast<std::uint16_t>(j)).label() + " closer than d_min");
            }
        }
    }
    for (const auto& s : s0) {
        bool known = std::all_of(s.points().begin(), s.points().end(),
                                 [&](PointId p) { return p.index() < g.size(); });
        if (!known) {
            v.valid = false;
            v.failing.push_back(s);
            continue;
        }
        if (!check_statement(g, s).holds) {
            v.valid = false;
            v.failing.push_back(s);
        }
        std::vector<std::array<PointId, 3>> angles, triangles;
        collect_angles(s, angles);
        collect_triangles(s, triangles);
        for (const auto& a : angles) {
            double deg = angle_at(g, a[0], a[1], a[2]);
            if (deg < tol.theta_min_deg || deg > 180.0 - tol.theta_min_deg) {
                v.valid = false;
                v.degeneracies.push_back("angle " + a[0].label() + a[1].label() + a[2].label() + " below theta_min");
            }
        }
        for (const auto& t : triangles) {
            for (int k = 0; k < 3; ++k) {
                double deg = angle_at(g, t[(k + 1) % 3], t[k], t[(k + 2) % 3]);
                if (deg < tol.theta_min_deg) {
                    v.valid = false;
                    v.degeneracies.push_back("triangle " + t[0].label() + t[1].label() + t[2].label() +
                                             " has an angle below theta_min");
                    break;
                }
            }
        }
    }
    return v;
}

double measure(const SceneGeometry& g, const Statement& query) {
    auto p = query.points();
    switch (query.predicate()) {
        case Predicate::SegmentLength:
            if (p.size() != 2) break;
            return seg_len(g, p[0], p[1]);
        case Predicate::AngleMeasure:
            if (p.size() != 3) break;
            return angle_at(g, p[0], p[1], p[2]);
        case Predicate::SegmentRatio: {
            if (p.size() != 4) break;
            double den = seg_len(g, p[2], p[3]);
            if (den == 0.0) throw DegenerateMeasurement("zero-length denominator segment");
            return seg_len(g, p[0], p[1]) / den;
        }
        default:
            break;
    }
    throw MalformedStatement("numeric query must be seg_len, angle_val or seg_ratio with matching arity");
}

std::optional<Rational> snap_rational(double v, double eps_rel, std::int64_t max_den) {
    if (!std::isfinite(v)) return std::nullopt;
    double tol = eps_rel * std::max(std::abs(v), 1.0);
    for (std::int64_t q = 1; q <= max_den; ++q) {
        double pn = std::round(v * static_cast<double>(q));
        if (std::abs(pn) > 9e15) return std::nullopt;
        double approx = pn / static_cast<double>(q);
        if (std::abs(approx - v) <= tol) return Rational(static_cast<std::int64_t>(pn), q);
    }
    return std::nullopt;
}

NumericValue numeric_answer(const SceneGeometry& g, const Statement& query) {
    for (auto p : query.points()) (void)g.at(p);
    auto p = query.points();
    if (query.predicate() == Predicate::SegmentLength && p.size() == 2 && seg_len(g, p[0], p[1]) == 0.0) {
        throw DegenerateMeasurement("zero-length segment");
    }
    if (query.predicate() == Predicate::AngleMeasure && p.size() == 3 &&
        (seg_len(g, p[0], p[1]) == 0.0 || seg_len(g, p[1], p[2]) == 0.0)) {
        throw DegenerateMeasurement("zero-length ray");
    }
    NumericValue out;
    out.approx = measure(g, query);
    out.exact = snap_rational(out.approx, g.tolerances().eps_rel);
    return out;
}

}  // namespace geoforge
