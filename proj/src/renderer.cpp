#include "geoforge/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace geoforge {

void DiagramStyle::validate() const {
    for (double v : {canvas, stroke, mark_stroke, font_size, label_offset, mark_size, dot_radius}) {
        if (!(v > 0.0)) throw std::invalid_argument("diagram style dimensions must be positive");
    }
}

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s(buf);
    if (s == "-0.00") s = "0.00";
    return s;
}

Segment seg(PointId a, PointId b) { return a < b ? Segment{a, b} : Segment{b, a}; }

void add_unique(std::vector<Segment>& out, Segment s) {
    if (s[0] != s[1] && std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
}

// Segments named by a statement (sides, rays of angles, triangle edges).
void statement_segments(const Statement& s, std::vector<Segment>& out) {
    auto p = s.points();
    auto tri = [&](std::size_t i) {
        add_unique(out, seg(p[i], p[i + 1]));
        add_unique(out, seg(p[i + 1], p[i + 2]));
        add_unique(out, seg(p[i], p[i + 2]));
    };
    auto angle = [&](std::size_t i) {
        add_unique(out, seg(p[i], p[i + 1]));
        add_unique(out, seg(p[i + 1], p[i + 2]));
    };
    switch (s.predicate()) {
        case Predicate::Parallel:
        case Predicate::Perpendicular:
        case Predicate::EqualSegments:
        case Predicate::SegmentRatio:
            add_unique(out, seg(p[0], p[1]));
            add_unique(out, seg(p[2], p[3]));
            break;
        case Predicate::SegmentLength:
            add_unique(out, seg(p[0], p[1]));
            break;
        case Predicate::EqualAngles:
            angle(0);
            angle(3);
            break;
        case Predicate::AngleMeasure:
        case Predicate::RightAngle:
            angle(0);
            break;
        case Predicate::Midpoint:
            add_unique(out, seg(p[1], p[2]));
            break;
        case Predicate::CongruentTriangles:
        case Predicate::SimilarTriangles:
            tri(0);
            tri(3);
            break;
        case Predicate::Collinear:
        case Predicate::OnCircle:
            break;
    }
}

struct Frame {
    double minx, maxy, k;
    Coord map(Coord c) const { return {(c.x - minx) * k, (maxy - c.y) * k}; }
};

}  // namespace

std::string render_svg(const Scene& scene, const DiagramStyle& style) {
    style.validate();
    const auto& g = scene.geometry;
    auto circles = scene.drawn_circles();

    double minx = 1e300, miny = 1e300, maxx = -1e300, maxy = -1e300;
    auto grow = [&](Coord c) {
        minx = std::min(minx, c.x);
        maxx = std::max(maxx, c.x);
        miny = std::min(miny, c.y);
        maxy = std::max(maxy, c.y);
    };
    for (const auto& c : g.points()) grow(c);
    for (const auto& c : circles) {
        double r = distance(g.at(c.center), g.at(c.through));
        Coord o = g.at(c.center);
        grow({o.x - r, o.y - r});
        grow({o.x + r, o.y + r});
    }
    if (g.size() == 0) minx = miny = maxx = maxy = 0.0;
    double span = std::max({maxx - minx, maxy - miny, 1e-6});
    double margin = 0.05 * span;
    minx -= margin;
    miny -= margin;
    maxx += margin;
    maxy += margin;
    double k = style.canvas / (span + 2 * margin);
    Frame f{minx, maxy, k};
    double width = (maxx - minx) * k;
    double height = (maxy - miny) * k;

    // Segments: everything drawn by constructions plus everything S0 names,
    // minus pieces covered by a longer collinear segment.
    std::vector<Segment> segments = scene.drawn_segments();
    for (const auto& s : scene.initial) statement_segments(s, segments);
    auto covered = [&](const Segment& s) {
        Coord a = g.at(s[0]), b = g.at(s[1]);
        for (const auto& t : segments) {
            if (t == s) continue;
            Coord c = g.at(t[0]), d = g.at(t[1]);
            if (orientation(c, d, a, 1e-9) != 0 || orientation(c, d, b, 1e-9) != 0) continue;
            auto inside = [&](Coord p) { return p == c || p == d || strictly_between(p, c, d); };
            if (inside(a) && inside(b) && distance(c, d) > distance(a, b) + 1e-12) return true;
        }
        return false;
    };
    std::vector<Segment> lines;
    for (const auto& s : segments) {
        if (!covered(s)) lines.push_back(s);
    }

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" + num(height) +
           "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<g stroke=\"black\" stroke-width=\"" + num(style.stroke) + "\" stroke-linecap=\"round\">\n";
    for (const auto& s : lines) {
        Coord a = f.map(g.at(s[0])), b = f.map(g.at(s[1]));
        out += "<line x1=\"" + num(a.x) + "\" y1=\"" + num(a.y) + "\" x2=\"" + num(b.x) + "\" y2=\"" + num(b.y) +
               "\"/>\n";
    }
    out += "</g>\n";

    if (!circles.empty()) {
        out += "<g fill=\"none\" stroke=\"black\" stroke-width=\"" + num(style.stroke) + "\">\n";
        for (const auto& c : circles) {
            Coord o = f.map(g.at(c.center));
            double r = distance(g.at(c.center), g.at(c.through)) * k;
            out += "<circle class=\"circle\" cx=\"" + num(o.x) + "\" cy=\"" + num(o.y) + "\" r=\"" + num(r) + "\"/>\n";
        }
        out += "</g>\n";
    }

    std::string marks;
    if (style.show_right_angle_marks) {
        for (const auto& s : scene.initial) {
            if (s.predicate() != Predicate::RightAngle) continue;
            Coord v = f.map(g.at(s.point(1)));
            Coord a = f.map(g.at(s.point(0))) - v;
            Coord b = f.map(g.at(s.point(2))) - v;
            Coord ua = (style.mark_size / norm(a)) * a;
            Coord ub = (style.mark_size / norm(b)) * b;
            Coord p1 = v + ua, p2 = v + ua + ub, p3 = v + ub;
            marks += "<path class=\"right-angle\" d=\"M " + num(p1.x) + " " + num(p1.y) + " L " + num(p2.x) + " " +
                     num(p2.y) + " L " + num(p3.x) + " " + num(p3.y) + "\"/>\n";
        }
    }
    if (style.show_equal_tick_marks) {
        // Equal-length classes from S0, numbered in first-appearance order.
        std::vector<Segment> members;
        std::vector<std::size_t> parent;
        auto find_id = [&](Segment s) -> std::size_t {
            auto it = std::find(members.begin(), members.end(), s);
            if (it != members.end()) return static_cast<std::size_t>(it - members.begin());
            members.push_back(s);
            parent.push_back(parent.size());
            return members.size() - 1;
        };
        auto root = [&](std::size_t i) {
            while (parent[i] != i) i = parent[i];
            return i;
        };
        for (const auto& s : scene.initial) {
            if (s.predicate() != Predicate::EqualSegments) continue;
            auto a = find_id(seg(s.point(0), s.point(1)));
            auto b = find_id(seg(s.point(2), s.point(3)));
            auto ra = root(a), rb = root(b);
            if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
        }
        std::vector<std::size_t> class_rank(members.size(), 0);
        std::size_t next = 0;
        for (std::size_t i = 0; i < members.size(); ++i) {
            if (root(i) == i) class_rank[i] = ++next;
        }
        for (std::size_t i = 0; i < members.size(); ++i) {
            std::size_t ticks = std::min<std::size_t>(class_rank[root(i)], 3);
            Coord a = f.map(g.at(members[i][0])), b = f.map(g.at(members[i][1]));
            Coord d = b - a;
            double len = norm(d);
            if (len < 1e-9) continue;
            Coord u = (1.0 / len) * d;
            Coord n{-u.y, u.x};
            Coord mid = 0.5 * (a + b);
            std::string path;
            for (std::size_t t = 0; t < ticks; ++t) {
                double shift = (static_cast<double>(t) - 0.5 * static_cast<double>(ticks - 1)) * 4.0;
                Coord c = mid + shift * u;
                Coord p = c + (0.5 * style.mark_size) * n;
                Coord q = c - (0.5 * style.mark_size) * n;
                if (!path.empty()) path += " ";
                path += "M " + num(p.x) + " " + num(p.y) + " L " + num(q.x) + " " + num(q.y);
            }
            marks += "<path class=\"tick\" d=\"" + path + "\"/>\n";
        }
    }
    if (!marks.empty()) {
        out += "<g fill=\"none\" stroke=\"black\" stroke-width=\"" + num(style.mark_stroke) + "\">\n" + marks + "</g>\n";
    }

    if (style.show_point_dots) {
        out += "<g fill=\"black\">\n";
        for (const auto& c : g.points()) {
            Coord p = f.map(c);
            out += "<circle class=\"point\" cx=\"" + num(p.x) + "\" cy=\"" + num(p.y) + "\" r=\"" +
                   num(style.dot_radius) + "\"/>\n";
        }
        out += "</g>\n";
    }

    // Labels: pick, among eight compass directions, the one farthest (in
    // angle) from every segment leaving the point; ties go to the direction
    // pointing away from the centroid.
    Coord centroid{0, 0};
    for (const auto& c : g.points()) centroid = centroid + c;
    if (g.size() > 0) centroid = (1.0 / static_cast<double>(g.size())) * centroid;
    out += "<g font-family=\"sans-serif\" font-size=\"" + num(style.font_size) +
           "\" text-anchor=\"middle\" dominant-baseline=\"central\">\n";
    constexpr double kPi = 3.14159265358979323846;
    for (std::size_t i = 0; i < g.size(); ++i) {
        PointId id(static_cast<std::uint16_t>(i));
        Coord p = g.at(id);
        std::vector<double> dirs;  // world-space directions of incident strokes
        for (const auto& s : lines) {
            Coord a = g.at(s[0]), b = g.at(s[1]);
            if (s[0] == id || s[1] == id) {
                Coord other = s[0] == id ? b : a;
                dirs.push_back(std::atan2(other.y - p.y, other.x - p.x));
            } else if (orientation(a, b, p, 1e-9) == 0 && strictly_between(p, a, b)) {
                dirs.push_back(std::atan2(a.y - p.y, a.x - p.x));
                dirs.push_back(std::atan2(b.y - p.y, b.x - p.x));
            }
        }
        for (const auto& c : circles) {
            Coord o = g.at(c.center);
            double r = distance(o, g.at(c.through));
            if (std::abs(distance(o, p) - r) < 1e-6 * std::max(1.0, r)) {
                double radial = std::atan2(p.y - o.y, p.x - o.x);
                dirs.push_back(radial + kPi / 2);
                dirs.push_back(radial - kPi / 2);
            }
        }
        Coord away = p - centroid;
        double away_angle = norm(away) > 1e-9 ? std::atan2(away.y, away.x) : kPi / 2;
        double best = -1.0;
        double best_angle = away_angle;
        for (int d = 0; d < 8; ++d) {
            double cand = d * kPi / 4;
            double clearance = kPi;
            for (double s : dirs) {
                double diff = std::abs(std::remainder(cand - s, 2 * kPi));
                clearance = std::min(clearance, diff);
            }
            double bias = std::abs(std::remainder(cand - away_angle, 2 * kPi));
            double score = clearance - 0.05 * bias;
            if (score > best + 1e-12) {
                best = score;
                best_angle = cand;
            }
        }
        Coord pos = f.map(p);
        pos.x += style.label_offset * std::cos(best_angle);
        pos.y -= style.label_offset * std::sin(best_angle);
        double pad = 0.5 * style.font_size;
        pos.x = std::clamp(pos.x, pad, std::max(pad, width - pad));
        pos.y = std::clamp(pos.y, pad, std::max(pad, height - pad));
        out += "<text x=\"" + num(pos.x) + "\" y=\"" + num(pos.y) + "\">" + id.label() + "</text>\n";
    }
    out += "</g>\n</svg>\n";
    return out;
}

}  // namespace geoforge
