#include "geoforge/statement.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace geoforge {

namespace {

using P = Predicate;

constexpr std::array<PredicateInfo, kPredicateCount> kPredicates = {{
    {P::Collinear, "collinear", {3, 0, 0}, 1, 3, ValueUnit::None},
    {P::Parallel, "parallel", {2, 2, 0}, 2, 4, ValueUnit::None},
    {P::Perpendicular, "perp", {2, 2, 0}, 2, 4, ValueUnit::None},
    {P::EqualSegments, "eq_seg", {2, 2, 0}, 2, 4, ValueUnit::None},
    {P::EqualAngles, "eq_angle", {3, 3, 0}, 2, 6, ValueUnit::None},
    {P::SegmentLength, "seg_len", {2, 0, 0}, 1, 2, ValueUnit::Length},
    {P::AngleMeasure, "angle_val", {3, 0, 0}, 1, 3, ValueUnit::Degrees},
    {P::RightAngle, "right_angle", {3, 0, 0}, 1, 3, ValueUnit::None},
    {P::Midpoint, "midpoint", {1, 2, 0}, 2, 3, ValueUnit::None},
    {P::OnCircle, "on_circle", {1, 1, 2}, 3, 4, ValueUnit::None},
    {P::CongruentTriangles, "congruent", {3, 3, 0}, 2, 6, ValueUnit::None},
    {P::SimilarTriangles, "similar", {3, 3, 0}, 2, 6, ValueUnit::None},
    {P::SegmentRatio, "seg_ratio", {2, 2, 0}, 2, 4, ValueUnit::Ratio},
}};

using Pts = Statement::Points;

void sort2(Pts& p, std::size_t i) {
    if (p[i + 1] < p[i]) std::swap(p[i], p[i + 1]);
}

// Angle (ray, vertex, ray): order the rays.
void sort_angle(Pts& p, std::size_t i) {
    if (p[i + 2] < p[i]) std::swap(p[i], p[i + 2]);
}

bool range_less(const Pts& p, std::size_t a, std::size_t b, std::size_t n) {
    return std::lexicographical_compare(p.begin() + a, p.begin() + a + n, p.begin() + b, p.begin() + b + n);
}

bool range_equal(const Pts& p, std::size_t a, std::size_t b, std::size_t n) {
    return std::equal(p.begin() + a, p.begin() + a + n, p.begin() + b);
}

void swap_ranges(Pts& p, std::size_t a, std::size_t b, std::size_t n) {
    std::swap_ranges(p.begin() + a, p.begin() + a + n, p.begin() + b);
}

[[noreturn]] void malformed(const Statement& s, const char* why) {
    throw MalformedStatement(std::string(s.info().name) + ": " + why);
}

bool distinct(std::initializer_list<PointId> ids) {
    std::set<PointId> seen(ids);
    return seen.size() == ids.size();
}

constexpr std::array<std::array<std::uint8_t, 3>, 6> kTrianglePerms = {{
    {0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {0, 2, 1}, {2, 1, 0}, {1, 0, 2},
}};

}  // namespace

std::string PointId::label() const {
    std::string out(1, static_cast<char>('A' + index_ % 26));
    if (index_ >= 26) out.push_back(static_cast<char>('0' + index_ / 26 - 1));
    return out;
}

std::optional<PointId> PointId::from_label(std::string_view label) {
    if (label.empty() || label.size() > 2) return std::nullopt;
    if (label[0] < 'A' || label[0] > 'Z') return std::nullopt;
    std::uint16_t idx = static_cast<std::uint16_t>(label[0] - 'A');
    if (label.size() == 2) {
        if (label[1] < '0' || label[1] > '9') return std::nullopt;
        idx = static_cast<std::uint16_t>(idx + 26 * (label[1] - '0' + 1));
    }
    return PointId(idx);
}

const PredicateInfo& predicate_info(Predicate p) { return kPredicates[static_cast<std::size_t>(p)]; }

std::optional<Predicate> predicate_from_name(std::string_view name) {
    for (const auto& info : kPredicates) {
        if (info.name == name) return info.kind;
    }
    return std::nullopt;
}

ParseError::ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& what)
    : StatementError(what), offset_(offset), expected_(std::move(expected)) {}

Statement::Statement(Predicate p, std::span<const PointId> points, std::optional<Rational> value)
    : predicate_(p), value_(value) {
    if (points.size() > kMaxPoints) throw MalformedStatement("too many points");
    count_ = static_cast<std::uint8_t>(points.size());
    std::copy(points.begin(), points.end(), points_.begin());
}

std::strong_ordering operator<=>(const Statement& a, const Statement& b) {
    if (auto c = a.predicate_ <=> b.predicate_; c != 0) return c;
    if (auto c = a.count_ <=> b.count_; c != 0) return c;
    for (std::size_t i = 0; i < a.count_; ++i) {
        if (auto c = a.points_[i] <=> b.points_[i]; c != 0) return c;
    }
    if (a.value_.has_value() != b.value_.has_value()) return a.value_.has_value() ? std::strong_ordering::greater
                                                                                  : std::strong_ordering::less;
    if (a.value_) return *a.value_ <=> *b.value_;
    return std::strong_ordering::equal;
}

std::size_t Statement::hash() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t v) {
        h ^= v;
        h *= 1099511628211ull;
    };
    mix(static_cast<std::uint64_t>(predicate_));
    for (std::size_t i = 0; i < count_; ++i) mix(points_[i].index());
    if (value_) {
        mix(static_cast<std::uint64_t>(value_->num()));
        mix(static_cast<std::uint64_t>(value_->den()));
    }
    return static_cast<std::size_t>(h);
}

namespace st {
namespace {
Statement mk(Predicate p, std::initializer_list<PointId> pts, std::optional<Rational> v = std::nullopt) {
    return Statement(p, std::span<const PointId>(pts.begin(), pts.size()), v);
}
}  // namespace
Statement collinear(PointId a, PointId b, PointId c) { return mk(P::Collinear, {a, b, c}); }
Statement parallel(PointId a, PointId b, PointId c, PointId d) { return mk(P::Parallel, {a, b, c, d}); }
Statement perpendicular(PointId a, PointId b, PointId c, PointId d) { return mk(P::Perpendicular, {a, b, c, d}); }
Statement eq_seg(PointId a, PointId b, PointId c, PointId d) { return mk(P::EqualSegments, {a, b, c, d}); }
Statement eq_angle(PointId a, PointId b, PointId c, PointId d, PointId e, PointId f) {
    return mk(P::EqualAngles, {a, b, c, d, e, f});
}
Statement seg_len(PointId a, PointId b, Rational v) { return mk(P::SegmentLength, {a, b}, v); }
Statement angle_val(PointId a, PointId b, PointId c, Rational v) { return mk(P::AngleMeasure, {a, b, c}, v); }
Statement right_angle(PointId a, PointId b, PointId c) { return mk(P::RightAngle, {a, b, c}); }
Statement midpoint(PointId m, PointId a, PointId b) { return mk(P::Midpoint, {m, a, b}); }
Statement on_circle(PointId p, PointId center, PointId r1, PointId r2) {
    return mk(P::OnCircle, {p, center, r1, r2});
}
Statement congruent(PointId a, PointId b, PointId c, PointId d, PointId e, PointId f) {
    return mk(P::CongruentTriangles, {a, b, c, d, e, f});
}
Statement similar(PointId a, PointId b, PointId c, PointId d, PointId e, PointId f) {
    return mk(P::SimilarTriangles, {a, b, c, d, e, f});
}
Statement seg_ratio(PointId a, PointId b, PointId c, PointId d, Rational v) {
    return mk(P::SegmentRatio, {a, b, c, d}, v);
}
}  // namespace st

Statement canonicalize(const Statement& s) {
    const auto& info = s.info();
    if (s.points().size() != info.point_count) malformed(s, "wrong arity");
    if (info.unit == ValueUnit::None && s.value()) malformed(s, "unexpected value");
    if (info.unit != ValueUnit::None && !s.value()) malformed(s, "missing value");

    Pts p{};
    std::copy(s.points().begin(), s.points().end(), p.begin());
    std::optional<Rational> value = s.value();

    if (value) {
        switch (info.unit) {
            case ValueUnit::Degrees:
                if (*value <= Rational(0) || *value >= Rational(180)) malformed(s, "angle outside (0, 180)");
                break;
            default:
                if (*value <= Rational(0)) malformed(s, "non-positive value");
                break;
        }
    }

    switch (s.predicate()) {
        case P::Collinear:
            if (!distinct({p[0], p[1], p[2]})) malformed(s, "repeated point");
            std::sort(p.begin(), p.begin() + 3);
            break;
        case P::Parallel:
        case P::Perpendicular:
        case P::EqualSegments:
        case P::SegmentRatio:
            if (p[0] == p[1] || p[2] == p[3]) malformed(s, "degenerate segment");
            sort2(p, 0);
            sort2(p, 2);
            if (range_equal(p, 0, 2, 2)) malformed(s, "identical segments");
            if (range_less(p, 2, 0, 2)) {
                swap_ranges(p, 0, 2, 2);
                if (value) value = Rational(1) / *value;
            }
            break;
        case P::EqualAngles:
            if (!distinct({p[0], p[1], p[2]}) || !distinct({p[3], p[4], p[5]})) malformed(s, "degenerate angle");
            sort_angle(p, 0);
            sort_angle(p, 3);
            if (range_equal(p, 0, 3, 3)) malformed(s, "identical angles");
            if (range_less(p, 3, 0, 3)) swap_ranges(p, 0, 3, 3);
            break;
        case P::SegmentLength:
            if (p[0] == p[1]) malformed(s, "degenerate segment");
            sort2(p, 0);
            break;
        case P::AngleMeasure:
        case P::RightAngle:
            if (!distinct({p[0], p[1], p[2]})) malformed(s, "degenerate angle");
            sort_angle(p, 0);
            break;
        case P::Midpoint:
            if (!distinct({p[0], p[1], p[2]})) malformed(s, "repeated point");
            sort2(p, 1);
            break;
        case P::OnCircle:
            if (p[0] == p[1] || p[2] == p[3]) malformed(s, "degenerate circle");
            sort2(p, 2);
            if ((p[2] == p[0] && p[3] == p[1]) || (p[2] == p[1] && p[3] == p[0])) malformed(s, "trivial radius");
            break;
        case P::CongruentTriangles:
        case P::SimilarTriangles: {
            if (!distinct({p[0], p[1], p[2]}) || !distinct({p[3], p[4], p[5]})) malformed(s, "degenerate triangle");
            if (range_equal(p, 0, 3, 3)) malformed(s, "identical triangles");
            Pts best = p;
            bool first = true;
            for (int swap = 0; swap < 2; ++swap) {
                for (const auto& perm : kTrianglePerms) {
                    Pts cand{};
                    std::size_t lhs = swap ? 3 : 0;
                    std::size_t rhs = swap ? 0 : 3;
                    for (std::size_t i = 0; i < 3; ++i) {
                        cand[i] = p[lhs + perm[i]];
                        cand[3 + i] = p[rhs + perm[i]];
                    }
                    if (first || std::lexicographical_compare(cand.begin(), cand.begin() + 6, best.begin(),
                                                              best.begin() + 6)) {
                        best = cand;
                        first = false;
                    }
                }
            }
            p = best;
            break;
        }
    }
    return Statement(s.predicate(), std::span<const PointId>(p.data(), info.point_count), value);
}

std::optional<Statement> try_canonicalize(const Statement& s) {
    try {
        return canonicalize(s);
    } catch (const MalformedStatement&) {
        return std::nullopt;
    }
}

std::vector<Statement> equivalent_forms(const Statement& s) {
    const auto& info = s.info();
    auto pts = s.points();
    std::vector<Statement> out;
    auto emit = [&](std::initializer_list<std::size_t> order, bool invert = false) {
        Pts p{};
        std::size_t i = 0;
        for (auto k : order) p[i++] = pts[k];
        auto v = s.value();
        if (invert && v) v = Rational(1) / *v;
        out.emplace_back(s.predicate(), std::span<const PointId>(p.data(), info.point_count), v);
    };
    switch (s.predicate()) {
        case P::Collinear:
            emit({0, 1, 2});
            emit({0, 2, 1});
            emit({1, 0, 2});
            emit({1, 2, 0});
            emit({2, 0, 1});
            emit({2, 1, 0});
            break;
        case P::Parallel:
        case P::Perpendicular:
        case P::EqualSegments:
        case P::SegmentRatio: {
            bool ratio = s.predicate() == P::SegmentRatio;
            emit({0, 1, 2, 3});
            emit({1, 0, 2, 3});
            emit({0, 1, 3, 2});
            emit({1, 0, 3, 2});
            emit({2, 3, 0, 1}, ratio);
            emit({3, 2, 0, 1}, ratio);
            emit({2, 3, 1, 0}, ratio);
            emit({3, 2, 1, 0}, ratio);
            break;
        }
        case P::EqualAngles:
            emit({0, 1, 2, 3, 4, 5});
            emit({2, 1, 0, 3, 4, 5});
            emit({0, 1, 2, 5, 4, 3});
            emit({2, 1, 0, 5, 4, 3});
            emit({3, 4, 5, 0, 1, 2});
            emit({5, 4, 3, 0, 1, 2});
            emit({3, 4, 5, 2, 1, 0});
            emit({5, 4, 3, 2, 1, 0});
            break;
        case P::SegmentLength:
            emit({0, 1});
            emit({1, 0});
            break;
        case P::AngleMeasure:
        case P::RightAngle:
            emit({0, 1, 2});
            emit({2, 1, 0});
            break;
        case P::Midpoint:
            emit({0, 1, 2});
            emit({0, 2, 1});
            break;
        case P::OnCircle:
            emit({0, 1, 2, 3});
            emit({0, 1, 3, 2});
            break;
        case P::CongruentTriangles:
        case P::SimilarTriangles:
            for (const auto& perm : kTrianglePerms) {
                emit({perm[0], perm[1], perm[2], 3u + perm[0], 3u + perm[1], 3u + perm[2]});
            }
            for (const auto& perm : kTrianglePerms) {
                emit({3u + perm[0], 3u + perm[1], 3u + perm[2], perm[0], perm[1], perm[2]});
            }
            break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Formal text
// ---------------------------------------------------------------------------

std::string serialize_statement(const Statement& s) {
    const auto& info = s.info();
    std::string out(info.name);
    out.push_back('(');
    std::size_t k = 0;
    for (std::size_t g = 0; g < info.group_count; ++g) {
        if (g > 0) out.push_back(';');
        for (std::size_t i = 0; i < info.groups[g]; ++i) {
            if (i > 0) out.push_back(',');
            out += s.point(k++).label();
        }
    }
    if (s.value()) {
        out.push_back(';');
        out += s.value()->str();
    }
    out.push_back(')');
    return out;
}

namespace {

std::string seg_text(PointId a, PointId b) { return a.label() + b.label(); }
std::string angle_text(PointId a, PointId b, PointId c) { return "∠" + a.label() + b.label() + c.label(); }
std::string tri_text(PointId a, PointId b, PointId c) { return "△" + a.label() + b.label() + c.label(); }

}  // namespace

std::string display_value(const Rational& v, ValueUnit unit) {
    return unit == ValueUnit::Degrees ? v.str() + "°" : v.str();
}

std::string display_quantity(const Statement& s) {
    auto p = s.points();
    switch (s.predicate()) {
        case P::SegmentLength:
            return seg_text(p[0], p[1]);
        case P::AngleMeasure:
            return angle_text(p[0], p[1], p[2]);
        case P::SegmentRatio:
            return seg_text(p[0], p[1]) + " / " + seg_text(p[2], p[3]);
        default:
            throw MalformedStatement("statement has no measured quantity");
    }
}

std::string display_statement(const Statement& s) {
    auto p = s.points();
    switch (s.predicate()) {
        case P::Collinear:
            return p[0].label() + ", " + p[1].label() + " and " + p[2].label() + " are collinear";
        case P::Parallel:
            return seg_text(p[0], p[1]) + " ∥ " + seg_text(p[2], p[3]);
        case P::Perpendicular:
            return seg_text(p[0], p[1]) + " ⊥ " + seg_text(p[2], p[3]);
        case P::EqualSegments:
            return seg_text(p[0], p[1]) + " = " + seg_text(p[2], p[3]);
        case P::EqualAngles:
            return angle_text(p[0], p[1], p[2]) + " = " + angle_text(p[3], p[4], p[5]);
        case P::SegmentLength:
        case P::AngleMeasure:
        case P::SegmentRatio:
            return display_quantity(s) + " = " + (s.value() ? display_value(*s.value(), s.info().unit) : "?");
        case P::RightAngle:
            return angle_text(p[0], p[1], p[2]) + " is a right angle";
        case P::Midpoint:
            return p[0].label() + " is the midpoint of " + seg_text(p[1], p[2]);
        case P::OnCircle:
            if (p[2] == p[1] || p[3] == p[1]) {
                PointId through = p[2] == p[1] ? p[3] : p[2];
                return p[0].label() + " lies on the circle with center " + p[1].label() + " through " + through.label();
            }
            return p[0].label() + " lies on the circle with center " + p[1].label() + " and radius " +
                   seg_text(p[2], p[3]);
        case P::CongruentTriangles:
            return tri_text(p[0], p[1], p[2]) + " ≅ " + tri_text(p[3], p[4], p[5]);
        case P::SimilarTriangles:
            return tri_text(p[0], p[1], p[2]) + " ∼ " + tri_text(p[3], p[4], p[5]);
    }
    return serialize_statement(s);
}

namespace {

class StatementParser {
public:
    StatementParser(std::string_view text, std::size_t point_limit) : text_(text), limit_(point_limit) {}

    Statement parse() {
        std::size_t name_start = pos_;
        while (pos_ < text_.size() && (std::islower(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            ++pos_;
        }
        if (pos_ == name_start) fail({"predicate name"});
        auto name = text_.substr(name_start, pos_ - name_start);
        auto pred = predicate_from_name(name);
        if (!pred) throw UnknownPredicate("unknown predicate '" + std::string(name) + "'");
        const auto& info = predicate_info(*pred);
        expect('(');

        std::vector<PointId> points;
        std::optional<Rational> value;
        for (std::size_t g = 0; g < info.group_count; ++g) {
            if (g > 0) expect(';');
            for (std::size_t i = 0; i < info.groups[g]; ++i) {
                if (i > 0) expect(',');
                points.push_back(point());
            }
        }
        if (info.unit != ValueUnit::None) {
            expect(';');
            value = rational();
        }
        expect(')');
        if (pos_ != text_.size()) fail({"end of input"});
        return canonicalize(Statement(*pred, points, value));
    }

private:
    [[noreturn]] void fail(std::vector<std::string> expected) {
        std::string what = "parse error at offset " + std::to_string(pos_) + ": expected";
        for (const auto& e : expected) what += " '" + e + "'";
        throw ParseError(pos_, std::move(expected), what);
    }

    void expect(char c) {
        if (pos_ >= text_.size() || text_[pos_] != c) fail({std::string(1, c)});
        ++pos_;
    }

    PointId point() {
        std::size_t start = pos_;
        if (pos_ >= text_.size() || text_[pos_] < 'A' || text_[pos_] > 'Z') fail({"point label"});
        ++pos_;
        if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        auto label = text_.substr(start, pos_ - start);
        auto id = PointId::from_label(label);
        if (!id || id->index() >= limit_) throw UnknownPoint("unknown point '" + std::string(label) + "'");
        return *id;
    }

    Rational rational() {
        std::size_t start = pos_;
        auto digits = [this] {
            std::size_t s = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            return pos_ > s;
        };
        if (!digits()) fail({"integer"});
        if (pos_ < text_.size() && text_[pos_] == '/') {
            ++pos_;
            if (!digits()) fail({"integer"});
        }
        auto r = Rational::parse(text_.substr(start, pos_ - start));
        if (!r) {
            pos_ = start;
            fail({"rational"});
        }
        return *r;
    }

    std::string_view text_;
    std::size_t limit_;
    std::size_t pos_ = 0;
};

}  // namespace

Statement parse_statement(std::string_view text, std::size_t point_limit) {
    return StatementParser(text, point_limit).parse();
}

// ---------------------------------------------------------------------------

std::pair<std::size_t, bool> StatementSet::insert(const Statement& s) {
    Statement c = canonicalize(s);
    auto it = index_.find(c);
    if (it != index_.end()) return {it->second, false};
    std::size_t idx = items_.size();
    items_.push_back(c);
    index_.emplace(c, idx);
    return {idx, true};
}

std::optional<std::size_t> StatementSet::index_of(const Statement& s) const {
    auto c = try_canonicalize(s);
    if (!c) return std::nullopt;
    auto it = index_.find(*c);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

bool StatementSet::contains(const Statement& s) const { return index_of(s).has_value(); }

}  // namespace geoforge
