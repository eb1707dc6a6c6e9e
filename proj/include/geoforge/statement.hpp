#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "geoforge/rational.hpp"

namespace geoforge {

// Dense per-scene point index. Labels are derived from the index
// (A..Z, then A0..Z0, A1..), so label order and index order agree.
class PointId {
public:
    static constexpr std::uint16_t kMaxIndex = 26 * 11 - 1;

    constexpr PointId() = default;
    constexpr explicit PointId(std::uint16_t index) : index_(index) {}

    constexpr std::uint16_t index() const { return index_; }
    std::string label() const;
    static std::optional<PointId> from_label(std::string_view label);

    friend constexpr auto operator<=>(PointId, PointId) = default;

private:
    std::uint16_t index_ = 0;
};

enum class Predicate : std::uint8_t {
    Collinear,
    Parallel,
    Perpendicular,
    EqualSegments,
    EqualAngles,
    SegmentLength,
    AngleMeasure,
    RightAngle,
    Midpoint,
    OnCircle,
    CongruentTriangles,
    SimilarTriangles,
    SegmentRatio,
};

inline constexpr std::size_t kPredicateCount = 13;

enum class ValueUnit : std::uint8_t { None, Length, Degrees, Ratio };

struct PredicateInfo {
    Predicate kind;
    std::string_view name;
    // Sizes of the ';'-separated point groups, in order.
    std::array<std::uint8_t, 3> groups;
    std::uint8_t group_count;
    std::uint8_t point_count;
    ValueUnit unit;
};

const PredicateInfo& predicate_info(Predicate p);
std::optional<Predicate> predicate_from_name(std::string_view name);

class StatementError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MalformedStatement : public StatementError {
public:
    using StatementError::StatementError;
};

class ParseError : public StatementError {
public:
    ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& what);
    std::size_t offset() const { return offset_; }
    const std::vector<std::string>& expected() const { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

class UnknownPredicate : public StatementError {
public:
    using StatementError::StatementError;
};

class UnknownPoint : public StatementError {
public:
    using StatementError::StatementError;
};

// An atomic geometric fact. Point groups are stored flat in predicate order;
// see predicate_info() for the grouping. Construct through make() and
// canonicalize() before comparing.
class Statement {
public:
    static constexpr std::size_t kMaxPoints = 6;
    using Points = std::array<PointId, kMaxPoints>;

    Statement() = default;
    Statement(Predicate p, std::span<const PointId> points, std::optional<Rational> value = std::nullopt);

    Predicate predicate() const { return predicate_; }
    std::span<const PointId> points() const { return {points_.data(), count_}; }
    PointId point(std::size_t i) const { return points_[i]; }
    const std::optional<Rational>& value() const { return value_; }
    const PredicateInfo& info() const { return predicate_info(predicate_); }
    bool has_value_slot() const { return info().unit != ValueUnit::None; }

    friend bool operator==(const Statement&, const Statement&) = default;
    friend std::strong_ordering operator<=>(const Statement& a, const Statement& b);

    std::size_t hash() const;

private:
    Predicate predicate_ = Predicate::Collinear;
    std::uint8_t count_ = 0;
    Points points_{};
    std::optional<Rational> value_;
};

// Convenience constructors; results are NOT canonicalized.
namespace st {
Statement collinear(PointId a, PointId b, PointId c);
Statement parallel(PointId a, PointId b, PointId c, PointId d);
Statement perpendicular(PointId a, PointId b, PointId c, PointId d);
Statement eq_seg(PointId a, PointId b, PointId c, PointId d);
Statement eq_angle(PointId a, PointId b, PointId c, PointId d, PointId e, PointId f);
Statement seg_len(PointId a, PointId b, Rational v);
Statement angle_val(PointId a, PointId b, PointId c, Rational v);
Statement right_angle(PointId a, PointId b, PointId c);
Statement midpoint(PointId m, PointId a, PointId b);
Statement on_circle(PointId p, PointId center, PointId r1, PointId r2);
Statement congruent(PointId a, PointId b, PointId c, PointId d, PointId e, PointId f);
Statement similar(PointId a, PointId b, PointId c, PointId d, PointId e, PointId f);
Statement seg_ratio(PointId a, PointId b, PointId c, PointId d, Rational v);
}  // namespace st

// Throws MalformedStatement on arity/value/distinctness violations.
Statement canonicalize(const Statement& s);
std::optional<Statement> try_canonicalize(const Statement& s);

// Every argument ordering denoting the same fact as s (s included, s first).
// SegmentRatio orderings that swap the two segments carry the inverted value.
std::vector<Statement> equivalent_forms(const Statement& s);

// Points must have index < point_limit, else UnknownPoint.
Statement parse_statement(std::string_view text, std::size_t point_limit = PointId::kMaxIndex + 1);
std::string serialize_statement(const Statement& s);

// Textbook notation: "AB = AC", "∠ABC = 40°", "M is the midpoint of AB".
std::string display_statement(const Statement& s);
// The measured quantity of a value-bearing statement: "AB", "∠ABC", "AB / CD".
std::string display_quantity(const Statement& s);
// The value with its unit: "40°", "5", "1/2".
std::string display_value(const Rational& v, ValueUnit unit);

struct StatementHash {
    std::size_t operator()(const Statement& s) const { return s.hash(); }
};

// Deduplicated canonical statements in insertion order.
class StatementSet {
public:
    // Returns (index, inserted). The statement is canonicalized first.
    std::pair<std::size_t, bool> insert(const Statement& s);
    bool contains(const Statement& s) const;
    std::optional<std::size_t> index_of(const Statement& s) const;

    const Statement& operator[](std::size_t i) const { return items_[i]; }
    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }
    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }
    const std::vector<Statement>& items() const { return items_; }

private:
    std::vector<Statement> items_;
    std::unordered_map<Statement, std::size_t, StatementHash> index_;
};

}  // namespace geoforge
