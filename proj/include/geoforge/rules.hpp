#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geoforge/geometry.hpp"
#include "geoforge/statement.hpp"

namespace geoforge {

// Point variables are lower-case letters except x, y, z, which name values.
inline constexpr std::size_t kPointVars = 26;
inline constexpr std::size_t kValueVars = 3;

struct Binding {
    std::array<std::int16_t, kPointVars> points;
    std::array<std::optional<Rational>, kValueVars> values;

    Binding() { points.fill(-1); }
    bool bound(std::uint8_t var) const { return points[var] >= 0; }
    PointId point(char var) const { return PointId(static_cast<std::uint16_t>(points[static_cast<std::size_t>(var - 'a')])); }
    const Rational& value(char var) const { return *values[static_cast<std::size_t>(var - 'x')]; }
};

struct StatementPattern {
    Predicate predicate = Predicate::Collinear;
    std::vector<std::uint8_t> vars;           // one point variable per slot
    std::optional<std::uint8_t> value_var;    // premise value variable

    // "eq_seg(a,b;a,c)", "angle_val(b,a,c;x)". Conclusions omit the value.
    static StatementPattern parse(std::string_view text);
    std::string str() const;
};

// Binds `form` (one argument ordering of a concrete fact) onto the pattern.
// Returns false and leaves `b` untouched when inconsistent.
bool bind_form(const StatementPattern& pattern, const Statement& form, Binding& b);

enum class RuleClass { Geometric, Algebraic };

struct Rule {
    std::string id;
    std::vector<StatementPattern> premises;
    StatementPattern conclusion;
    RuleClass cost_tag = RuleClass::Geometric;
    // Conclusion value for value-bearing conclusions; nullopt means "not
    // applicable" (e.g. an irrational square root).
    std::function<std::optional<Rational>(const Binding&)> value;
    // Value side condition for conclusions without a value slot.
    std::function<bool(const Binding&)> value_condition;
    // Configuration side conditions (betweenness, same side, ...).
    std::function<bool(const SceneGeometry&, const Binding&)> guard;
    std::string description;

    // Conclusion for a complete binding, canonicalized; nullopt when the rule
    // does not apply (value/guard failure, malformed or degenerate conclusion).
    std::optional<Statement> conclude(const SceneGeometry& g, const Binding& b) const;

    // Numeric verifier: the conclusion holds on g.
    bool verify(const SceneGeometry& g, const Statement& conclusion) const;
};

const std::vector<Rule>& rule_catalog();
const Rule* find_rule(std::string_view id);
std::optional<std::size_t> rule_index(std::string_view id);

// All conclusions obtainable by assigning the given premises (each used
// exactly once, in any order) to the rule's premise patterns.
std::vector<Statement> derive_all(const Rule& rule, std::span<const Statement> premises, const SceneGeometry& g);

}  // namespace geoforge
