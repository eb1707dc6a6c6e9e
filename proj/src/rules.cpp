#include "geoforge/rules.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

namespace geoforge {

StatementPattern StatementPattern::parse(std::string_view text) {
    auto open = text.find('(');
    if (open == std::string_view::npos || text.back() != ')') throw std::invalid_argument("bad pattern");
    auto pred = predicate_from_name(text.substr(0, open));
    if (!pred) throw std::invalid_argument("bad pattern predicate: " + std::string(text));
    StatementPattern p;
    p.predicate = *pred;
    const auto& info = predicate_info(*pred);
    std::vector<char> tokens;
    for (char c : text.substr(open + 1, text.size() - open - 2)) {
        if (std::islower(static_cast<unsigned char>(c))) tokens.push_back(c);
    }
    if (tokens.size() == info.point_count + 1u && info.unit != ValueUnit::None) {
        char v = tokens.back();
        if (v < 'x' || v > 'z') throw std::invalid_argument("bad value variable in " + std::string(text));
        p.value_var = static_cast<std::uint8_t>(v - 'x');
        tokens.pop_back();
    }
    if (tokens.size() != info.point_count) throw std::invalid_argument("bad pattern arity: " + std::string(text));
    for (char c : tokens) {
        if (c >= 'x') throw std::invalid_argument("value variable in point slot: " + std::string(text));
        p.vars.push_back(static_cast<std::uint8_t>(c - 'a'));
    }
    return p;
}

std::string StatementPattern::str() const {
    const auto& info = predicate_info(predicate);
    std::string out(info.name);
    out.push_back('(');
    std::size_t k = 0;
    for (std::size_t g = 0; g < info.group_count; ++g) {
        if (g > 0) out.push_back(';');
        for (std::size_t i = 0; i < info.groups[g]; ++i) {
            if (i > 0) out.push_back(',');
            out.push_back(static_cast<char>('a' + vars[k++]));
        }
    }
    if (value_var) {
        out.push_back(';');
        out.push_back(static_cast<char>('x' + *value_var));
    }
    out.push_back(')');
    return out;
}

bool bind_form(const StatementPattern& pattern, const Statement& form, Binding& b) {
    if (form.predicate() != pattern.predicate) return false;
    Binding trial = b;
    auto pts = form.points();
    for (std::size_t i = 0; i < pattern.vars.size(); ++i) {
        auto var = pattern.vars[i];
        auto idx = static_cast<std::int16_t>(pts[i].index());
        if (trial.points[var] < 0) {
            trial.points[var] = idx;
        } else if (trial.points[var] != idx) {
            return false;
        }
    }
    if (pattern.value_var) {
        auto& slot = trial.values[*pattern.value_var];
        if (!form.value()) return false;
        if (slot && *slot != *form.value()) return false;
        slot = form.value();
    }
    b = trial;
    return true;
}

std::optional<Statement> Rule::conclude(const SceneGeometry& g, const Binding& b) const {
    std::array<PointId, Statement::kMaxPoints> pts{};
    for (std::size_t i = 0; i < conclusion.vars.size(); ++i) {
        auto v = b.points[conclusion.vars[i]];
        if (v < 0) return std::nullopt;
        pts[i] = PointId(static_cast<std::uint16_t>(v));
    }
    std::optional<Rational> val;
    if (value) {
        try {
            val = value(b);
        } catch (const std::exception&) {
            return std::nullopt;  // overflow / division by zero
        }
        if (!val) return std::nullopt;
    }
    if (value_condition && !value_condition(b)) return std::nullopt;
    auto stmt = try_canonicalize(Statement(conclusion.predicate,
                                           std::span<const PointId>(pts.data(), conclusion.vars.size()), val));
    if (!stmt) return std::nullopt;
    for (auto p : stmt->points()) {
        if (p.index() >= g.size()) return std::nullopt;
    }
    if (guard && !guard(g, b)) return std::nullopt;
    if (!is_nondegenerate(g, *stmt)) return std::nullopt;
    return stmt;
}

bool Rule::verify(const SceneGeometry& g, const Statement& c) const { return check_statement(g, c).holds; }

namespace {

Coord at(const SceneGeometry& g, const Binding& b, char v) { return g.at(b.point(v)); }

bool between(const SceneGeometry& g, const Binding& b, char mid, char p, char q) {
    Coord m = at(g, b, mid);
    Coord a = at(g, b, p);
    Coord c = at(g, b, q);
    return orientation(a, m, c, 1e-9) == 0 && strictly_between(m, a, c);
}

bool off_line(const SceneGeometry& g, const Binding& b, char p, char l1, char l2) {
    return orientation(at(g, b, l1), at(g, b, l2), at(g, b, p), 1e-7) != 0;
}

bool noncollinear(const SceneGeometry& g, const Binding& b, char p, char q, char r) { return off_line(g, b, p, q, r); }

// Ray o->mid lies strictly inside angle p-o-q.
bool ray_inside(const SceneGeometry& g, const Binding& b, char o, char p, char mid, char q) {
    Coord O = at(g, b, o);
    int s1 = orientation(O, at(g, b, p), at(g, b, mid), 1e-9);
    int s2 = orientation(O, at(g, b, mid), at(g, b, q), 1e-9);
    int s3 = orientation(O, at(g, b, p), at(g, b, q), 1e-9);
    return s1 != 0 && s1 == s2 && s1 == s3;
}

Rule make(std::string id, std::initializer_list<std::string_view> premises, std::string_view conclusion,
          RuleClass tag, std::string description) {
    Rule r;
    r.id = std::move(id);
    for (auto p : premises) r.premises.push_back(StatementPattern::parse(p));
    r.conclusion = StatementPattern::parse(conclusion);
    r.cost_tag = tag;
    r.description = std::move(description);
    return r;
}

constexpr auto G = RuleClass::Geometric;
constexpr auto A = RuleClass::Algebraic;

std::vector<Rule> build_rules() {
    std::vector<Rule> rules;
    auto add = [&rules](Rule r) -> Rule& {
        rules.push_back(std::move(r));
        return rules.back();
    };

    // Definitions unfolded from construction statements.
    add(make("midpoint_collinear", {"midpoint(m;a,b)"}, "collinear(a,m,b)", G, "a midpoint lies on its segment"));
    add(make("midpoint_equal_segments", {"midpoint(m;a,b)"}, "eq_seg(a,m;m,b)", G,
             "a midpoint splits its segment into equal halves"));
    add(make("midpoint_ratio", {"midpoint(m;a,b)"}, "seg_ratio(a,m;a,b)", G, "half segment")).value =
        [](const Binding&) { return Rational(1, 2); };
    add(make("circle_radius", {"on_circle(p;o;r,s)"}, "eq_seg(o,p;r,s)", G, "radii of a circle are equal"));

    // Perpendicularity and right angles.
    add(make("perpendicular_right_angle", {"perp(a,b;b,c)"}, "right_angle(a,b,c)", G,
             "perpendicular segments meeting at a point form a right angle"));
    add(make("perpendicular_foot_right_angle", {"perp(a,d;b,c)", "collinear(b,d,c)"}, "right_angle(a,d,b)", G,
             "a perpendicular foot forms right angles with the base line"));
    add(make("right_angle_measure", {"right_angle(a,b,c)"}, "angle_val(a,b,c)", G, "a right angle measures 90"))
        .value = [](const Binding&) { return Rational(90); };
    add(make("right_angle_from_measure", {"angle_val(a,b,c;x)"}, "right_angle(a,b,c)", G,
             "an angle of 90 is a right angle"))
        .value_condition = [](const Binding& b) { return b.value('x') == Rational(90); };

    // Isosceles triangles.
    add(make("isosceles_base_angles", {"eq_seg(a,b;a,c)"}, "eq_angle(a,b,c;a,c,b)", G,
             "base angles of an isosceles triangle are equal"));
    add(make("isosceles_converse", {"eq_angle(a,b,c;a,c,b)"}, "eq_seg(a,b;a,c)", G,
             "equal base angles give equal legs"));
    add(make("isosceles_apex_angle", {"angle_val(b,a,c;x)", "eq_angle(a,b,c;a,c,b)"}, "angle_val(a,b,c)", A,
             "base angle from apex angle"))
        .value = [](const Binding& b) -> std::optional<Rational> { return (Rational(180) - b.value('x')) / Rational(2); };
    add(make("equiangular_triangle", {"eq_angle(b,a,c;a,b,c)", "eq_angle(a,b,c;a,c,b)"}, "angle_val(b,a,c)", A,
             "a triangle with three equal angles has angles of 60"))
        .value = [](const Binding&) { return Rational(60); };

    // Angle arithmetic.
    add(make("triangle_angle_sum", {"angle_val(b,a,c;x)", "angle_val(a,b,c;y)"}, "angle_val(a,c,b)", A,
             "angles of a triangle sum to 180"))
        .value = [](const Binding& b) -> std::optional<Rational> { return Rational(180) - b.value('x') - b.value('y'); };
    {
        auto& r = add(make("supplementary_angles", {"collinear(a,o,c)", "angle_val(a,o,b;x)"}, "angle_val(c,o,b)", A,
                           "angles on a straight line sum to 180"));
        r.value = [](const Binding& b) -> std::optional<Rational> { return Rational(180) - b.value('x'); };
        r.guard = [](const SceneGeometry& g, const Binding& b) { return between(g, b, 'o', 'a', 'c'); };
    }
    {
        auto& r = add(make("vertical_angles", {"collinear(a,o,c)", "collinear(b,o,d)"}, "eq_angle(a,o,b;c,o,d)", G,
                           "vertical angles are equal"));
        r.guard = [](const SceneGeometry& g, const Binding& b) {
            return between(g, b, 'o', 'a', 'c') && between(g, b, 'o', 'b', 'd') && off_line(g, b, 'b', 'a', 'c');
        };
    }
    {
        auto& r = add(make("angle_addition", {"angle_val(a,o,b;x)", "angle_val(b,o,c;y)"}, "angle_val(a,o,c)", A,
                           "adjacent angles add"));
        r.value = [](const Binding& b) -> std::optional<Rational> { return b.value('x') + b.value('y'); };
        r.guard = [](const SceneGeometry& g, const Binding& b) { return ray_inside(g, b, 'o', 'a', 'b', 'c'); };
    }
    {
        auto& r = add(make("angle_subtraction", {"angle_val(a,o,c;x)", "angle_val(a,o,b;y)"}, "angle_val(b,o,c)", A,
                           "an angle minus an adjacent part"));
        r.value = [](const Binding& b) -> std::optional<Rational> { return b.value('x') - b.value('y'); };
        r.guard = [](const SceneGeometry& g, const Binding& b) { return ray_inside(g, b, 'o', 'a', 'b', 'c'); };
    }
    {
        auto& r = add(make("bisected_angle", {"eq_angle(a,o,b;b,o,c)", "angle_val(a,o,c;x)"}, "angle_val(a,o,b)", A,
                           "a bisector halves the angle"));
        r.value = [](const Binding& b) -> std::optional<Rational> { return b.value('x') / Rational(2); };
        r.guard = [](const SceneGeometry& g, const Binding& b) { return ray_inside(g, b, 'o', 'a', 'b', 'c'); };
    }

    // Parallel lines.
    {
        auto& r = add(make("alternate_interior_angles", {"parallel(a,b;c,d)"}, "eq_angle(a,b,c;b,c,d)", G,
                           "alternate interior angles are equal"));
        r.guard = [](const SceneGeometry& g, const Binding& b) {
            return off_line(g, b, 'b', 'c', 'd') && opposite_sides(at(g, b, 'a'), at(g, b, 'd'), at(g, b, 'b'), at(g, b, 'c'));
        };
    }
    {
        auto& r = add(make("corresponding_angles", {"parallel(a,b;c,d)", "collinear(e,b,c)"}, "eq_angle(e,b,a;b,c,d)", G,
                           "corresponding angles are equal"));
        r.guard = [](const SceneGeometry& g, const Binding& b) {
            return off_line(g, b, 'b', 'c', 'd') && between(g, b, 'b', 'e', 'c') &&
                   same_side(at(g, b, 'a'), at(g, b, 'd'), at(g, b, 'b'), at(g, b, 'c'));
        };
    }
    {
        auto& r = add(make("co_interior_angles", {"parallel(a,b;d,c)", "angle_val(b,a,d;x)"}, "angle_val(a,d,c)", A,
                           "co-interior angles sum to 180"));
        r.value = [](const Binding& b) -> std::optional<Rational> { return Rational(180) - b.value('x'); };
        r.guard = [](const SceneGeometry& g, const Binding& b) {
            return off_line(g, b, 'a', 'd', 'c') && same_side(at(g, b, 'b'), at(g, b, 'c'), at(g, b, 'a'), at(g, b, 'd'));
        };
    }
    add(make("parallel_collinear", {"parallel(a,b;c,d)", "collinear(a,b,e)"}, "parallel(a,e;c,d)", G,
             "a parallel extends along its line"));
    {
        auto& r = add(make("midsegment_parallel", {"midpoint(m;a,b)", "midpoint(n;a,c)"}, "parallel(m,n;b,c)", G,
                           "a midsegment is parallel to the third side"));
        r.guard = [](const SceneGeometry& g, const Binding& b) { return noncollinear(g, b, 'a', 'b', 'c'); };
    }
    {
        auto& r = add(make("midsegment_half", {"midpoint(m;a,b)", "midpoint(n;a,c)"}, "seg_ratio(m,n;b,c)", G,
                           "a midsegment is half the third side"));
        r.value = [](const Binding&) { return Rational(1, 2); };
        r.guard = [](const SceneGeometry& g, const Binding& b) { return noncollinear(g, b, 'a', 'b', 'c'); };
    }

    // Pythagorean theorem.
    add(make("pythagoras_hypotenuse", {"right_angle(a,b,c)", "seg_len(a,b;x)", "seg_len(b,c;y)"}, "seg_len(a,c)", A,
             "Pythagorean theorem"))
        .value = [](const Binding& b) { return (b.value('x') * b.value('x') + b.value('y') * b.value('y')).sqrt(); };
    add(make("pythagoras_leg", {"right_angle(a,b,c)", "seg_len(a,b;x)", "seg_len(a,c;y)"}, "seg_len(b,c)", A,
             "Pythagorean theorem for a leg"))
        .value = [](const Binding& b) -> std::optional<Rational> {
        Rational d = b.value('y') * b.value('y') - b.value('x') * b.value('x');
        if (d <= Rational(0)) return std::nullopt;
        return d.sqrt();
    };

    // Congruence.
    add(make("congruent_sss", {"eq_seg(a,b;d,e)", "eq_seg(b,c;e,f)", "eq_seg(a,c;d,f)"}, "congruent(a,b,c;d,e,f)", G,
             "SSS congruence"));
    add(make("congruent_sas", {"eq_seg(a,b;d,e)", "eq_angle(a,b,c;d,e,f)", "eq_seg(b,c;e,f)"},
             "congruent(a,b,c;d,e,f)", G, "SAS congruence"));
    add(make("congruent_asa", {"eq_angle(b,a,c;e,d,f)", "eq_seg(a,b;d,e)", "eq_angle(a,b,c;d,e,f)"},
             "congruent(a,b,c;d,e,f)", G, "ASA congruence"));
    add(make("congruent_sss_shared", {"eq_seg(a,c;a,f)", "eq_seg(b,c;b,f)"}, "congruent(a,b,c;a,b,f)", G,
             "SSS congruence with a shared side"));
    add(make("congruent_sss_shared_swap", {"eq_seg(a,c;b,f)", "eq_seg(b,c;a,f)"}, "congruent(a,b,c;b,a,f)", G,
             "SSS congruence with a shared side"));
    add(make("congruent_sas_shared", {"eq_angle(b,a,c;b,a,f)", "eq_seg(a,c;a,f)"}, "congruent(a,b,c;a,b,f)", G,
             "SAS congruence with a shared side"));
    add(make("congruent_sas_shared_swap", {"eq_angle(a,b,c;b,a,f)", "eq_seg(b,c;a,f)"}, "congruent(a,b,c;b,a,f)", G,
             "SAS congruence with a shared side"));
    add(make("congruent_asa_shared", {"eq_angle(b,a,c;b,a,f)", "eq_angle(a,b,c;a,b,f)"}, "congruent(a,b,c;a,b,f)", G,
             "ASA congruence with a shared side"));
    add(make("congruent_asa_shared_swap", {"eq_angle(b,a,c;a,b,f)", "eq_angle(a,b,c;b,a,f)"},
             "congruent(a,b,c;b,a,f)", G, "ASA congruence with a shared side"));
    add(make("congruent_sides", {"congruent(a,b,c;d,e,f)"}, "eq_seg(a,b;d,e)", G,
             "corresponding sides of congruent triangles are equal"));
    add(make("congruent_angles", {"congruent(a,b,c;d,e,f)"}, "eq_angle(a,b,c;d,e,f)", G,
             "corresponding angles of congruent triangles are equal"));

    // Similarity.
    add(make("similar_aa", {"eq_angle(b,a,c;e,d,f)", "eq_angle(a,b,c;d,e,f)"}, "similar(a,b,c;d,e,f)", G,
             "AA similarity"));
    add(make("similar_ratio", {"similar(a,b,c;d,e,f)", "seg_len(a,b;x)", "seg_len(d,e;y)"}, "seg_ratio(b,c;e,f)", A,
             "similar triangles have proportional sides"))
        .value = [](const Binding& b) -> std::optional<Rational> { return b.value('x') / b.value('y'); };

    // Circles.
    {
        auto& r = add(make("inscribed_angle", {"eq_seg(o,a;o,b)", "eq_seg(o,a;o,c)", "eq_seg(o,a;o,d)"},
                           "eq_angle(a,c,b;a,d,b)", G, "inscribed angles on the same arc are equal"));
        r.guard = [](const SceneGeometry& g, const Binding& b) {
            return same_side(at(g, b, 'c'), at(g, b, 'd'), at(g, b, 'a'), at(g, b, 'b'));
        };
    }
    {
        auto& r = add(make("inscribed_central_angle", {"eq_seg(o,a;o,b)", "eq_seg(o,a;o,c)", "angle_val(a,o,b;x)"},
                           "angle_val(a,c,b)", A, "an inscribed angle is half the central angle"));
        r.value = [](const Binding& b) -> std::optional<Rational> { return b.value('x') / Rational(2); };
        r.guard = [](const SceneGeometry& g, const Binding& b) {
            return same_side(at(g, b, 'c'), at(g, b, 'o'), at(g, b, 'a'), at(g, b, 'b'));
        };
    }
    add(make("thales", {"midpoint(o;a,b)", "eq_seg(o,a;o,c)"}, "right_angle(a,c,b)", G,
             "an angle in a semicircle is a right angle"));

    // Equalities and substitution.
    add(make("seg_equal_transitivity", {"eq_seg(a,b;c,d)", "eq_seg(c,d;e,f)"}, "eq_seg(a,b;e,f)", A,
             "equality of segments is transitive"));
    add(make("angle_equal_transitivity", {"eq_angle(a,b,c;d,e,f)", "eq_angle(d,e,f;g,h,i)"}, "eq_angle(a,b,c;g,h,i)",
             A, "equality of angles is transitive"));
    add(make("seg_value_substitution", {"eq_seg(a,b;c,d)", "seg_len(a,b;x)"}, "seg_len(c,d)", A,
             "equal segments have equal lengths"))
        .value = [](const Binding& b) -> std::optional<Rational> { return b.value('x'); };
    add(make("angle_value_substitution", {"eq_angle(a,b,c;d,e,f)", "angle_val(a,b,c;x)"}, "angle_val(d,e,f)", A,
             "equal angles have equal measures"))
        .value = [](const Binding& b) -> std::optional<Rational> { return b.value('x'); };
    add(make("ratio_length", {"seg_ratio(a,b;c,d;x)", "seg_len(c,d;y)"}, "seg_len(a,b)", A,
             "a length from a ratio"))
        .value = [](const Binding& b) -> std::optional<Rational> { return b.value('x') * b.value('y'); };

    return rules;
}

}  // namespace

const std::vector<Rule>& rule_catalog() {
    static const std::vector<Rule> kRules = build_rules();
    return kRules;
}

std::optional<std::size_t> rule_index(std::string_view id) {
    const auto& rules = rule_catalog();
    for (std::size_t i = 0; i < rules.size(); ++i) {
        if (rules[i].id == id) return i;
    }
    return std::nullopt;
}

const Rule* find_rule(std::string_view id) {
    auto i = rule_index(id);
    return i ? &rule_catalog()[*i] : nullptr;
}

std::vector<Statement> derive_all(const Rule& rule, std::span<const Statement> premises, const SceneGeometry& g) {
    std::vector<Statement> out;
    if (premises.size() != rule.premises.size()) return out;
    std::vector<std::size_t> order(premises.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::vector<Statement>> forms;
    for (const auto& p : premises) forms.push_back(equivalent_forms(p));

    std::function<void(std::size_t, const Binding&)> go = [&](std::size_t k, const Binding& b) {
        if (k == order.size()) {
            if (auto c = rule.conclude(g, b)) {
                if (std::find(out.begin(), out.end(), *c) == out.end()) out.push_back(*c);
            }
            return;
        }
        for (const auto& f : forms[order[k]]) {
            Binding next = b;
            if (bind_form(rule.premises[k], f, next)) go(k + 1, next);
        }
    };
    do {
        go(0, Binding{});
    } while (std::next_permutation(order.begin(), order.end()));
    return out;
}

}  // namespace geoforge
