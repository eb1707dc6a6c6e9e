#include "geoforge/translator.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <set>

#include "httplib.h"
#include "json.hpp"

namespace geoforge {

const char* const kPromptVersion = "fewshot-v1";

std::string ConnectedSolution::text() const {
    std::string out;
    for (const auto& s : steps) {
        if (!out.empty()) out += "\n";
        out += s.bridge + " " + s.step.rule_text;
    }
    if (!closing.empty()) out += (out.empty() ? "" : "\n") + closing;
    return out;
}

std::vector<std::string> number_tokens(const std::string& text) {
    static const std::regex re(R"(-?\d+(?:\.\d+)?(?:/\d+)?)");
    std::vector<std::string> out;
    for (std::sregex_iterator it(text.begin(), text.end(), re), end; it != end; ++it) {
        // digits glued to a capital letter belong to a point label (A0, B1, ...)
        auto pos = static_cast<std::size_t>(it->position());
        if (pos > 0 && std::isupper(static_cast<unsigned char>(text[pos - 1]))) continue;
        out.push_back(it->str());
    }
    return out;
}

std::vector<std::string> label_tokens(const std::string& text) {
    // Runs of capitals/digits not touching lower-case letters ("ABC", "A0B"),
    // split into single labels.
    std::vector<std::string> out;
    auto is_lower = [](char c) { return std::islower(static_cast<unsigned char>(c)) != 0; };
    std::size_t i = 0;
    while (i < text.size()) {
        if (!std::isupper(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && (std::isupper(static_cast<unsigned char>(text[j])) ||
                                   std::isdigit(static_cast<unsigned char>(text[j])))) {
            ++j;
        }
        bool word = (i > 0 && is_lower(text[i - 1])) || (j < text.size() && is_lower(text[j]));
        if (!word) {
            for (std::size_t k = i; k < j;) {
                std::size_t e = k + 1;
                while (e < j && std::isdigit(static_cast<unsigned char>(text[e]))) ++e;
                out.push_back(text.substr(k, e - k));
                k = e;
            }
        }
        i = j;
    }
    return out;
}

namespace {

std::string join_and(const std::vector<std::string>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += i + 1 == parts.size() ? " and " : ", ";
        out += parts[i];
    }
    return out;
}

// Keyed by rule id. {T} in a reason expands to the triangle named by the
// conclusion's distinct points.
struct RuleTemplate {
    std::string topic;   // what the bridge says is applied next
    std::string reason;  // clause inside the step sentence
};

const std::map<std::string, RuleTemplate>& rule_templates() {
    static const std::map<std::string, RuleTemplate> kTemplates = {
        {"midpoint_collinear", {"the definition of a midpoint", "a midpoint lies on its segment"}},
        {"midpoint_equal_segments", {"the definition of a midpoint", "a midpoint splits its segment into two equal parts"}},
        {"midpoint_ratio", {"the definition of a midpoint", "each half of a segment is half of the whole segment"}},
        {"circle_radius", {"equal radii", "all radii of a circle are equal"}},
        {"perpendicular_right_angle", {"the perpendicularity", "perpendicular segments meet at a right angle"}},
        {"perpendicular_foot_right_angle", {"the foot of the perpendicular", "the perpendicular meets the base line at a right angle"}},
        {"right_angle_measure", {"the size of a right angle", "a right angle has this measure"}},
        {"right_angle_from_measure", {"the size of a right angle", "an angle of this size is a right angle"}},
        {"isosceles_base_angles", {"the isosceles triangle property", "triangle {T} is isosceles"}},
        {"isosceles_converse", {"the converse of the isosceles triangle property", "triangle {T} has equal base angles and is therefore isosceles"}},
        {"isosceles_apex_angle", {"the angles of an isosceles triangle", "the two equal base angles together with the apex angle make a straight angle"}},
        {"equiangular_triangle", {"the angles of an equiangular triangle", "a triangle with three equal angles has each angle equal to a third of a straight angle"}},
        {"triangle_angle_sum", {"the triangle angle sum", "the angles of a triangle add up to a straight angle"}},
        {"supplementary_angles", {"supplementary angles", "angles forming a straight line are supplementary"}},
        {"vertical_angles", {"vertical angles", "vertical angles are equal"}},
        {"angle_addition", {"angle addition", "adjacent angles add up"}},
        {"angle_subtraction", {"angle subtraction", "the whole angle minus one part leaves the other part"}},
        {"bisected_angle", {"the angle bisector", "the bisector splits the angle into two equal halves"}},
        {"alternate_interior_angles", {"alternate interior angles", "alternate interior angles between parallel lines are equal"}},
        {"corresponding_angles", {"corresponding angles", "corresponding angles between parallel lines are equal"}},
        {"co_interior_angles", {"co-interior angles", "co-interior angles between parallel lines are supplementary"}},
        {"parallel_collinear", {"the parallel lines", "a parallel line stays parallel along its whole length"}},
        {"midsegment_parallel", {"the midsegment of a triangle", "the segment joining two midpoints is parallel to the third side"}},
        {"midsegment_half", {"the midsegment of a triangle", "the segment joining two midpoints is half as long as the third side"}},
        {"pythagoras_hypotenuse", {"the Pythagorean theorem", "the Pythagorean theorem gives the hypotenuse"}},
        {"pythagoras_leg", {"the Pythagorean theorem", "the Pythagorean theorem gives the missing leg"}},
        {"congruent_sss", {"a congruence test", "the triangles are congruent by side-side-side"}},
        {"congruent_sas", {"a congruence test", "the triangles are congruent by side-angle-side"}},
        {"congruent_asa", {"a congruence test", "the triangles are congruent by angle-side-angle"}},
        {"congruent_sss_shared", {"a congruence test", "with their common side the triangles are congruent by side-side-side"}},
        {"congruent_sss_shared_swap", {"a congruence test", "with their common side the triangles are congruent by side-side-side"}},
        {"congruent_sas_shared", {"a congruence test", "with their common side the triangles are congruent by side-angle-side"}},
        {"congruent_sas_shared_swap", {"a congruence test", "with their common side the triangles are congruent by side-angle-side"}},
        {"congruent_asa_shared", {"a congruence test", "with their common side the triangles are congruent by angle-side-angle"}},
        {"congruent_asa_shared_swap", {"a congruence test", "with their common side the triangles are congruent by angle-side-angle"}},
        {"congruent_sides", {"the congruent triangles", "corresponding sides of congruent triangles are equal"}},
        {"congruent_angles", {"the congruent triangles", "corresponding angles of congruent triangles are equal"}},
        {"similar_aa", {"a similarity test", "the triangles are similar by angle-angle"}},
        {"similar_ratio", {"the similar triangles", "corresponding sides of similar triangles are proportional"}},
        {"inscribed_angle", {"the inscribed angle theorem", "inscribed angles subtending the same arc are equal"}},
        {"inscribed_central_angle", {"the inscribed angle theorem", "an inscribed angle is half the central angle on the same arc"}},
        {"thales", {"the angle in a semicircle", "an angle inscribed in a semicircle is a right angle"}},
        {"seg_equal_transitivity", {"the chain of equal segments", "segments equal to the same segment are equal"}},
        {"angle_equal_transitivity", {"the chain of equal angles", "angles equal to the same angle are equal"}},
        {"seg_value_substitution", {"substitution of a known length", "equal segments have equal lengths"}},
        {"angle_value_substitution", {"substitution of a known angle", "equal angles have equal measures"}},
        {"ratio_length", {"the known ratio", "the ratio fixes the length"}},
    };
    return kTemplates;
}

std::string triangle_of(const Statement& s) {
    std::vector<PointId> pts;
    for (auto p : s.points()) {
        if (std::find(pts.begin(), pts.end(), p) == pts.end()) pts.push_back(p);
    }
    std::string out;
    for (std::size_t i = 0; i < pts.size() && i < 3; ++i) out += pts[i].label();
    return out;
}

// Rotating phrasings so consecutive bridges read less mechanically.
const char* const kSummaryLead[] = {"So far we know that ", "We now have ", "At this point, "};
const char* const kLinkLead[] = {"Next, we apply ", "Now we turn to ", "The next step uses "};
const char* const kGoalLead[] = {"which brings us closer to ", "working toward ", "on the way to "};

}  // namespace

std::string goal_phrase(const Goal& goal) {
    if (!goal.numeric) return "a proof that " + display_statement(goal.target);
    switch (goal.target.predicate()) {
        case Predicate::SegmentLength:
            return "the length of " + display_quantity(goal.target);
        case Predicate::AngleMeasure:
            return "the measure of " + display_quantity(goal.target);
        default:
            return "the ratio " + display_quantity(goal.target);
    }
}

std::string rule_sentence(const ReasoningGraph& g, const Transition& t) {
    const auto& rule = rule_catalog()[t.rule];
    std::vector<std::string> premises;
    for (auto p : t.premises) premises.push_back(display_statement(g.statement(p)));
    const auto& conclusion = g.statement(t.conclusion);
    auto it = rule_templates().find(rule.id);
    std::string reason = it != rule_templates().end() ? it->second.reason : rule.description;
    if (auto pos = reason.find("{T}"); pos != std::string::npos) reason.replace(pos, 3, triangle_of(conclusion));
    return "Since " + join_and(premises) + ", " + reason + ", so " + display_statement(conclusion) + ".";
}

std::vector<NlStep> translate_steps(const ReasoningGraph& g, const ReasoningPath& path, TranslationBackend& backend) {
    std::vector<NlStep> out;
    for (std::size_t i = 0; i < path.transitions.size(); ++i) {
        const auto& t = path.transitions[i];
        NlStep step;
        step.index = i;
        step.transition = t;
        step.statement_text = display_statement(g.statement(t.conclusion));
        std::string context;
        for (auto p : t.premises) context += serialize_statement(g.statement(p)) + " ";
        context += "=[" + rule_catalog()[t.rule].id + "]=> " + serialize_statement(g.statement(t.conclusion));
        step.rule_text = backend.rewrite(TranslationBackend::Purpose::Step, context, rule_sentence(g, t));
        out.push_back(std::move(step));
    }
    return out;
}

namespace {

std::string topic_of(const Transition& t) {
    const auto& rule = rule_catalog()[t.rule];
    auto it = rule_templates().find(rule.id);
    return it != rule_templates().end() ? it->second.topic : rule.description;
}

std::string link_for(const NlStep& step, std::size_t k, const Goal& goal) {
    return std::string(kLinkLead[k % 3]) + topic_of(step.transition) + ", " + kGoalLead[k % 3] + goal_phrase(goal) + ".";
}

std::string bridge_for(const ReasoningGraph& g, const std::vector<NlStep>& steps, std::size_t k, const Goal& goal) {
    const auto& t = steps[k].transition;
    std::string summary;
    if (k == 0) {
        std::vector<std::string> given;
        for (auto p : t.premises) {
            if (g.is_initial(p)) given.push_back(display_statement(g.statement(p)));
        }
        summary = given.empty() ? "We start from the given facts." : "We are given that " + join_and(given) + ".";
    } else {
        summary = std::string(kSummaryLead[k % 3]) + steps[k - 1].statement_text + ".";
    }
    return summary + " " + link_for(steps[k], k, goal);
}

std::string closing_for(const Goal& goal) {
    if (goal.numeric && goal.target.value()) {
        std::string v = display_value(*goal.target.value(), goal.target.info().unit);
        return "Therefore " + display_quantity(goal.target) + " = " + v + ". The answer is " + v + ".";
    }
    return "Therefore " + display_statement(goal.target) + ", as required.";
}

std::string scaffold(const ConnectedSolution& sol) {
    std::string out;
    for (const auto& s : sol.steps) out += s.step.rule_text + "\n";
    return out;
}

}  // namespace

ConnectedSolution connect_thinking(const ReasoningGraph& g, const std::vector<NlStep>& steps, const Goal& goal,
                                   TranslationBackend& backend) {
    if (steps.empty()) throw std::invalid_argument("connect_thinking needs at least one step");
    ConnectedSolution sol;
    for (std::size_t k = 0; k < steps.size(); ++k) {
        sol.steps.push_back({std::string(), steps[k]});
    }
    std::string context = scaffold(sol);
    for (std::size_t k = 0; k < steps.size(); ++k) {
        sol.steps[k].bridge = backend.rewrite(TranslationBackend::Purpose::Bridge, context, bridge_for(g, steps, k, goal));
    }
    sol.closing = backend.rewrite(TranslationBackend::Purpose::Closing, context, closing_for(goal));
    return sol;
}

ConnectedSolution narrate_traceback(const ReasoningGraph& g, const TracebackRecord& rec, const Goal& goal,
                                    TranslationBackend& backend) {
    auto wrong_steps = translate_steps(g, rec.wrong_branch, backend);
    ReasoningPath rest = rec.correct_path;
    rest.transitions.erase(std::remove_if(rest.transitions.begin(), rest.transitions.end(),
                                          [&](const Transition& t) {
                                              const auto& w = rec.wrong_branch.transitions;
                                              return std::find(w.begin(), w.end(), t) != w.end();
                                          }),
                           rest.transitions.end());
    auto rest_steps = translate_steps(g, rest, backend);

    ConnectedSolution sol;
    std::vector<NlStep> all = wrong_steps;
    all.insert(all.end(), rest_steps.begin(), rest_steps.end());
    for (std::size_t k = 0; k < all.size(); ++k) {
        all[k].index = k;
        sol.steps.push_back({std::string(), all[k]});
    }
    std::string context = scaffold(sol);
    for (std::size_t k = 0; k < all.size(); ++k) {
        std::string draft = bridge_for(g, all, k, goal);
        if (k == wrong_steps.size()) {
            // the pivot replaces the summary of the abandoned step
            draft = "However, " + display_statement(g.statement(rec.erroneous_target)) + " does not lead to " +
                    goal_phrase(goal) + ". Re-examining the goal, we go back to " +
                    display_statement(g.statement(rec.backtrack_point.conclusion)) +
                    " and continue along a different route. " + link_for(all[k], k, goal);
        }
        sol.steps[k].bridge = backend.rewrite(TranslationBackend::Purpose::Bridge, context, draft);
    }
    sol.closing = backend.rewrite(TranslationBackend::Purpose::Closing, context, closing_for(goal));
    return sol;
}

// ---------------------------------------------------------------------------

namespace {

const char* const kSystemPrompt =
    "You rewrite steps of a geometry solution into fluent English. Keep every point name, every number and "
    "every symbol exactly as given. Do not add new numbers, facts or steps. Reply with the rewritten text only.\n"
    "Example input: Since AB = AC, triangle ABC is isosceles, so ∠ABC = ∠ACB.\n"
    "Example output: Because AB equals AC, triangle ABC is isosceles, and therefore ∠ABC = ∠ACB.\n"
    "Example input: Since ∠ABC = 90°, AB = 3 and BC = 4, the Pythagorean theorem gives the hypotenuse, so AC = 5.\n"
    "Example output: With ∠ABC = 90°, AB = 3 and BC = 4, the Pythagorean theorem gives AC = 5.";

const char* purpose_name(TranslationBackend::Purpose p) {
    switch (p) {
        case TranslationBackend::Purpose::Step:
            return "step";
        case TranslationBackend::Purpose::Bridge:
            return "bridge";
        case TranslationBackend::Purpose::Closing:
            return "closing";
    }
    return "step";
}

bool faithful(const std::string& draft, const std::string& reply) {
    auto dn = number_tokens(draft);
    auto rn = number_tokens(reply);
    std::set<std::string> dset(dn.begin(), dn.end()), rset(rn.begin(), rn.end());
    if (dset != rset) return false;
    auto dl = label_tokens(draft);
    auto rl = label_tokens(reply);
    std::set<std::string> rlset(rl.begin(), rl.end());
    for (const auto& l : dl) {
        if (!rlset.count(l)) return false;
    }
    return true;
}

}  // namespace

ExternalBackend::ExternalBackend(ExternalBackendConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) throw std::invalid_argument("external backend needs an endpoint");
}

std::string ExternalBackend::rewrite(Purpose purpose, const std::string& context, const std::string& draft) {
    static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(config_.endpoint, m, url_re)) throw BackendError("bad endpoint URL: " + config_.endpoint);
    std::string base = m[1].str();
    std::string path = m[2].matched ? m[2].str() : "/";

    nlohmann::json body = {
        {"model", config_.model},
        {"temperature", 0},
        {"messages",
         {{{"role", "system"}, {"content", kSystemPrompt}},
          {{"role", "user"},
           {"content", std::string("Kind: ") + purpose_name(purpose) + "\nContext:\n" + context + "\nRewrite:\n" + draft}}}},
    };
    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
        httplib::Client client(base);
        client.set_connection_timeout(config_.timeout);
        client.set_read_timeout(config_.timeout);
        client.set_write_timeout(config_.timeout);
        httplib::Headers headers;
        if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
        auto res = client.Post(path, headers, body.dump(), "application/json");
        if (!res) {
            last_error = "request failed: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP status " + std::to_string(res->status);
            continue;
        }
        try {
            auto reply = nlohmann::json::parse(res->body);
            auto text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
            while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
            if (text.empty() || !faithful(draft, text)) {
                last_error = "reply does not preserve the labels and values of the draft";
                continue;
            }
            return text;
        } catch (const nlohmann::json::exception& e) {
            last_error = std::string("malformed reply: ") + e.what();
        }
    }
    throw BackendError(last_error);
}

}  // namespace geoforge
