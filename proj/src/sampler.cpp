#include "geoforge/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "geoforge/rng.hpp"

namespace geoforge {

ReasoningPath make_path(const ReasoningGraph& g, StatementId target, std::vector<Transition> transitions) {
    ReasoningPath p;
    p.target = target;
    std::sort(transitions.begin(), transitions.end(),
              [](const Transition& a, const Transition& b) { return a.conclusion < b.conclusion; });
    p.transitions = std::move(transitions);
    std::set<StatementId> used;
    for (const auto& t : p.transitions) {
        for (auto s : t.premises) {
            if (g.is_initial(s)) used.insert(s);
        }
    }
    p.used_premises.assign(used.begin(), used.end());
    p.premise_ratio = g.initial_count() == 0 ? 0.0
                                             : static_cast<double>(used.size()) / static_cast<double>(g.initial_count());
    return p;
}

std::optional<RejectReason> filter_path(const ReasoningPath& p, const Thresholds& t) {
    if (p.length() < t.min_length) return RejectReason::Length;
    if (p.premise_ratio < t.min_ratio) return RejectReason::Ratio;
    return std::nullopt;
}

namespace {

void require_derived(const ReasoningGraph& g, StatementId target) {
    if (target >= g.size()) throw UnknownStatement("unknown statement id " + std::to_string(target));
    if (g.is_initial(target)) throw TargetIsInitial("target is an initial statement");
}

// Incoming transitions of s ordered by (rule id, premise ids).
std::vector<std::size_t> sorted_options(const ReasoningGraph& g, StatementId s) {
    std::vector<std::size_t> opts = g.incoming(s);
    const auto& rules = rule_catalog();
    std::sort(opts.begin(), opts.end(), [&](std::size_t a, std::size_t b) {
        const auto& ta = g.transitions()[a];
        const auto& tb = g.transitions()[b];
        const auto& ra = rules[ta.rule].id;
        const auto& rb = rules[tb.rule].id;
        if (ra != rb) return ra < rb;
        return ta.premises < tb.premises;
    });
    return opts;
}

// Exhaustive DFS over one-option-per-statement assignments of everything the
// target needs. Unresolved statements are expanded highest id first; since
// premises precede conclusions, a statement is never reached again after its
// option was chosen, so each assignment is visited once.
class Explorer {
public:
    Explorer(const ReasoningGraph& g, StatementId target, const Thresholds& t, std::size_t max_paths)
        : g_(g), target_(target), thresholds_(t), max_paths_(max_paths), options_(g.size()), have_options_(g.size()) {}

    std::vector<ReasoningPath> run() {
        std::set<StatementId> open{target_};
        dfs(open);
        return std::move(found_);
    }

private:
    const std::vector<std::size_t>& options(StatementId s) {
        if (!have_options_[s]) {
            options_[s] = sorted_options(g_, s);
            have_options_[s] = true;
        }
        return options_[s];
    }

    bool done() const { return found_.size() >= max_paths_ || visited_ >= kMaxExploredAssignments; }

    void dfs(std::set<StatementId>& open) {
        if (done()) return;
        if (open.empty()) {
            ++visited_;
            std::vector<Transition> ts;
            for (auto idx : chosen_) ts.push_back(g_.transitions()[idx]);
            auto path = make_path(g_, target_, std::move(ts));
            if (!filter_path(path, thresholds_)) found_.push_back(std::move(path));
            return;
        }
        auto it = std::prev(open.end());
        StatementId s = *it;
        open.erase(it);
        for (auto opt : options(s)) {
            std::vector<StatementId> added;
            for (auto p : g_.transitions()[opt].premises) {
                if (!g_.is_initial(p) && open.insert(p).second) added.push_back(p);
            }
            chosen_.push_back(opt);
            dfs(open);
            chosen_.pop_back();
            for (auto p : added) open.erase(p);
            if (done()) break;
        }
        open.insert(s);
    }

    const ReasoningGraph& g_;
    StatementId target_;
    Thresholds thresholds_;
    std::size_t max_paths_;
    std::vector<std::vector<std::size_t>> options_;
    std::vector<bool> have_options_;
    std::vector<std::size_t> chosen_;
    std::vector<ReasoningPath> found_;
    std::size_t visited_ = 0;
};

}  // namespace

std::variant<ReasoningPath, Rejected> geo_explore(const ReasoningGraph& g, StatementId target, const Thresholds& t) {
    require_derived(g, target);
    if (g.mode() != ReasonMode::Single) throw WrongGraphMode("geo_explore needs a single-mode graph");
    std::vector<Transition> ts;
    std::vector<bool> seen(g.size(), false);
    std::vector<StatementId> work{target};
    seen[target] = true;
    while (!work.empty()) {
        auto s = work.back();
        work.pop_back();
        const auto& in = g.incoming(s);
        if (in.empty()) continue;  // initial
        const auto& tr = g.transitions()[in.front()];
        ts.push_back(tr);
        for (auto p : tr.premises) {
            if (!seen[p]) {
                seen[p] = true;
                work.push_back(p);
            }
        }
    }
    auto path = make_path(g, target, std::move(ts));
    if (auto why = filter_path(path, t)) return Rejected{*why, std::move(path)};
    return path;
}

std::vector<ReasoningPath> geo_explore_m(const ReasoningGraph& g, StatementId target, const Thresholds& t,
                                         std::size_t max_paths) {
    require_derived(g, target);
    if (max_paths == 0) throw std::invalid_argument("max_paths must be positive");
    return Explorer(g, target, t, max_paths).run();
}

double path_overlap(const ReasoningPath& wrong, const ReasoningPath& correct) {
    if (wrong.transitions.empty()) return 0.0;
    std::size_t shared = 0;
    for (const auto& t : wrong.transitions) {
        if (std::find(correct.transitions.begin(), correct.transitions.end(), t) != correct.transitions.end()) ++shared;
    }
    return static_cast<double>(shared) / static_cast<double>(wrong.transitions.size());
}

std::vector<StatementId> traceback_candidates(const ReasoningGraph& g, StatementId target) {
    auto upstream = upstream_dependencies(g, target);
    std::vector<StatementId> out;
    for (StatementId s = g.initial_count(); s < g.size(); ++s) {
        if (std::binary_search(upstream.begin(), upstream.end(), s)) continue;
        auto up = upstream_dependencies(g, s);
        if (std::binary_search(up.begin(), up.end(), target)) continue;
        out.push_back(s);
    }
    return out;
}

std::optional<TracebackRecord> geo_explore_t(const ReasoningGraph& g, StatementId target, const Thresholds& t,
                                             double tau_p, std::uint64_t rng_seed, std::size_t max_paths) {
    require_derived(g, target);
    if (g.mode() != ReasonMode::Multi) throw WrongGraphMode("geo_explore_t needs a multi-mode graph");
    auto correct = geo_explore_m(g, target, t, max_paths);
    if (correct.empty()) return std::nullopt;
    auto candidates = traceback_candidates(g, target);
    if (candidates.empty()) throw NoEligibleErroneousStatement("every derived statement is upstream of the target");

    Rng rng(rng_seed);
    for (int attempt = 0; attempt < kTracebackRetries && !candidates.empty(); ++attempt) {
        std::size_t pick = rng.index(candidates.size());
        StatementId s_e = candidates[pick];
        candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pick));
        for (const auto& wrong : geo_explore_m(g, s_e, Thresholds::off(), max_paths)) {
            for (const auto& right : correct) {
                double ov = path_overlap(wrong, right);
                if (ov < tau_p || ov == 0.0) continue;
                TracebackRecord rec;
                rec.erroneous_target = s_e;
                rec.wrong_branch = wrong;
                rec.correct_path = right;
                rec.overlap = ov;
                for (const auto& tr : wrong.transitions) {
                    if (std::find(right.transitions.begin(), right.transitions.end(), tr) != right.transitions.end()) {
                        rec.backtrack_point = tr;
                    }
                }
                return rec;
            }
        }
    }
    return std::nullopt;
}

int tier_of(std::size_t length) {
    if (length < 5) throw BelowTierRange("reasoning length below 5 has no tier");
    if (length <= 10) return 1;
    if (length <= 20) return 2;
    if (length <= 50) return 3;
    return 4;
}

const char* kind_name(ProblemKind k) { return k == ProblemKind::Numeric ? "numeric" : "proof"; }

const char* template_name(ThinkingTemplate t) {
    switch (t) {
        case ThinkingTemplate::Deductive:
            return "deductive";
        case ThinkingTemplate::MultiSolution:
            return "multi-solution";
        case ThinkingTemplate::Traceback:
            return "traceback";
    }
    return "deductive";
}

std::optional<ThinkingTemplate> template_from_name(std::string_view name) {
    for (auto t : {ThinkingTemplate::Deductive, ThinkingTemplate::MultiSolution, ThinkingTemplate::Traceback}) {
        if (name == template_name(t)) return t;
    }
    return std::nullopt;
}

ProblemCore formulate_problem(const SceneGeometry& geometry, const ReasoningGraph& g, std::vector<ReasoningPath> solutions,
                              std::optional<TracebackRecord> traceback, ProblemKind kind, DistractorPolicy policy) {
    if (traceback) solutions.insert(solutions.begin(), traceback->correct_path);
    if (solutions.empty()) throw std::invalid_argument("a problem needs at least one solution");
    ProblemCore core;
    core.kind = kind;
    core.target = solutions.front().target;
    for (const auto& s : solutions) {
        if (s.target != core.target) throw std::invalid_argument("solutions disagree on the target");
    }
    const Statement& target = g.statement(core.target);
    core.thinking = traceback ? ThinkingTemplate::Traceback
                              : (solutions.size() > 1 ? ThinkingTemplate::MultiSolution : ThinkingTemplate::Deductive);
    core.length = solutions.front().length();
    core.premise_ratio = solutions.front().premise_ratio;
    core.tier = core.length >= 5 ? tier_of(core.length) : 0;

    if (kind == ProblemKind::Numeric) {
        if (!target.value()) throw std::invalid_argument("numeric problems need a value-bearing target");
        core.answer = target.value();
        core.oracle_value = measure(geometry, target);
        double key = core.answer->to_double();
        if (std::abs(core.oracle_value - key) > kOracleTolerance * std::abs(key)) {
            throw OracleMismatch("derived " + display_statement(target) + " but the figure measures " +
                                 std::to_string(core.oracle_value));
        }
    }

    std::set<StatementId> given;
    if (policy == DistractorPolicy::AllInitial) {
        for (StatementId s = 0; s < g.initial_count(); ++s) given.insert(s);
    } else {
        for (const auto& p : solutions) given.insert(p.used_premises.begin(), p.used_premises.end());
        if (traceback) given.insert(traceback->wrong_branch.used_premises.begin(), traceback->wrong_branch.used_premises.end());
    }
    core.given.assign(given.begin(), given.end());

    std::string q = "In the figure, ";
    for (std::size_t i = 0; i < core.given.size(); ++i) {
        if (i > 0) q += i + 1 == core.given.size() ? ", and " : ", ";
        q += display_statement(g.statement(core.given[i]));
    }
    q += ". ";
    if (kind == ProblemKind::Numeric) {
        switch (target.predicate()) {
            case Predicate::SegmentLength:
                q += "Find the length of " + display_quantity(target) + ".";
                break;
            case Predicate::AngleMeasure:
                q += "Find the measure of " + display_quantity(target) + " in degrees.";
                break;
            default:
                q += "Find the ratio " + display_quantity(target) + ".";
                break;
        }
    } else {
        q += "Prove that " + display_statement(target) + ".";
    }
    core.question = std::move(q);
    core.solutions = std::move(solutions);
    core.traceback = std::move(traceback);
    return core;
}

}  // namespace geoforge
