#include "geoforge/reasoner.hpp"

#include <algorithm>
#include <array>

namespace geoforge {

VerifierContradiction::VerifierContradiction(std::string rule, Statement conclusion)
    : std::runtime_error("rule " + rule + " derived " + serialize_statement(conclusion) +
                         ", which fails numerically"),
      rule_(std::move(rule)),
      conclusion_(std::move(conclusion)) {}

const char* mode_name(ReasonMode m) { return m == ReasonMode::Single ? "single" : "multi"; }

ReasoningGraph::ReasoningGraph(const StatementSet& initial, ReasonMode mode) : mode_(mode) {
    for (const auto& s : initial) add_statement(s);
    initial_count_ = statements_.size();
}

StatementId ReasoningGraph::add_statement(const Statement& s) {
    auto [id, inserted] = statements_.insert(s);
    if (inserted) incoming_.emplace_back();
    return id;
}

bool ReasoningGraph::add_transition(Transition t) {
    std::sort(t.premises.begin(), t.premises.end());
    t.premises.erase(std::unique(t.premises.begin(), t.premises.end()), t.premises.end());
    if (t.premises.empty() || t.conclusion >= size() || is_initial(t.conclusion)) return false;
    if (t.rule >= rule_catalog().size()) return false;
    if (t.premises.back() >= t.conclusion) return false;
    if (mode_ == ReasonMode::Single && !incoming_[t.conclusion].empty()) return false;
    if (!transition_keys_.insert(t).second) return false;
    incoming_[t.conclusion].push_back(transitions_.size());
    transitions_.push_back(std::move(t));
    return true;
}

const std::vector<std::size_t>& ReasoningGraph::incoming(StatementId id) const {
    if (id >= incoming_.size()) throw UnknownStatement("unknown statement id " + std::to_string(id));
    return incoming_[id];
}

ReasoningGraph ReasoningGraph::single_projection() const {
    ReasoningGraph out;
    out.mode_ = ReasonMode::Single;
    for (const auto& s : statements_) out.add_statement(s);
    out.initial_count_ = initial_count_;
    for (StatementId id = 0; id < size(); ++id) {
        if (!incoming_[id].empty()) out.add_transition(transitions_[incoming_[id].front()]);
    }
    out.truncated_ = truncated_;
    out.rounds_ = rounds_;
    return out;
}

nlohmann::json ReasoningGraph::to_json() const {
    nlohmann::json stmts = nlohmann::json::array();
    for (StatementId id = 0; id < size(); ++id) {
        stmts.push_back({{"id", id}, {"text", serialize_statement(statements_[id])}, {"initial", is_initial(id)}});
    }
    nlohmann::json trans = nlohmann::json::array();
    for (const auto& t : transitions_) {
        trans.push_back({{"premises", t.premises}, {"rule", rule_catalog()[t.rule].id}, {"conclusion", t.conclusion}});
    }
    return {{"statements", stmts}, {"transitions", trans}, {"mode", mode_name(mode_)}, {"truncated", truncated_}};
}

ReasoningGraph ReasoningGraph::from_json(const nlohmann::json& j) {
    ReasoningGraph out;
    out.mode_ = j.at("mode").get<std::string>() == "multi" ? ReasonMode::Multi : ReasonMode::Single;
    out.truncated_ = j.value("truncated", false);
    std::size_t initial = 0;
    for (const auto& s : j.at("statements")) {
        out.add_statement(parse_statement(s.at("text").get<std::string>()));
        if (s.at("initial").get<bool>()) ++initial;
    }
    out.initial_count_ = initial;
    for (const auto& t : j.at("transitions")) {
        auto rule = rule_index(t.at("rule").get<std::string>());
        if (!rule) throw std::invalid_argument("unknown rule " + t.at("rule").get<std::string>());
        out.add_transition({t.at("premises").get<std::vector<StatementId>>(), *rule, t.at("conclusion").get<StatementId>()});
    }
    return out;
}

namespace {

struct FormRef {
    std::uint32_t fact;
    Statement form;
};

// Every argument ordering of every fact, indexed by predicate and by
// (predicate, slot, point). Posting lists are in fact-id order.
class FactIndex {
public:
    explicit FactIndex(std::size_t point_count)
        : point_count_(std::max<std::size_t>(point_count, 1)),
          by_predicate_(kPredicateCount),
          by_slot_(kPredicateCount * Statement::kMaxPoints * point_count_) {}

    void add(std::uint32_t fact, const Statement& s) {
        for (auto& f : equivalent_forms(s)) {
            auto idx = static_cast<std::uint32_t>(forms_.size());
            auto pred = static_cast<std::size_t>(f.predicate());
            by_predicate_[pred].push_back(idx);
            auto pts = f.points();
            for (std::size_t i = 0; i < pts.size(); ++i) by_slot_[key(pred, i, pts[i].index())].push_back(idx);
            forms_.push_back({fact, std::move(f)});
        }
    }

    const std::vector<std::uint32_t>& candidates(const StatementPattern& p, const Binding& b) const {
        auto pred = static_cast<std::size_t>(p.predicate);
        const std::vector<std::uint32_t>* best = &by_predicate_[pred];
        for (std::size_t i = 0; i < p.vars.size(); ++i) {
            auto v = b.points[p.vars[i]];
            if (v < 0) continue;
            const auto& list = by_slot_[key(pred, i, static_cast<std::size_t>(v))];
            if (list.size() < best->size()) best = &list;
        }
        return *best;
    }

    const FormRef& form(std::uint32_t i) const { return forms_[i]; }

private:
    std::size_t key(std::size_t pred, std::size_t slot, std::size_t point) const {
        return (pred * Statement::kMaxPoints + slot) * point_count_ + point;
    }

    std::size_t point_count_;
    std::vector<FormRef> forms_;
    std::vector<std::vector<std::uint32_t>> by_predicate_;
    std::vector<std::vector<std::uint32_t>> by_slot_;
};

constexpr std::size_t kMaxPremises = 4;

struct Matcher {
    const FactIndex& index;
    const SceneGeometry& geometry;
    const Rule& rule;
    std::size_t delta_slot;
    std::uint32_t old_end;
    std::uint32_t cur_end;
    std::array<std::uint32_t, kMaxPremises> used{};

    template <class Emit>
    void run(std::size_t k, const Binding& b, Emit& emit) {
        if (k == rule.premises.size()) {
            if (auto c = rule.conclude(geometry, b)) {
                std::vector<StatementId> premises(used.begin(), used.begin() + static_cast<std::ptrdiff_t>(k));
                emit(std::move(*c), std::move(premises));
            }
            return;
        }
        std::uint32_t lo = k == delta_slot ? old_end : 0;
        std::uint32_t hi = k < delta_slot ? old_end : cur_end;
        const auto& list = index.candidates(rule.premises[k], b);
        auto it = std::lower_bound(list.begin(), list.end(), lo,
                                   [this](std::uint32_t idx, std::uint32_t v) { return index.form(idx).fact < v; });
        for (; it != list.end(); ++it) {
            const auto& ref = index.form(*it);
            if (ref.fact >= hi) break;
            if (std::find(used.begin(), used.begin() + static_cast<std::ptrdiff_t>(k), ref.fact) !=
                used.begin() + static_cast<std::ptrdiff_t>(k)) {
                continue;
            }
            Binding next = b;
            if (!bind_form(rule.premises[k], ref.form, next)) continue;
            used[k] = ref.fact;
            run(k + 1, next, emit);
        }
    }
};

}  // namespace

ReasoningGraph saturate(const SceneGeometry& g, const StatementSet& s0, ReasonMode mode, const Budget& budget) {
    ReasoningGraph graph(s0, mode);
    const auto& rules = rule_catalog();
    FactIndex index(g.size());
    for (StatementId id = 0; id < graph.size(); ++id) index.add(static_cast<std::uint32_t>(id), graph.statement(id));

    std::uint32_t old_end = 0;
    auto cur_end = static_cast<std::uint32_t>(graph.size());
    bool stop = false;
    while (old_end < cur_end && !stop) {
        if (graph.rounds_ >= budget.max_rounds) {
            graph.truncated_ = true;
            break;
        }
        StatementSet pending;
        std::vector<Transition> pending_transitions;  // conclusion = pending index + cur_end

        for (std::size_t r = 0; r < rules.size() && !stop; ++r) {
            const Rule& rule = rules[r];
            auto emit = [&](Statement c, std::vector<StatementId> premises) {
                if (auto existing = graph.statements().index_of(c)) {
                    if (mode == ReasonMode::Multi) graph.add_transition({std::move(premises), r, *existing});
                } else {
                    auto [pidx, inserted] = pending.insert(c);
                    if (inserted && !check_statement(g, c).holds) throw VerifierContradiction(rule.id, c);
                    if (inserted || mode == ReasonMode::Multi) {
                        pending_transitions.push_back({std::move(premises), r, cur_end + pidx});
                    }
                }
                if (graph.transitions().size() + pending_transitions.size() >= budget.max_transitions) stop = true;
            };
            for (std::size_t slot = 0; slot < rule.premises.size() && !stop; ++slot) {
                Matcher m{index, g, rule, slot, old_end, cur_end};
                m.run(0, Binding{}, emit);
            }
        }

        std::size_t room = budget.max_statements > graph.size() ? budget.max_statements - graph.size() : 0;
        if (pending.size() > room) {
            graph.truncated_ = true;
            stop = true;
        }
        for (std::size_t i = 0; i < pending.size() && i < room; ++i) {
            auto id = graph.add_statement(pending[i]);
            index.add(static_cast<std::uint32_t>(id), pending[i]);
        }
        for (auto& t : pending_transitions) {
            if (t.conclusion >= graph.size()) continue;
            if (graph.transitions().size() >= budget.max_transitions) {
                graph.truncated_ = true;
                stop = true;
                break;
            }
            graph.add_transition(std::move(t));
        }
        if (stop) graph.truncated_ = true;
        old_end = cur_end;
        cur_end = static_cast<std::uint32_t>(graph.size());
        ++graph.rounds_;
    }
    return graph;
}

std::vector<StatementId> upstream_dependencies(const ReasoningGraph& g, StatementId s) {
    if (s >= g.size()) throw UnknownStatement("unknown statement id " + std::to_string(s));
    std::vector<bool> seen(g.size(), false);
    std::vector<StatementId> stack{s};
    seen[s] = true;
    while (!stack.empty()) {
        auto cur = stack.back();
        stack.pop_back();
        for (auto t : g.incoming(cur)) {
            for (auto p : g.transitions()[t].premises) {
                if (!seen[p]) {
                    seen[p] = true;
                    stack.push_back(p);
                }
            }
        }
    }
    std::vector<StatementId> out;
    for (StatementId i = 0; i < g.size(); ++i) {
        if (seen[i]) out.push_back(i);
    }
    return out;
}

}  // namespace geoforge
