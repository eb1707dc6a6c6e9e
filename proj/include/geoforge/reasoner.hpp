#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "geoforge/geometry.hpp"
#include "geoforge/rules.hpp"
#include "geoforge/statement.hpp"
#include "json.hpp"

namespace geoforge {

using StatementId = std::size_t;

struct Transition {
    std::vector<StatementId> premises;  // sorted, distinct
    std::size_t rule = 0;               // index into rule_catalog()
    StatementId conclusion = 0;

    friend bool operator==(const Transition&, const Transition&) = default;
    friend auto operator<=>(const Transition&, const Transition&) = default;
};

enum class ReasonMode { Single, Multi };

struct Budget {
    std::size_t max_statements = 5000;
    std::size_t max_transitions = 20000;
    std::size_t max_rounds = 50;
};

class VerifierContradiction : public std::runtime_error {
public:
    VerifierContradiction(std::string rule, Statement conclusion);
    const std::string& rule() const { return rule_; }
    const Statement& conclusion() const { return conclusion_; }

private:
    std::string rule_;
    Statement conclusion_;
};

class UnknownStatement : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

class ReasoningGraph {
public:
    ReasoningGraph() = default;
    ReasoningGraph(const StatementSet& initial, ReasonMode mode);

    // Hand-building API (also used by saturate). Transitions must point from
    // lower to higher statement ids and may not target initial statements;
    // add_transition returns false for those, for duplicates, and for a second
    // derivation in single mode.
    StatementId add_statement(const Statement& s);
    bool add_transition(Transition t);

    const StatementSet& statements() const { return statements_; }
    const Statement& statement(StatementId id) const { return statements_[id]; }
    std::size_t size() const { return statements_.size(); }
    std::size_t initial_count() const { return initial_count_; }
    bool is_initial(StatementId id) const { return id < initial_count_; }
    const std::vector<Transition>& transitions() const { return transitions_; }
    const std::vector<std::size_t>& incoming(StatementId id) const;
    ReasonMode mode() const { return mode_; }
    bool truncated() const { return truncated_; }
    std::size_t rounds() const { return rounds_; }

    // Keeps the first incoming transition of every statement.
    ReasoningGraph single_projection() const;

    nlohmann::json to_json() const;
    static ReasoningGraph from_json(const nlohmann::json& j);

private:
    friend ReasoningGraph saturate(const SceneGeometry&, const StatementSet&, ReasonMode, const Budget&);

    StatementSet statements_;
    std::size_t initial_count_ = 0;
    std::vector<Transition> transitions_;
    std::vector<std::vector<std::size_t>> incoming_;
    std::set<Transition> transition_keys_;
    ReasonMode mode_ = ReasonMode::Single;
    bool truncated_ = false;
    std::size_t rounds_ = 0;
};

// Forward closure of s0 under the rule catalog. Throws VerifierContradiction
// if a derived statement fails the numeric check on g.
ReasoningGraph saturate(const SceneGeometry& g, const StatementSet& s0, ReasonMode mode = ReasonMode::Single,
                        const Budget& budget = {});

// Every statement reachable backward from s (s included), through any
// incoming transition. Sorted ascending.
std::vector<StatementId> upstream_dependencies(const ReasoningGraph& g, StatementId s);

const char* mode_name(ReasonMode m);

}  // namespace geoforge
