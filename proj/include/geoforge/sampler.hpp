#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "geoforge/reasoner.hpp"

namespace geoforge {

struct ReasoningPath {
    StatementId target = 0;
    std::vector<Transition> transitions;     // forward order, last concludes target
    std::vector<StatementId> used_premises;  // initial statements used, sorted
    double premise_ratio = 0.0;

    std::size_t length() const { return transitions.size(); }
    friend bool operator==(const ReasoningPath&, const ReasoningPath&) = default;
};

struct Thresholds {
    std::size_t min_length = 5;  // tau_l
    double min_ratio = 0.5;      // tau_r

    static Thresholds off() { return {0, 0.0}; }
};

enum class RejectReason { Length, Ratio };

struct Rejected {
    RejectReason reason;
    ReasoningPath path;
};

class TargetIsInitial : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class WrongGraphMode : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NoEligibleErroneousStatement : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BelowTierRange : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Path built from an explicit transition choice; used by the explorers and by
// tests that construct paths by hand.
ReasoningPath make_path(const ReasoningGraph& g, StatementId target, std::vector<Transition> transitions);

// Length filter first, then premise ratio.
std::optional<RejectReason> filter_path(const ReasoningPath& p, const Thresholds& t);

std::variant<ReasoningPath, Rejected> geo_explore(const ReasoningGraph& g, StatementId target, const Thresholds& t);

inline constexpr std::size_t kDefaultMaxPaths = 16;
// Upper bound on complete option assignments visited per call.
inline constexpr std::size_t kMaxExploredAssignments = 4096;

std::vector<ReasoningPath> geo_explore_m(const ReasoningGraph& g, StatementId target, const Thresholds& t,
                                         std::size_t max_paths = kDefaultMaxPaths);

// |transitions(wrong) ∩ transitions(correct)| / |transitions(wrong)|.
double path_overlap(const ReasoningPath& wrong, const ReasoningPath& correct);

struct TracebackRecord {
    StatementId erroneous_target = 0;
    ReasoningPath wrong_branch;
    ReasoningPath correct_path;
    double overlap = 0.0;
    Transition backtrack_point;  // last transition of the wrong branch shared with the correct path
};

inline constexpr int kTracebackRetries = 100;
inline constexpr double kDefaultOverlapThreshold = 0.5;

// Statements that may serve as the erroneous target for s_t.
std::vector<StatementId> traceback_candidates(const ReasoningGraph& g, StatementId target);

std::optional<TracebackRecord> geo_explore_t(const ReasoningGraph& g, StatementId target, const Thresholds& t,
                                             double tau_p, std::uint64_t rng_seed,
                                             std::size_t max_paths = kDefaultMaxPaths);

int tier_of(std::size_t length);

enum class ProblemKind { Numeric, Proof };
enum class DistractorPolicy { AllInitial, UsedOnly };
enum class ThinkingTemplate { Deductive, MultiSolution, Traceback };

const char* kind_name(ProblemKind k);
const char* template_name(ThinkingTemplate t);
std::optional<ThinkingTemplate> template_from_name(std::string_view name);

class OracleMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ProblemCore {
    ProblemKind kind = ProblemKind::Numeric;
    ThinkingTemplate thinking = ThinkingTemplate::Deductive;
    StatementId target = 0;
    std::vector<StatementId> given;  // initial statements listed in the question
    std::string question;
    std::optional<Rational> answer;  // numeric kind
    double oracle_value = 0.0;       // coordinate measurement of the target
    std::vector<ReasoningPath> solutions;
    std::optional<TracebackRecord> traceback;
    std::size_t length = 0;        // of the first solution
    double premise_ratio = 0.0;    // of the first solution
    int tier = 0;                  // 0 when length < 5
};

// Relative tolerance between a path-derived value and the coordinate oracle.
inline constexpr double kOracleTolerance = 0.01;

// `solutions` must be non-empty and all end at the same target; a traceback,
// when given, supplies the correct path as the first solution.
ProblemCore formulate_problem(const SceneGeometry& geometry, const ReasoningGraph& g, std::vector<ReasoningPath> solutions,
                              std::optional<TracebackRecord> traceback, ProblemKind kind, DistractorPolicy policy);

}  // namespace geoforge
