#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "geoforge/reasoner.hpp"
#include "geoforge/sampler.hpp"

namespace geoforge {

struct NlStep {
    std::size_t index = 0;
    Transition transition;
    std::string statement_text;  // the conclusion
    std::string rule_text;       // full sentence: premises, rule, conclusion
};

struct BridgedStep {
    std::string bridge;
    NlStep step;
};

struct ConnectedSolution {
    std::vector<BridgedStep> steps;
    std::string closing;

    std::string text() const;
};

// What the solution is driving at: the target statement (with its value for
// numeric problems).
struct Goal {
    Statement target;
    bool numeric = false;
};

class BackendError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class BackendKind { Template, External };

// Rewrites template drafts. The template backend returns drafts unchanged.
class TranslationBackend {
public:
    enum class Purpose { Step, Bridge, Closing };

    virtual ~TranslationBackend() = default;
    virtual BackendKind kind() const = 0;
    // context: the formal statement(s) or scaffold the draft was built from.
    virtual std::string rewrite(Purpose purpose, const std::string& context, const std::string& draft) = 0;
};

class TemplateBackend final : public TranslationBackend {
public:
    BackendKind kind() const override { return BackendKind::Template; }
    std::string rewrite(Purpose, const std::string&, const std::string& draft) override { return draft; }
};

struct ExternalBackendConfig {
    std::string endpoint;  // e.g. http://localhost:8080/v1/chat/completions
    std::string model;
    std::string api_key;   // sent as a bearer token when non-empty
    std::chrono::seconds timeout{30};
    int retries = 2;
};

// Chat-completion JSON over HTTP: {model, temperature: 0, messages: [system,
// user]} -> choices[0].message.content. Replies that drop a point label or
// numeric value of the draft, or add a number, count as malformed.
class ExternalBackend final : public TranslationBackend {
public:
    explicit ExternalBackend(ExternalBackendConfig config);
    BackendKind kind() const override { return BackendKind::External; }
    std::string rewrite(Purpose purpose, const std::string& context, const std::string& draft) override;

private:
    ExternalBackendConfig config_;
};

extern const char* const kPromptVersion;

// Numeric tokens ("40", "5/2", "0.5") and point labels occurring in text.
std::vector<std::string> number_tokens(const std::string& text);
std::vector<std::string> label_tokens(const std::string& text);

std::string rule_sentence(const ReasoningGraph& g, const Transition& t);

std::vector<NlStep> translate_steps(const ReasoningGraph& g, const ReasoningPath& path, TranslationBackend& backend);

// Throws std::invalid_argument on empty steps.
ConnectedSolution connect_thinking(const ReasoningGraph& g, const std::vector<NlStep>& steps, const Goal& goal,
                                   TranslationBackend& backend);

// Wrong branch, pivot, then the rest of the correct path.
ConnectedSolution narrate_traceback(const ReasoningGraph& g, const TracebackRecord& rec, const Goal& goal,
                                    TranslationBackend& backend);

// "∠ACB", "the length of AB", or the statement to be proved.
std::string goal_phrase(const Goal& goal);

}  // namespace geoforge
