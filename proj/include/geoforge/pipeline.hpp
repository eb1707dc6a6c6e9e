#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "geoforge/constructor.hpp"
#include "geoforge/reasoner.hpp"
#include "geoforge/renderer.hpp"
#include "geoforge/sampler.hpp"
#include "geoforge/translator.hpp"
#include "json.hpp"

namespace geoforge {

inline constexpr int kSchemaVersion = 1;

struct BootstrapParams {
    double quantile = 0.1;  // top fraction of scenes by reasoning length
    int extra_steps = 3;
    int iterations = 1;
};

struct PipelineConfig {
    std::uint64_t seed_start = 0;
    std::uint64_t count = 100;               // scenes (one per seed)
    std::optional<std::size_t> max_records;  // stop emitting after this many
    std::vector<std::string> generators;     // empty: all
    int construction_steps = 3;              // applied after the base figure

    Thresholds thresholds;  // tau_l, tau_r
    double tau_p = kDefaultOverlapThreshold;
    Budget budget;
    std::size_t max_paths = kDefaultMaxPaths;

    std::size_t deductive_per_scene = 2;
    bool multi_solution = true;
    bool traceback = true;
    bool proof_problems = true;  // allow targets without a value
    DistractorPolicy distractors = DistractorPolicy::AllInitial;

    std::string translator = "template";  // or "external"
    std::string llm_endpoint;
    std::string llm_model;

    std::size_t workers = 1;
    std::size_t per_tier = 60;
    BootstrapParams bootstrap;

    // Throws std::invalid_argument when a field is out of range.
    void validate() const;

    nlohmann::json to_json() const;
    static PipelineConfig from_json(const nlohmann::json& j);  // missing fields keep defaults
};

class CorruptRecord : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InsufficientRecords : public std::runtime_error {
public:
    InsufficientRecords(int tier, std::size_t have, std::size_t need);
    int tier() const { return tier_; }

private:
    int tier_;
};

// One emitted problem. `json` is the full record as written to records.jsonl.
struct ProblemRecord {
    std::string id;
    nlohmann::json json;
    std::string svg;
};

// Records of one scene. Failures are reported in `error` (and yield none).
struct SceneOutcome {
    std::vector<ProblemRecord> records;
    std::string error;
    std::size_t max_length = 0;  // longest unfiltered single-mode path, 0 if none
};

SceneOutcome process_scene(const Scene& scene, const PipelineConfig& config, int generation,
                           TranslationBackend& backend);

// Scene for one seed: generator chosen by the seed, then construction_steps
// random constructions.
Scene scene_for_seed(std::uint64_t seed, const PipelineConfig& config);

struct RunSummary {
    std::size_t scenes = 0;
    std::size_t failed_scenes = 0;
    std::size_t records = 0;
    std::vector<std::string> log;
};

// Writes records.jsonl, manifest.jsonl, svg/<id>.svg and config.json to out.
RunSummary generate(const PipelineConfig& config, const std::filesystem::path& out);

// Extends the top-quantile scenes of a prior dataset and emits their records
// as the next generation.
RunSummary bootstrap(const PipelineConfig& config, const std::filesystem::path& in, const std::filesystem::path& out);

std::vector<nlohmann::json> load_records(const std::filesystem::path& dir);

struct RecordVerdict {
    std::string id;
    bool ok = true;
    std::vector<std::string> problems;
};

// Re-derives everything a record claims from its embedded scene.
RecordVerdict verify_record(const nlohmann::json& record, const std::filesystem::path& dir = {});
std::vector<RecordVerdict> verify_dataset(const std::filesystem::path& dir);

// Writes testset/test.jsonl (answers stripped) and testset/key.jsonl.
std::size_t curate_testset(const std::filesystem::path& dir, std::size_t per_tier);

struct AnswerCheck {
    bool correct = false;
    bool number_found = false;
    std::optional<double> predicted;
};

// Last number token in `predicted` (fractions "a/b" count as one number)
// against the key, 1% relative tolerance, 0.01 absolute when key is 0.
AnswerCheck check_answer(const std::string& predicted, double key);

nlohmann::json dataset_stats(const std::vector<nlohmann::json>& records);
std::string stats_table(const nlohmann::json& stats);

std::unique_ptr<TranslationBackend> make_backend(const PipelineConfig& config);

std::string record_id(const nlohmann::json& record_without_id);

}  // namespace geoforge
