#include "geoforge/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

namespace geoforge {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

void PipelineConfig::validate() const {
    if (!(thresholds.min_ratio >= 0.0 && thresholds.min_ratio <= 1.0)) throw std::invalid_argument("tau_r must be in [0, 1]");
    if (!(tau_p >= 0.0 && tau_p <= 1.0)) throw std::invalid_argument("tau_p must be in [0, 1]");
    if (budget.max_statements == 0 || budget.max_transitions == 0 || budget.max_rounds == 0) {
        throw std::invalid_argument("budgets must be positive");
    }
    if (max_paths == 0) throw std::invalid_argument("max_paths must be positive");
    if (construction_steps < 0) throw std::invalid_argument("construction_steps must be non-negative");
    if (!(bootstrap.quantile > 0.0 && bootstrap.quantile <= 1.0)) throw std::invalid_argument("quantile must be in (0, 1]");
    if (bootstrap.extra_steps < 1) throw std::invalid_argument("extra_steps must be at least 1");
    if (bootstrap.iterations < 1) throw std::invalid_argument("iterations must be at least 1");
    if (workers == 0) throw std::invalid_argument("workers must be positive");
    if (translator != "template" && translator != "external") throw std::invalid_argument("unknown translator " + translator);
    if (translator == "external" && llm_endpoint.empty()) throw std::invalid_argument("external translator needs an endpoint");
    for (const auto& g : generators) {
        const auto& cat = generator_catalog();
        if (std::find(cat.begin(), cat.end(), g) == cat.end()) throw UnknownGenerator("unknown generator '" + g + "'");
    }
}

json PipelineConfig::to_json() const {
    json j;
    j["seed_start"] = seed_start;
    j["count"] = count;
    j["max_records"] = max_records ? json(*max_records) : json(nullptr);
    j["generators"] = generators;
    j["construction_steps"] = construction_steps;
    j["tau_l"] = thresholds.min_length;
    j["tau_r"] = thresholds.min_ratio;
    j["tau_p"] = tau_p;
    j["budget"] = {{"max_statements", budget.max_statements},
                   {"max_transitions", budget.max_transitions},
                   {"max_rounds", budget.max_rounds}};
    j["max_paths"] = max_paths;
    j["deductive_per_scene"] = deductive_per_scene;
    j["multi_solution"] = multi_solution;
    j["traceback"] = traceback;
    j["proof_problems"] = proof_problems;
    j["distractors"] = distractors == DistractorPolicy::AllInitial ? "all" : "used";
    j["translator"] = translator;
    j["llm_endpoint"] = llm_endpoint;
    j["llm_model"] = llm_model;
    j["workers"] = workers;
    j["per_tier"] = per_tier;
    j["bootstrap"] = {{"quantile", bootstrap.quantile},
                      {"extra_steps", bootstrap.extra_steps},
                      {"iterations", bootstrap.iterations}};
    return j;
}

PipelineConfig PipelineConfig::from_json(const json& j) {
    static const std::set<std::string> known = {
        "seed_start", "count", "max_records", "generators", "construction_steps", "tau_l", "tau_r", "tau_p",
        "budget", "max_paths", "deductive_per_scene", "multi_solution", "traceback", "proof_problems",
        "distractors", "translator", "llm_endpoint", "llm_model", "workers", "per_tier", "bootstrap"};
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    for (const auto& [k, v] : j.items()) {
        if (!known.count(k)) throw std::invalid_argument("unknown config field '" + k + "'");
    }
    PipelineConfig c;
    c.seed_start = j.value("seed_start", c.seed_start);
    c.count = j.value("count", c.count);
    if (j.contains("max_records") && !j["max_records"].is_null()) c.max_records = j["max_records"].get<std::size_t>();
    c.generators = j.value("generators", c.generators);
    c.construction_steps = j.value("construction_steps", c.construction_steps);
    c.thresholds.min_length = j.value("tau_l", c.thresholds.min_length);
    c.thresholds.min_ratio = j.value("tau_r", c.thresholds.min_ratio);
    c.tau_p = j.value("tau_p", c.tau_p);
    if (j.contains("budget")) {
        const auto& b = j["budget"];
        c.budget.max_statements = b.value("max_statements", c.budget.max_statements);
        c.budget.max_transitions = b.value("max_transitions", c.budget.max_transitions);
        c.budget.max_rounds = b.value("max_rounds", c.budget.max_rounds);
    }
    c.max_paths = j.value("max_paths", c.max_paths);
    c.deductive_per_scene = j.value("deductive_per_scene", c.deductive_per_scene);
    c.multi_solution = j.value("multi_solution", c.multi_solution);
    c.traceback = j.value("traceback", c.traceback);
    c.proof_problems = j.value("proof_problems", c.proof_problems);
    auto d = j.value("distractors", std::string("all"));
    if (d != "all" && d != "used") throw std::invalid_argument("distractors must be 'all' or 'used'");
    c.distractors = d == "all" ? DistractorPolicy::AllInitial : DistractorPolicy::UsedOnly;
    c.translator = j.value("translator", c.translator);
    c.llm_endpoint = j.value("llm_endpoint", c.llm_endpoint);
    c.llm_model = j.value("llm_model", c.llm_model);
    c.workers = j.value("workers", c.workers);
    c.per_tier = j.value("per_tier", c.per_tier);
    if (j.contains("bootstrap")) {
        const auto& b = j["bootstrap"];
        c.bootstrap.quantile = b.value("quantile", c.bootstrap.quantile);
        c.bootstrap.extra_steps = b.value("extra_steps", c.bootstrap.extra_steps);
        c.bootstrap.iterations = b.value("iterations", c.bootstrap.iterations);
    }
    return c;
}

InsufficientRecords::InsufficientRecords(int tier, std::size_t have, std::size_t need)
    : std::runtime_error("tier " + std::to_string(tier) + " has " + std::to_string(have) +
                         " numeric records, need " + std::to_string(need)),
      tier_(tier) {}

std::unique_ptr<TranslationBackend> make_backend(const PipelineConfig& config) {
    if (config.translator == "external") {
        ExternalBackendConfig ec;
        ec.endpoint = config.llm_endpoint;
        ec.model = config.llm_model;
        if (const char* key = std::getenv("GEOFORGE_LLM_KEY")) ec.api_key = key;
        return std::make_unique<ExternalBackend>(ec);
    }
    return std::make_unique<TemplateBackend>();
}

std::string record_id(const json& record_without_id) {
    std::string text = record_without_id.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// Scene → records
// ---------------------------------------------------------------------------

Scene scene_for_seed(std::uint64_t seed, const PipelineConfig& config) {
    const auto& gens = config.generators.empty() ? generator_catalog() : config.generators;
    const auto& gen = gens[mix_seed(seed) % gens.size()];
    Scene base = generate_base_scene(gen, mix_seed(seed, 1));
    return extend_scene(base, config.construction_steps, mix_seed(seed, 2));
}

namespace {

std::string scene_key(const json& scene) { return record_id(scene); }

// Local statement table of a record: all of S0 (graph order), then every
// derived statement the solutions mention, by graph id.
struct LocalTable {
    std::vector<StatementId> global;
    std::map<StatementId, std::size_t> local;

    std::size_t at(StatementId g) const { return local.at(g); }
};

LocalTable build_table(const ReasoningGraph& g, const ProblemCore& core) {
    std::set<StatementId> derived;
    auto take = [&](const ReasoningPath& p) {
        for (const auto& t : p.transitions) {
            derived.insert(t.conclusion);
            for (auto s : t.premises) derived.insert(s);
        }
        derived.insert(p.target);
    };
    for (const auto& p : core.solutions) take(p);
    if (core.traceback) take(core.traceback->wrong_branch);
    LocalTable table;
    for (StatementId s = 0; s < g.initial_count(); ++s) table.global.push_back(s);
    for (auto s : derived) {
        if (!g.is_initial(s)) table.global.push_back(s);
    }
    for (std::size_t i = 0; i < table.global.size(); ++i) table.local[table.global[i]] = i;
    return table;
}

json steps_json(const ReasoningPath& p, const LocalTable& table) {
    json steps = json::array();
    for (const auto& t : p.transitions) {
        std::vector<std::size_t> prem;
        for (auto s : t.premises) prem.push_back(table.at(s));
        std::sort(prem.begin(), prem.end());
        steps.push_back({{"premises", prem}, {"rule", rule_catalog()[t.rule].id}, {"conclusion", table.at(t.conclusion)}});
    }
    return steps;
}

json solution_json(const ReasoningPath& p, const LocalTable& table) {
    return {{"steps", steps_json(p, table)},
            {"length", p.length()},
            {"premise_ratio", p.premise_ratio},
            {"target", table.at(p.target)}};
}

json connected_json(const ConnectedSolution& sol) {
    json steps = json::array();
    for (const auto& s : sol.steps) steps.push_back({{"bridge", s.bridge}, {"step", s.step.rule_text}});
    return {{"steps", steps}, {"closing", sol.closing}};
}

const char* const kApproachNames[] = {"First approach.", "Second approach.", "Third approach.", "Fourth approach."};

ProblemRecord build_record(const Scene& scene, const ReasoningGraph& g, const ProblemCore& core, int generation,
                           const PipelineConfig& config, TranslationBackend& backend) {
    LocalTable table = build_table(g, core);
    const Statement& target = g.statement(core.target);

    json rec;
    rec["schema_version"] = kSchemaVersion;
    rec["seed"] = scene.seed;
    rec["bootstrap_generation"] = generation;
    json scene_json = scene_to_json(scene);
    rec["scene_key"] = scene_key(scene_json);
    rec["scene"] = scene_json;
    rec["template"] = template_name(core.thinking);
    rec["kind"] = kind_name(core.kind);
    rec["question"] = core.question;

    json statements = json::array();
    for (auto s : table.global) statements.push_back(serialize_statement(g.statement(s)));
    rec["statements"] = statements;
    rec["s0_size"] = g.initial_count();

    json premises = json::array();
    for (auto s : core.given) {
        premises.push_back({{"id", table.at(s)},
                            {"formal", serialize_statement(g.statement(s))},
                            {"nl", display_statement(g.statement(s))}});
    }
    rec["premises"] = premises;
    rec["target"] = table.at(core.target);

    if (core.kind == ProblemKind::Numeric) {
        rec["answer"] = {{"value", core.answer->str()},
                         {"display", display_value(*core.answer, target.info().unit)},
                         {"approx", core.answer->to_double()}};
    } else {
        rec["answer"] = {{"statement", serialize_statement(target)}, {"display", display_statement(target)}};
    }

    json solutions = json::array();
    for (const auto& p : core.solutions) solutions.push_back(solution_json(p, table));
    rec["solutions"] = solutions;

    if (core.traceback) {
        const auto& tb = *core.traceback;
        std::size_t backtrack_index = 0;
        for (std::size_t i = 0; i < tb.wrong_branch.transitions.size(); ++i) {
            if (tb.wrong_branch.transitions[i] == tb.backtrack_point) backtrack_index = i;
        }
        rec["traceback"] = {{"erroneous_target", table.at(tb.erroneous_target)},
                            {"wrong_branch", solution_json(tb.wrong_branch, table)},
                            {"overlap", tb.overlap},
                            {"backtrack_step", backtrack_index}};
    } else {
        rec["traceback"] = nullptr;
    }

    // Natural language.
    Goal goal{target, core.kind == ProblemKind::Numeric};
    json translation = {{"backend", config.translator}, {"prompt_version", kPromptVersion}};
    try {
        json connection = json::array();
        std::string text;
        if (core.traceback) {
            auto sol = narrate_traceback(g, *core.traceback, goal, backend);
            connection.push_back(connected_json(sol));
            text = sol.text();
        } else {
            for (std::size_t i = 0; i < core.solutions.size(); ++i) {
                auto steps = translate_steps(g, core.solutions[i], backend);
                auto sol = connect_thinking(g, steps, goal, backend);
                connection.push_back(connected_json(sol));
                if (core.solutions.size() > 1) {
                    if (!text.empty()) text += "\n\n";
                    text += std::string(i < 4 ? kApproachNames[i] : "Another approach.") + "\n";
                }
                text += sol.text();
            }
        }
        rec["nl_solution"] = text;
        rec["connection_thinking"] = connection;
        translation["translated"] = true;
    } catch (const BackendError& e) {
        rec["nl_solution"] = nullptr;
        rec["connection_thinking"] = nullptr;
        translation["translated"] = false;
        translation["error"] = e.what();
    }
    rec["translation"] = translation;

    rec["metadata"] = {{"reasoning_length", core.length},
                       {"premise_ratio", core.premise_ratio},
                       {"tier", core.tier},
                       {"template", template_name(core.thinking)},
                       {"kind", kind_name(core.kind)},
                       {"bootstrap_generation", generation},
                       {"generator", scene.generator},
                       {"oracle_value", core.oracle_value},
                       {"tau_l", config.thresholds.min_length},
                       {"tau_r", config.thresholds.min_ratio},
                       {"tau_p", config.tau_p}};

    ProblemRecord out;
    out.id = record_id(rec);
    rec["id"] = out.id;
    rec["diagram"] = "svg/" + out.id + ".svg";
    out.json = std::move(rec);
    out.svg = render_svg(scene);
    return out;
}

bool proof_target(const Statement& s) {
    switch (s.predicate()) {
        case Predicate::EqualSegments:
        case Predicate::EqualAngles:
        case Predicate::CongruentTriangles:
        case Predicate::SimilarTriangles:
        case Predicate::Parallel:
        case Predicate::RightAngle:
            return true;
        default:
            return false;
    }
}

struct Candidate {
    StatementId id;
    ReasoningPath path;
    bool numeric;
};

}  // namespace

SceneOutcome process_scene(const Scene& scene, const PipelineConfig& config, int generation,
                           TranslationBackend& backend) {
    SceneOutcome out;
    try {
        auto verdict = check_scene(scene.geometry, scene.initial);
        if (!verdict.valid) {
            out.error = "invalid scene";
            return out;
        }
        ReasoningGraph multi = saturate(scene.geometry, scene.initial, ReasonMode::Multi, config.budget);
        ReasoningGraph single = multi.single_projection();

        std::vector<Candidate> candidates;
        for (StatementId s = single.initial_count(); s < single.size(); ++s) {
            auto r = geo_explore(single, s, config.thresholds);
            const ReasoningPath& p = std::holds_alternative<ReasoningPath>(r) ? std::get<ReasoningPath>(r)
                                                                               : std::get<Rejected>(r).path;
            out.max_length = std::max(out.max_length, p.length());
            if (!std::holds_alternative<ReasoningPath>(r)) continue;
            const Statement& st = single.statement(s);
            bool numeric = st.value().has_value();
            if (!numeric && !(config.proof_problems && proof_target(st))) continue;
            candidates.push_back({s, std::get<ReasoningPath>(r), numeric});
        }
        std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
            if (a.numeric != b.numeric) return a.numeric;
            if (a.path.length() != b.path.length()) return a.path.length() > b.path.length();
            return a.id < b.id;
        });

        auto kind_of = [](const Candidate& c) { return c.numeric ? ProblemKind::Numeric : ProblemKind::Proof; };
        auto emit = [&](const ReasoningGraph& g, std::vector<ReasoningPath> sols, std::optional<TracebackRecord> tb,
                        const Candidate& c) {
            try {
                auto core = formulate_problem(scene.geometry, g, std::move(sols), std::move(tb), kind_of(c),
                                              config.distractors);
                out.records.push_back(build_record(scene, g, core, generation, config, backend));
            } catch (const OracleMismatch& e) {
                out.error += std::string(out.error.empty() ? "" : "; ") + "oracle mismatch: " + e.what();
            }
        };

        for (std::size_t i = 0; i < candidates.size() && i < config.deductive_per_scene; ++i) {
            emit(single, {candidates[i].path}, std::nullopt, candidates[i]);
        }
        if (config.multi_solution) {
            for (const auto& c : candidates) {
                auto paths = geo_explore_m(multi, c.id, config.thresholds, config.max_paths);
                if (paths.size() >= 2) {
                    emit(multi, std::move(paths), std::nullopt, c);
                    break;
                }
            }
        }
        if (config.traceback) {
            constexpr std::size_t kTracebackTargets = 3;
            for (std::size_t i = 0; i < candidates.size() && i < kTracebackTargets; ++i) {
                const auto& c = candidates[i];
                std::optional<TracebackRecord> tb;
                try {
                    tb = geo_explore_t(multi, c.id, config.thresholds, config.tau_p, mix_seed(scene.seed, c.id),
                                       config.max_paths);
                } catch (const NoEligibleErroneousStatement&) {
                    continue;
                }
                if (tb) {
                    emit(multi, {}, std::move(tb), c);
                    break;
                }
            }
        }
    } catch (const VerifierContradiction& e) {
        out.records.clear();
        out.error = e.what();
    } catch (const StatementError& e) {
        out.records.clear();
        out.error = e.what();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dataset I/O
// ---------------------------------------------------------------------------

namespace {

void write_dataset(const fs::path& out, const std::vector<ProblemRecord>& records, const json& config) {
    fs::create_directories(out / "svg");
    std::ofstream data(out / "records.jsonl", std::ios::binary | std::ios::trunc);
    std::ofstream manifest(out / "manifest.jsonl", std::ios::binary | std::ios::trunc);
    if (!data || !manifest) throw std::runtime_error("cannot write to " + out.string());
    for (const auto& r : records) {
        data << r.json.dump() << "\n";
        const auto& m = r.json["metadata"];
        json line = {{"id", r.id},
                     {"seed", r.json["seed"]},
                     {"bootstrap_generation", m["bootstrap_generation"]},
                     {"template", m["template"]},
                     {"kind", m["kind"]},
                     {"tier", m["tier"]},
                     {"reasoning_length", m["reasoning_length"]},
                     {"premise_ratio", m["premise_ratio"]},
                     {"diagram", r.json["diagram"]}};
        manifest << line.dump() << "\n";
        std::ofstream svg(out / "svg" / (r.id + ".svg"), std::ios::binary | std::ios::trunc);
        svg << r.svg;
        if (!svg) throw std::runtime_error("cannot write diagram for " + r.id);
    }
    std::ofstream cfg(out / "config.json", std::ios::binary | std::ios::trunc);
    cfg << config.dump(2) << "\n";
    if (!data || !manifest || !cfg) throw std::runtime_error("write failed in " + out.string());
}

// Runs fn(i, backend) for i in [0, n) on a pool; results land in slot i.
template <class Fn>
void parallel_for(std::size_t n, const PipelineConfig& config, Fn fn) {
    std::size_t workers = std::min<std::size_t>(config.workers, std::max<std::size_t>(n, 1));
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        auto backend = make_backend(config);
        for (std::size_t i = next++; i < n; i = next++) fn(i, *backend);
    };
    if (workers <= 1) {
        work();
        return;
    }
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
}

}  // namespace

RunSummary generate(const PipelineConfig& config, const fs::path& out) {
    config.validate();
    std::vector<SceneOutcome> outcomes(config.count);
    parallel_for(config.count, config, [&](std::size_t i, TranslationBackend& backend) {
        std::uint64_t seed = config.seed_start + i;
        try {
            outcomes[i] = process_scene(scene_for_seed(seed, config), config, 0, backend);
        } catch (const PlacementFailure& e) {
            outcomes[i].error = e.what();
        }
    });

    RunSummary summary;
    std::vector<ProblemRecord> records;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        ++summary.scenes;
        auto& o = outcomes[i];
        if (!o.error.empty()) {
            summary.log.push_back("seed " + std::to_string(config.seed_start + i) + ": " + o.error);
            if (o.records.empty()) ++summary.failed_scenes;
        }
        for (auto& r : o.records) {
            if (config.max_records && records.size() >= *config.max_records) break;
            records.push_back(std::move(r));
        }
    }
    write_dataset(out, records, config.to_json());
    summary.records = records.size();
    return summary;
}

std::vector<json> load_records(const fs::path& dir) {
    std::ifstream in(dir / "records.jsonl", std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + (dir / "records.jsonl").string());
    std::vector<json> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::exception& e) {
            throw CorruptRecord("line " + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

RunSummary bootstrap(const PipelineConfig& config, const fs::path& in, const fs::path& out) {
    config.validate();
    auto prior = load_records(in);
    if (prior.empty()) throw std::invalid_argument("prior dataset is empty");

    struct SceneEntry {
        std::string key;
        json scene;
        int generation = 0;
        std::size_t score = 0;
    };
    std::vector<SceneEntry> scenes;
    auto collect = [&](const std::vector<json>& recs) {
        std::map<std::string, SceneEntry> by_key;
        for (const auto& r : recs) {
            auto key = r.at("scene_key").get<std::string>();
            auto& e = by_key[key];
            e.key = key;
            e.scene = r.at("scene");
            e.generation = std::max(e.generation, r.at("bootstrap_generation").get<int>());
            e.score = std::max(e.score, r.at("metadata").at("reasoning_length").get<std::size_t>());
        }
        std::vector<SceneEntry> v;
        for (auto& [k, e] : by_key) v.push_back(std::move(e));
        return v;
    };
    scenes = collect(prior);

    RunSummary summary;
    std::vector<ProblemRecord> emitted;
    for (int it = 0; it < config.bootstrap.iterations && !scenes.empty(); ++it) {
        std::stable_sort(scenes.begin(), scenes.end(), [](const SceneEntry& a, const SceneEntry& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.key < b.key;
        });
        auto take = static_cast<std::size_t>(std::ceil(config.bootstrap.quantile * static_cast<double>(scenes.size())));
        take = std::clamp<std::size_t>(take, 1, scenes.size());
        scenes.resize(take);

        std::vector<SceneOutcome> outcomes(scenes.size());
        parallel_for(scenes.size(), config, [&](std::size_t i, TranslationBackend& backend) {
            const auto& entry = scenes[i];
            Scene base = scene_from_json(entry.scene);
            std::uint64_t key_seed = std::stoull(entry.key, nullptr, 16);
            constexpr int kExtensionTries = 8;
            for (int attempt = 0; attempt < kExtensionTries; ++attempt) {
                Scene ext = extend_scene(base, config.bootstrap.extra_steps, mix_seed(key_seed, static_cast<std::uint64_t>(attempt)));
                if (ext.initial.size() <= base.initial.size()) continue;
                outcomes[i] = process_scene(ext, config, entry.generation + 1, backend);
                return;
            }
            outcomes[i].error = "no extension enlarged the initial statements";
        });

        std::vector<json> this_round;
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            ++summary.scenes;
            auto& o = outcomes[i];
            if (!o.error.empty()) {
                summary.log.push_back("scene " + scenes[i].key + ": " + o.error);
                if (o.records.empty()) ++summary.failed_scenes;
            }
            for (auto& r : o.records) {
                this_round.push_back(r.json);
                emitted.push_back(std::move(r));
            }
        }
        scenes = collect(this_round);
    }
    write_dataset(out, emitted, config.to_json());
    summary.records = emitted.size();
    return summary;
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

namespace {

struct CheckedPath {
    std::size_t length = 0;
    double premise_ratio = 0.0;
    std::set<std::size_t> statements;  // premises and conclusions
    std::vector<std::tuple<std::vector<std::size_t>, std::string, std::size_t>> transitions;
};

CheckedPath check_path(const json& sol, const std::vector<Statement>& table, std::size_t s0_size,
                       const SceneGeometry& geometry, std::size_t target, const std::string& label,
                       std::vector<std::string>& problems) {
    CheckedPath out;
    std::set<std::size_t> derived;
    std::set<std::size_t> used;
    const auto& steps = sol.at("steps");
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const auto& st = steps[i];
        std::string where = label + " step " + std::to_string(i) + ": ";
        auto premises = st.at("premises").get<std::vector<std::size_t>>();
        auto rule_name = st.at("rule").get<std::string>();
        auto conclusion = st.at("conclusion").get<std::size_t>();
        if (conclusion >= table.size() || conclusion < s0_size) {
            problems.push_back(where + "conclusion id out of range");
            continue;
        }
        if (premises.empty()) problems.push_back(where + "no premises");
        std::vector<Statement> prem;
        bool ok = true;
        for (auto p : premises) {
            if (p >= table.size()) {
                problems.push_back(where + "premise id out of range");
                ok = false;
                break;
            }
            if (p >= s0_size && !derived.count(p)) {
                problems.push_back(where + "premise " + std::to_string(p) + " is not established");
                ok = false;
            }
            if (p == conclusion) {
                problems.push_back(where + "conclusion among premises");
                ok = false;
            }
            if (p < s0_size) used.insert(p);
            prem.push_back(table[p]);
            out.statements.insert(p);
        }
        out.statements.insert(conclusion);
        if (derived.count(conclusion)) problems.push_back(where + "statement derived twice");
        derived.insert(conclusion);
        const Rule* rule = find_rule(rule_name);
        if (!rule) {
            problems.push_back(where + "unknown rule " + rule_name);
            continue;
        }
        if (ok) {
            auto results = derive_all(*rule, prem, geometry);
            if (std::find(results.begin(), results.end(), table[conclusion]) == results.end()) {
                problems.push_back(where + "rule " + rule_name + " does not yield " + serialize_statement(table[conclusion]));
            }
            if (!check_statement(geometry, table[conclusion]).holds) {
                problems.push_back(where + "conclusion fails numerically");
            }
        }
        out.transitions.emplace_back(premises, rule_name, conclusion);
    }
    if (steps.empty() || steps.back().at("conclusion").get<std::size_t>() != target) {
        problems.push_back(label + ": does not end at its target");
    }
    out.length = steps.size();
    out.premise_ratio = s0_size == 0 ? 0.0 : static_cast<double>(used.size()) / static_cast<double>(s0_size);
    if (std::abs(out.premise_ratio - sol.at("premise_ratio").get<double>()) > 1e-12) {
        problems.push_back(label + ": premise ratio does not match");
    }
    if (out.length != sol.at("length").get<std::size_t>()) problems.push_back(label + ": length does not match");
    return out;
}

}  // namespace

RecordVerdict verify_record(const json& record, const fs::path& dir) {
    RecordVerdict v;
    auto fail = [&](std::string msg) {
        v.ok = false;
        v.problems.push_back(std::move(msg));
    };
    try {
        v.id = record.at("id").get<std::string>();
        if (record.at("schema_version").get<int>() != kSchemaVersion) fail("unsupported schema version");

        json body = record;
        body.erase("id");
        body.erase("diagram");
        if (record_id(body) != v.id) fail("id does not match content");

        Scene scene = scene_from_json(record.at("scene"));
        if (!check_scene(scene.geometry, scene.initial).valid) fail("scene fails its own initial statements");
        const auto& g = scene.geometry;

        std::vector<Statement> table;
        for (const auto& s : record.at("statements")) table.push_back(parse_statement(s.get<std::string>(), g.size()));
        auto s0_size = record.at("s0_size").get<std::size_t>();
        if (s0_size != scene.initial.size() || s0_size > table.size()) {
            fail("initial statement count does not match the scene");
            return v;
        }
        for (std::size_t i = 0; i < s0_size; ++i) {
            if (table[i] != scene.initial[i]) fail("initial statement " + std::to_string(i) + " differs from the scene");
        }
        for (const auto& p : record.at("premises")) {
            if (p.at("id").get<std::size_t>() >= s0_size) fail("question premise is not an initial statement");
        }

        auto target = record.at("target").get<std::size_t>();
        if (target < s0_size || target >= table.size()) {
            fail("target id out of range");
            return v;
        }
        const auto& meta = record.at("metadata");
        Thresholds th{meta.at("tau_l").get<std::size_t>(), meta.at("tau_r").get<double>()};

        std::vector<CheckedPath> paths;
        const auto& sols = record.at("solutions");
        if (sols.empty()) fail("no solutions");
        for (std::size_t i = 0; i < sols.size(); ++i) {
            auto label = "solution " + std::to_string(i);
            paths.push_back(check_path(sols[i], table, s0_size, g, target, label, v.problems));
            if (paths.back().length < th.min_length) v.problems.push_back(label + ": shorter than tau_l");
            if (paths.back().premise_ratio < th.min_ratio) v.problems.push_back(label + ": premise ratio below tau_r");
        }
        if (!v.problems.empty()) v.ok = false;
        if (paths.empty()) return v;

        auto length = meta.at("reasoning_length").get<std::size_t>();
        if (length != paths.front().length) fail("reasoning_length does not match the first solution");
        if (std::abs(meta.at("premise_ratio").get<double>() - paths.front().premise_ratio) > 1e-12) {
            fail("premise_ratio does not match the first solution");
        }
        int tier = meta.at("tier").get<int>();
        int expected_tier = length >= 5 ? tier_of(length) : 0;
        if (tier != expected_tier) fail("tier " + std::to_string(tier) + " does not match length " + std::to_string(length));

        auto tmpl = template_from_name(record.at("template").get<std::string>());
        if (!tmpl) {
            fail("unknown template");
        } else if (*tmpl == ThinkingTemplate::Deductive && sols.size() != 1) {
            fail("deductive record must have one solution");
        } else if (*tmpl == ThinkingTemplate::MultiSolution) {
            if (sols.size() < 2) fail("multi-solution record needs at least two solutions");
            for (std::size_t i = 0; i < paths.size(); ++i) {
                for (std::size_t j = i + 1; j < paths.size(); ++j) {
                    auto a = paths[i].transitions, b = paths[j].transitions;
                    std::sort(a.begin(), a.end());
                    std::sort(b.begin(), b.end());
                    if (a == b) fail("solutions " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
                }
            }
        } else if (*tmpl == ThinkingTemplate::Traceback) {
            const auto& tb = record.at("traceback");
            if (tb.is_null()) {
                fail("traceback record without traceback");
            } else {
                auto wrong_target = tb.at("erroneous_target").get<std::size_t>();
                if (wrong_target < s0_size || wrong_target >= table.size()) {
                    fail("erroneous target out of range");
                } else {
                    auto wrong = check_path(tb.at("wrong_branch"), table, s0_size, g, wrong_target, "wrong branch",
                                            v.problems);
                    if (!v.problems.empty()) v.ok = false;
                    for (const auto& p : paths) {
                        if (p.statements.count(wrong_target)) fail("erroneous target lies on a correct path");
                    }
                    std::size_t shared = 0;
                    for (const auto& t : wrong.transitions) {
                        if (std::find(paths.front().transitions.begin(), paths.front().transitions.end(), t) !=
                            paths.front().transitions.end()) {
                            ++shared;
                        }
                    }
                    double overlap = wrong.transitions.empty()
                                         ? 0.0
                                         : static_cast<double>(shared) / static_cast<double>(wrong.transitions.size());
                    if (std::abs(overlap - tb.at("overlap").get<double>()) > 1e-12) fail("overlap does not match");
                    if (overlap < meta.at("tau_p").get<double>() || shared == 0) fail("overlap below tau_p");
                    auto bt = tb.at("backtrack_step").get<std::size_t>();
                    if (bt >= wrong.transitions.size() ||
                        std::find(paths.front().transitions.begin(), paths.front().transitions.end(),
                                  wrong.transitions[bt]) == paths.front().transitions.end()) {
                        fail("backtrack step is not shared with the correct path");
                    }
                }
            }
        }

        const Statement& tgt = table[target];
        auto kind = record.at("kind").get<std::string>();
        if (kind == "numeric") {
            if (!tgt.value()) {
                fail("numeric record with a value-free target");
            } else {
                auto answer = Rational::parse(record.at("answer").at("value").get<std::string>());
                if (!answer || *answer != *tgt.value()) fail("answer does not match the derived value");
                double key = tgt.value()->to_double();
                auto oracle = numeric_answer(g, tgt);
                if (std::abs(oracle.approx - key) > kOracleTolerance * std::abs(key)) {
                    fail("answer disagrees with the figure beyond 1%");
                }
                if (oracle.exact && *oracle.exact != *tgt.value()) fail("answer disagrees with the exact figure value");
                if (answer && std::abs(record.at("answer").at("approx").get<double>() - answer->to_double()) > 1e-12) {
                    fail("approximate answer does not match");
                }
            }
        } else if (kind == "proof") {
            if (record.at("answer").at("statement").get<std::string>() != serialize_statement(tgt)) {
                fail("proof answer is not the target");
            }
        } else {
            fail("unknown kind " + kind);
        }

        if (!dir.empty()) {
            std::ifstream svg(dir / record.at("diagram").get<std::string>(), std::ios::binary);
            if (!svg) {
                fail("diagram file missing");
            } else {
                std::stringstream ss;
                ss << svg.rdbuf();
                if (ss.str() != render_svg(scene)) fail("diagram does not match the scene");
            }
        }
    } catch (const json::exception& e) {
        fail(std::string("corrupt record: ") + e.what());
    } catch (const std::exception& e) {
        fail(std::string("corrupt record: ") + e.what());
    }
    return v;
}

std::vector<RecordVerdict> verify_dataset(const fs::path& dir) {
    auto records = load_records(dir);
    std::vector<RecordVerdict> out;
    for (const auto& r : records) out.push_back(verify_record(r, dir));
    return out;
}

// ---------------------------------------------------------------------------
// Test set, answers, stats
// ---------------------------------------------------------------------------

std::size_t curate_testset(const fs::path& dir, std::size_t per_tier) {
    auto records = load_records(dir);
    std::map<int, std::vector<const json*>> by_tier;
    for (const auto& r : records) {
        if (r.at("kind") != "numeric") continue;
        int tier = r.at("metadata").at("tier").get<int>();
        if (tier >= 1 && tier <= 4) by_tier[tier].push_back(&r);
    }
    for (int t = 1; t <= 4; ++t) {
        if (by_tier[t].size() < per_tier) throw InsufficientRecords(t, by_tier[t].size(), per_tier);
    }
    fs::create_directories(dir / "testset");
    std::ofstream test(dir / "testset" / "test.jsonl", std::ios::binary | std::ios::trunc);
    std::ofstream key(dir / "testset" / "key.jsonl", std::ios::binary | std::ios::trunc);
    std::size_t n = 0;
    for (int t = 1; t <= 4; ++t) {
        auto& v = by_tier[t];
        std::sort(v.begin(), v.end(), [](const json* a, const json* b) { return a->at("id") < b->at("id"); });
        for (std::size_t i = 0; i < per_tier; ++i) {
            const auto& r = *v[i];
            test << json{{"id", r["id"]}, {"tier", t}, {"question", r["question"]}, {"diagram", r["diagram"]}}.dump()
                 << "\n";
            key << json{{"id", r["id"]}, {"answer", r["answer"]["approx"]}, {"display", r["answer"]["display"]}}.dump()
                << "\n";
            ++n;
        }
    }
    if (!test || !key) throw std::runtime_error("cannot write test set");
    return n;
}

AnswerCheck check_answer(const std::string& predicted, double key) {
    static const std::regex re(R"([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?(?:\s*/\s*\d+(?:\.\d+)?)?)");
    AnswerCheck out;
    std::string last;
    for (std::sregex_iterator it(predicted.begin(), predicted.end(), re), end; it != end; ++it) last = it->str();
    if (last.empty()) return out;
    out.number_found = true;
    double value;
    if (auto slash = last.find('/'); slash != std::string::npos) {
        double den = std::strtod(last.c_str() + slash + 1, nullptr);
        if (den == 0.0) return out;
        value = std::strtod(last.substr(0, slash).c_str(), nullptr) / den;
    } else {
        value = std::strtod(last.c_str(), nullptr);
    }
    out.predicted = value;
    double err = std::abs(value - key);
    // the slack absorbs binary rounding of decimal inputs such as 5.05 vs 5
    out.correct = key == 0.0 ? err <= 0.01 + 1e-15 : err <= 0.01 * std::abs(key) * (1.0 + 1e-12);
    return out;
}

json dataset_stats(const std::vector<json>& records) {
    std::map<int, std::vector<const json*>> by_gen;
    for (const auto& r : records) by_gen[r.at("bootstrap_generation").get<int>()].push_back(&r);
    json gens = json::object();
    auto summarize = [](const std::vector<const json*>& rs) {
        std::map<std::size_t, std::size_t> lengths;
        std::map<std::string, std::size_t> ratios, tiers, templates, kinds;
        for (const auto* r : rs) {
            const auto& m = r->at("metadata");
            lengths[m.at("reasoning_length").get<std::size_t>()]++;
            double ratio = m.at("premise_ratio").get<double>();
            int bin = std::min(9, static_cast<int>(std::floor(ratio * 10.0 + 1e-9)));
            char label[16];
            std::snprintf(label, sizeof label, "%.1f-%.1f", bin / 10.0, (bin + 1) / 10.0);
            ratios[label]++;
            tiers[std::to_string(m.at("tier").get<int>())]++;
            templates[m.at("template").get<std::string>()]++;
            kinds[m.at("kind").get<std::string>()]++;
        }
        json len = json::array();
        for (auto [k, v] : lengths) len.push_back({{"length", k}, {"count", v}});
        std::vector<std::size_t> all;
        for (auto [k, v] : lengths) all.insert(all.end(), v, k);
        double median = 0.0;
        if (!all.empty()) {
            auto n = all.size();
            median = n % 2 ? static_cast<double>(all[n / 2]) : 0.5 * static_cast<double>(all[n / 2 - 1] + all[n / 2]);
        }
        return json{{"records", rs.size()},   {"length_histogram", len}, {"premise_ratio_histogram", ratios},
                    {"tiers", tiers},         {"templates", templates},  {"kinds", kinds},
                    {"median_length", median}};
    };
    std::vector<const json*> all;
    for (const auto& r : records) all.push_back(&r);
    for (const auto& [g, rs] : by_gen) gens[std::to_string(g)] = summarize(rs);
    return {{"overall", summarize(all)}, {"generations", gens}};
}

std::string stats_table(const json& stats) {
    std::ostringstream os;
    auto section = [&](const std::string& title, const json& s) {
        os << title << ": " << s["records"].get<std::size_t>() << " records, median length "
           << s["median_length"].get<double>() << "\n";
        os << "  length  count\n";
        for (const auto& bin : s["length_histogram"]) {
            os << "  " << bin["length"].get<std::size_t>() << "\t" << bin["count"].get<std::size_t>() << "\n";
        }
        os << "  premise ratio  count\n";
        for (const auto& [k, v] : s["premise_ratio_histogram"].items()) {
            os << "  " << k << "\t" << v.get<std::size_t>() << "\n";
        }
        os << "  tiers:";
        for (const auto& [k, v] : s["tiers"].items()) os << " " << k << "=" << v.get<std::size_t>();
        os << "\n  templates:";
        for (const auto& [k, v] : s["templates"].items()) os << " " << k << "=" << v.get<std::size_t>();
        os << "\n";
    };
    section("all", stats["overall"]);
    for (const auto& [g, s] : stats["generations"].items()) section("generation " + g, s);

    const auto& gens = stats["generations"];
    if (gens.size() >= 2) {
        // one column per generation
        std::map<std::size_t, std::map<std::string, std::size_t>> rows;
        for (const auto& [g, s] : gens.items()) {
            for (const auto& bin : s["length_histogram"]) {
                rows[bin["length"].get<std::size_t>()][g] = bin["count"].get<std::size_t>();
            }
        }
        os << "length by generation\n  length";
        for (const auto& [g, s] : gens.items()) os << "\tgen " << g;
        os << "\n";
        for (const auto& [len, counts] : rows) {
            os << "  " << len;
            for (const auto& [g, s] : gens.items()) {
                auto it = counts.find(g);
                os << "\t" << (it == counts.end() ? 0 : it->second);
            }
            os << "\n";
        }
    }
    return os.str();
}

}  // namespace geoforge
