// Command-line front end: generate, bootstrap, curate, stats, verify, check.

#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "geoforge/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace geoforge;

namespace {

PipelineConfig load_config(const std::string& path) {
    if (path.empty()) return {};
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config " + path);
    return PipelineConfig::from_json(json::parse(in));
}

void apply_translator_flags(PipelineConfig& c, const std::string& translator, const std::string& endpoint,
                            const std::string& model) {
    if (!translator.empty()) c.translator = translator;
    if (!endpoint.empty()) c.llm_endpoint = endpoint;
    if (!model.empty()) c.llm_model = model;
}

void print_summary(const RunSummary& s) {
    for (const auto& line : s.log) std::cerr << line << "\n";
    std::cout << s.records << " records from " << s.scenes << " scenes (" << s.failed_scenes << " scenes failed)\n";
}

std::map<std::string, json> read_jsonl_by_id(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::map<std::string, json> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = json::parse(line);
        out[j.at("id").get<std::string>()] = j;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"geoforge: verified synthetic geometry problems"};
    app.require_subcommand(1);

    std::string config_path, out_dir, in_dir, translator, endpoint, model;
    std::uint64_t seed_start = 0, count = 0;
    double quantile = -1.0;
    int extra_steps = -1;
    std::size_t per_tier = 0;
    std::string pred_path, key_path;

    auto add_translator = [&](CLI::App* sub) {
        sub->add_option("--translator", translator, "template or external")->check(CLI::IsMember({"template", "external"}));
        sub->add_option("--llm-endpoint", endpoint, "chat-completion URL for the external translator");
        sub->add_option("--llm-model", model, "model name for the external translator");
    };

    auto* gen = app.add_subcommand("generate", "generate a dataset");
    gen->add_option("--config", config_path, "JSON config file");
    gen->add_option("--out", out_dir, "output directory")->required();
    auto* seed_opt = gen->add_option("--seed-start", seed_start, "first seed");
    auto* count_opt = gen->add_option("--count", count, "number of seeds (scenes)");
    add_translator(gen);

    auto* boot = app.add_subcommand("bootstrap", "extend the deepest scenes of a dataset");
    boot->add_option("--config", config_path, "JSON config file");
    boot->add_option("--in", in_dir, "prior dataset")->required();
    boot->add_option("--out", out_dir, "output directory")->required();
    boot->add_option("--quantile", quantile, "top fraction of scenes to extend");
    boot->add_option("--extra-steps", extra_steps, "constructions added per scene");
    add_translator(boot);

    auto* cur = app.add_subcommand("curate", "build a tiered numeric test set");
    cur->add_option("--in", in_dir, "dataset")->required();
    cur->add_option("--per-tier", per_tier, "records per tier")->required();

    auto* st = app.add_subcommand("stats", "length and premise-ratio distributions");
    std::vector<std::string> stats_dirs;
    st->add_option("--in", stats_dirs, "dataset(s); several directories are pooled")->required();
    bool as_json = false;
    st->add_flag("--json", as_json, "print JSON instead of tables");

    auto* ver = app.add_subcommand("verify", "re-verify every record");
    ver->add_option("--in", in_dir, "dataset")->required();

    auto* chk = app.add_subcommand("check", "score predictions against a key");
    chk->add_option("--pred", pred_path, "JSONL with id and prediction")->required();
    chk->add_option("--key", key_path, "JSONL with id and answer")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            auto c = load_config(config_path);
            if (seed_opt->count()) c.seed_start = seed_start;
            if (count_opt->count()) c.count = count;
            apply_translator_flags(c, translator, endpoint, model);
            print_summary(generate(c, out_dir));
        } else if (boot->parsed()) {
            auto c = load_config(config_path);
            if (quantile >= 0.0) c.bootstrap.quantile = quantile;
            if (extra_steps >= 0) c.bootstrap.extra_steps = extra_steps;
            apply_translator_flags(c, translator, endpoint, model);
            print_summary(bootstrap(c, in_dir, out_dir));
        } else if (cur->parsed()) {
            auto n = curate_testset(in_dir, per_tier);
            std::cout << n << " records written to " << (fs::path(in_dir) / "testset").string() << "\n";
        } else if (st->parsed()) {
            std::vector<json> records;
            for (const auto& d : stats_dirs) {
                auto more = load_records(d);
                records.insert(records.end(), more.begin(), more.end());
            }
            auto stats = dataset_stats(records);
            std::cout << (as_json ? stats.dump(2) + "\n" : stats_table(stats));
        } else if (ver->parsed()) {
            auto verdicts = verify_dataset(in_dir);
            std::size_t bad = 0;
            for (const auto& v : verdicts) {
                if (v.ok) continue;
                ++bad;
                for (const auto& p : v.problems) std::cout << v.id << ": " << p << "\n";
            }
            std::cout << verdicts.size() - bad << "/" << verdicts.size() << " records verified\n";
            return bad == 0 ? 0 : 1;
        } else if (chk->parsed()) {
            auto preds = read_jsonl_by_id(pred_path);
            auto keys = read_jsonl_by_id(key_path);
            std::size_t correct = 0, missing = 0, no_number = 0;
            for (const auto& [id, k] : keys) {
                auto it = preds.find(id);
                if (it == preds.end()) {
                    ++missing;
                    continue;
                }
                auto r = check_answer(it->second.at("prediction").get<std::string>(), k.at("answer").get<double>());
                if (!r.number_found) ++no_number;
                if (r.correct) ++correct;
            }
            std::cout << correct << "/" << keys.size() << " correct";
            if (!keys.empty()) std::cout << " (" << 100.0 * static_cast<double>(correct) / static_cast<double>(keys.size()) << "%)";
            std::cout << ", " << missing << " missing, " << no_number << " without a number\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
