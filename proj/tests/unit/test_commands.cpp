// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <robforge/commands.hpp>
#include <robforge/jsonl.hpp>

using namespace robforge;

namespace {

std::filesystem::path data_dir() { return ROBFORGE_TEST_DATA_DIR; }

std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("robforge_cmd_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

RunConfig mock_config(const std::filesystem::path& out) {
    RunConfig cfg;
    cfg.main_backend.model = "m-main";
    cfg.reflection_backend.model = "m-reflect";
    cfg.trials = data_dir() / "trials_small.jsonl";
    cfg.gold = data_dir() / "gold_small.jsonl";
    cfg.examples = data_dir() / "examples_d2.jsonl";
    cfg.mock_script = data_dir() / "mock_script.jsonl";
    cfg.output_dir = out;
    cfg.budget = OptimizationBudget::capped(40);
    cfg.n_runs = 1;
    cfg.n_evals = 2;
    return cfg;
}

}  // namespace

TEST_CASE("explicit output directories are used as-is; defaults are timestamped") {
    auto root = temp_dir("outdir");
    RunConfig cfg = mock_config(root);
    auto target = root / "explicit";
    CHECK(prepare_out_dir(cfg, target) == target);
    CHECK(std::filesystem::is_directory(target));

    auto stamped = prepare_out_dir(cfg, std::nullopt);
    CHECK(stamped.parent_path() == root);
    CHECK(stamped.filename().string().rfind("run-", 0) == 0);

    RunConfig bare;
    CHECK_THROWS_AS(prepare_out_dir(bare, std::nullopt), ConfigError);
}

TEST_CASE("the manifest digests every file except itself") {
    auto dir = temp_dir("manifest");
    std::ofstream(dir / "a.txt") << "alpha";
    std::ofstream(dir / "b.txt") << "beta";
    write_manifest(dir);
    auto doc = nlohmann::json::parse(read_file(dir / "manifest.json"));
    const auto& files = doc.at("files");
    CHECK(files.size() == 2);
    CHECK(files.at("a.txt") == fnv1a_hex("alpha"));
    CHECK(files.at("b.txt") == fnv1a_hex("beta"));
    CHECK(!files.contains("manifest.json"));
}

TEST_CASE("the command pipeline runs end to end against the scripted backend") {
    auto root = temp_dir("pipeline");
    RunConfig cfg = mock_config(root);

    auto opt = root / "opt";
    std::filesystem::create_directories(opt);
    CHECK(run_optimize(cfg, RobDomain::d2, opt) == kExitOk);
    auto artifact = opt / "prompt_D2_run0.json";
    REQUIRE(std::filesystem::exists(artifact));
    auto prompt_doc = nlohmann::json::parse(read_file(artifact));
    CHECK(prompt_doc.at("domain") == "D2");
    CHECK(!prompt_doc.at("lineage").empty());
    CHECK(std::filesystem::exists(opt / "trace_D2_run0.jsonl"));
    CHECK(std::filesystem::exists(opt / "manifest.json"));

    auto asr = root / "assess";
    std::filesystem::create_directories(asr);
    CHECK(run_assess(cfg, {artifact}, asr) == kExitOk);
    REQUIRE(std::filesystem::exists(asr / "assessments_rep1.jsonl"));
    REQUIRE(std::filesystem::exists(asr / "assessments_rep2.jsonl"));
    auto records = read_jsonl(asr / "assessments_rep1.jsonl");
    CHECK(records.size() == 20);
    CHECK(records[0].at("run_id") == "rep1");

    auto ev = root / "eval";
    std::filesystem::create_directories(ev);
    CHECK(run_evaluate(cfg, {asr / "assessments_rep1.jsonl", asr / "assessments_rep2.jsonl"}, ev) ==
          kExitOk);
    std::string csv = read_file(ev / "metrics.csv");
    CHECK(csv.rfind("model_pair,domain,metric,point,ci_low,ci_high,n,undefined_count", 0) == 0);
    CHECK(csv.find("m-main+m-reflect,D2,correct_rate,") != std::string::npos);
    CHECK(csv.find(",ALL,kappa,") != std::string::npos);
    CHECK(std::filesystem::exists(ev / "disagreements.jsonl"));

    auto cmp = root / "cmp";
    std::filesystem::create_directories(cmp);
    CHECK(run_compare({ev / "metrics.csv", ev / "metrics.csv"}, {"left", "right"}, cmp) == kExitOk);
    std::string table = read_file(cmp / "comparison.csv");
    CHECK(table.rfind("domain,left,right", 0) == 0);
    CHECK(table.find("\nmedian,") != std::string::npos);

    CHECK_THROWS_AS(run_compare({ev / "metrics.csv"}, {}, cmp), SchemaMismatch);
    CHECK_THROWS_AS(run_compare({ev / "metrics.csv", ev / "disagreements.jsonl"}, {}, cmp),
                    SchemaMismatch);
}

TEST_CASE("evaluate refuses assessments without gold labels") {
    auto root = temp_dir("missing_gold");
    RunConfig cfg = mock_config(root);
    auto file = root / "assessments.jsonl";
    {
        std::ofstream out(file);
        out << R"({"trial_id":"ghost","run_id":"rep1","judgments":{"D1":{"risk_level":"low","justification":"j","reasoning":"r","confidence":0.5,"raw_text":"x"}}})"
            << "\n";
    }
    CHECK_THROWS_AS(run_evaluate(cfg, {file}, root), MissingGold);
}
