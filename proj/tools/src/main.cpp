// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <robforge/commands.hpp>

namespace {

void print_error(const std::string& code, const std::string& message) {
    std::cerr << nlohmann::json{{"error", {{"code", code}, {"message", message}}}}.dump() << '\n';
}

struct CommonArgs {
    std::string config;
    std::string budget;
    bool mock = false;
    int n_runs = 0;   // 0 = keep config value
    int n_evals = 0;
    std::string out;
};

void add_common(CLI::App* sub, CommonArgs& args) {
    sub->add_option("--config", args.config, "TOML run configuration");
    sub->add_option("--budget", args.budget, "optimization budget: light or cap=N");
    sub->add_flag("--mock", args.mock, "force the scripted mock backend for both roles");
    sub->add_option("--n-runs", args.n_runs, "optimization repetitions")->check(CLI::PositiveNumber);
    sub->add_option("--n-evals", args.n_evals, "assessment repetitions")->check(CLI::PositiveNumber);
    sub->add_option("--out", args.out, "output directory (used as-is)");
}

robforge::RunConfig resolve_config(const CommonArgs& args) {
    robforge::RunConfig cfg =
        args.config.empty() ? robforge::RunConfig{} : robforge::load_config(args.config);
    if (args.mock) {
        cfg.main_backend.kind = "mock";
        cfg.reflection_backend.kind = "mock";
    }
    if (!args.budget.empty()) cfg.budget = robforge::parse_budget(args.budget);
    if (args.n_runs > 0) cfg.n_runs = args.n_runs;
    if (args.n_evals > 0) cfg.n_evals = args.n_evals;
    return cfg;
}

std::optional<std::filesystem::path> out_override(const CommonArgs& args) {
    if (args.out.empty()) return std::nullopt;
    return std::filesystem::path(args.out);
}

std::vector<std::filesystem::path> to_paths(const std::vector<std::string>& raw) {
    return {raw.begin(), raw.end()};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"robforge: programmatic risk-of-bias assessment for clinical trial reports"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string domain_text;
    std::vector<std::string> inputs;
    std::vector<std::string> labels;

    CLI::App* optimize = app.add_subcommand("optimize", "evolve a domain prompt against examples");
    add_common(optimize, args);
    optimize->add_option("--domain", domain_text, "RoB domain (D1..D7)")->required();

    CLI::App* assess = app.add_subcommand("assess", "apply prompt artifacts to a trial corpus");
    add_common(assess, args);
    assess->add_option("artifacts", inputs, "prompt artifact files")->required();

    CLI::App* evaluate = app.add_subcommand("evaluate", "score assessments against gold labels");
    add_common(evaluate, args);
    evaluate->add_option("assessments", inputs, "assessments JSONL files")->required();

    CLI::App* compare = app.add_subcommand("compare", "side-by-side table over metrics files");
    add_common(compare, args);
    compare->add_option("metrics", inputs, "metrics.csv files (>= 2)")->required();
    compare->add_option("--labels", labels, "column label per metrics file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("UsageError", e.what());
        return robforge::kExitUsage;
    }

    try {
        if (compare->parsed()) {
            std::filesystem::path out_dir = args.out.empty() ? "." : std::filesystem::path(args.out);
            std::filesystem::create_directories(out_dir);
            return robforge::run_compare(to_paths(inputs), labels, out_dir);
        }
        robforge::RunConfig cfg = resolve_config(args);
        std::filesystem::path out_dir = robforge::prepare_out_dir(cfg, out_override(args));
        if (optimize->parsed()) {
            return robforge::run_optimize(cfg, robforge::parse_domain(domain_text), out_dir);
        }
        if (assess->parsed()) return robforge::run_assess(cfg, to_paths(inputs), out_dir);
        return robforge::run_evaluate(cfg, to_paths(inputs), out_dir);
    } catch (const robforge::Error& e) {
        print_error(e.code(), e.what());
        return robforge::kExitUsage;
    } catch (const std::exception& e) {
        print_error("InternalError", e.what());
        return robforge::kExitUsage;
    }
}
