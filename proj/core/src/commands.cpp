// SPDX-License-Identifier: Apache-2.0

#include <robforge/commands.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>
#include <set>
#include <sstream>

#include <robforge/assessment.hpp>
#include <robforge/corpus.hpp>
#include <robforge/evaluation.hpp>
#include <robforge/jsonl.hpp>
#include <robforge/optimizer.hpp>

namespace robforge {

namespace {

const char* kMetricNames[6] = {"correct_rate", "sensitivity", "specificity",
                               "ppv",          "npv",         "kappa"};

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string model_pair_label(const RunConfig& config) {
    auto name = [](const ModelSpec& spec) { return spec.model.empty() ? spec.kind : spec.model; };
    return name(config.main_backend) + "+" + name(config.reflection_backend);
}

std::vector<std::string> lineage_from_trace(const ExecutionTrace& trace,
                                            const std::string& best_id) {
    std::map<std::string, std::string> parent_of;
    std::string seed_id;
    for (const auto& event : trace.events()) {
        if (event.kind == "seeded") {
            seed_id = event.payload.at("candidate_id").get<std::string>();
        } else if (event.kind == "child_proposed") {
            parent_of[event.payload.at("candidate_id").get<std::string>()] =
                event.payload.at("parent_id").get<std::string>();
        }
    }
    std::vector<std::string> chain;
    std::string cursor = best_id;
    while (true) {
        chain.push_back(cursor);
        if (cursor == seed_id) break;
        auto it = parent_of.find(cursor);
        if (it == parent_of.end()) {
            throw MalformedRecord(trace.run_id(), "broken lineage at candidate " + cursor);
        }
        cursor = it->second;
    }
    std::reverse(chain.begin(), chain.end());
    return chain;
}

struct MetricRow {
    std::string model_pair;
    std::string domain;
    std::string metric;
    std::optional<double> point;
    std::optional<double> ci_low;
    std::optional<double> ci_high;
    long n = 0;
    long undefined_count = 0;
};

const MetricStat& stat_by_index(const MetricReport& report, int i) {
    switch (i) {
        case 0: return report.correct_rate;
        case 1: return report.sensitivity;
        case 2: return report.specificity;
        case 3: return report.ppv;
        case 4: return report.npv;
        default: return report.kappa;
    }
}

void write_metrics_csv(const std::filesystem::path& path, const std::string& model_pair,
                       const std::vector<MetricReport>& reports) {
    std::ofstream out(path);
    if (!out) throw MalformedRecord(path.string(), "cannot open for writing");
    out << "model_pair,domain,metric,point,ci_low,ci_high,n,undefined_count\n";
    for (const auto& report : reports) {
        for (int i = 0; i < 6; ++i) {
            const MetricStat& stat = stat_by_index(report, i);
            out << model_pair << ',' << report.domain_code << ',' << kMetricNames[i] << ',';
            if (stat.defined) {
                out << fmt6(stat.point) << ',' << fmt6(stat.ci_low) << ',' << fmt6(stat.ci_high);
            } else {
                out << "NA,NA,NA";
            }
            out << ',' << report.n << ',' << stat.undefined_resamples << '\n';
        }
    }
}

std::vector<MetricRow> read_metrics_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MalformedRecord(path.string(), "cannot open metrics file");
    std::string line;
    if (!std::getline(in, line)) throw SchemaMismatch(path.string() + ": empty file");
    if (line != "model_pair,domain,metric,point,ci_low,ci_high,n,undefined_count") {
        throw SchemaMismatch(path.string() + ": unexpected header: " + line);
    }
    std::vector<MetricRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 8) throw SchemaMismatch(path.string() + ": bad row: " + line);
        MetricRow row;
        row.model_pair = fields[0];
        row.domain = fields[1];
        row.metric = fields[2];
        auto parse_opt = [](const std::string& s) -> std::optional<double> {
            if (s == "NA") return std::nullopt;
            return std::stod(s);
        };
        row.point = parse_opt(fields[3]);
        row.ci_low = parse_opt(fields[4]);
        row.ci_high = parse_opt(fields[5]);
        row.n = std::stol(fields[6]);
        row.undefined_count = std::stol(fields[7]);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::unique_ptr<Gateway> make_gateway(const RunConfig& config) {
    auto backend_for = [&](const ModelSpec& spec,
                           std::shared_ptr<Backend> shared_mock) -> std::shared_ptr<Backend> {
        if (spec.kind == "mock") return shared_mock;
        return std::make_shared<HttpBackend>(spec.base_url, spec.model);
    };

    std::shared_ptr<Backend> shared_mock;
    if (config.main_backend.kind == "mock" || config.reflection_backend.kind == "mock") {
        if (config.mock_script.empty()) {
            throw ConfigError("mock backend selected but no mock script configured");
        }
        shared_mock = std::make_shared<MockBackend>(MockBackend::load_script(config.mock_script));
    }

    GatewayOptions options;
    options.parallelism = config.parallelism;
    return std::make_unique<Gateway>(backend_for(config.main_backend, shared_mock),
                                     backend_for(config.reflection_backend, shared_mock),
                                     config.main_backend.prices, config.reflection_backend.prices,
                                     options);
}

std::filesystem::path prepare_out_dir(const RunConfig& config,
                                      const std::optional<std::filesystem::path>& out_override) {
    std::filesystem::path dir;
    if (out_override) {
        dir = *out_override;
    } else {
        if (config.output_dir.empty()) throw ConfigError("no output directory (set paths.output_dir or pass --out)");
        auto stamp = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
        dir = config.output_dir / ("run-" + std::to_string(stamp));
    }
    std::filesystem::create_directories(dir);
    return dir;
}

void write_manifest(const std::filesystem::path& out_dir) {
    std::vector<std::string> names;
    for (const auto& entry : std::filesystem::directory_iterator(out_dir)) {
        if (!entry.is_regular_file()) continue;
        std::string name = entry.path().filename().string();
        if (name == "manifest.json") continue;
        names.push_back(std::move(name));
    }
    std::sort(names.begin(), names.end());
    nlohmann::json files = nlohmann::json::object();
    for (const auto& name : names) files[name] = fnv1a_hex(read_file(out_dir / name));
    std::ofstream out(out_dir / "manifest.json");
    out << nlohmann::json{{"files", files}}.dump(2) << '\n';
}

int run_optimize(const RunConfig& config, RobDomain domain,
                 const std::filesystem::path& out_dir) {
    if (config.examples.empty() || !std::filesystem::exists(config.examples)) {
        throw InsufficientExamples(to_string(domain), 0, 10);
    }
    auto pool = load_examples(config.examples);
    DatasetSplit split = build_split(domain, pool, static_cast<std::uint64_t>(config.decode.seed));

    auto gateway = make_gateway(config);
    OptimizerOptions options;
    options.assess.decode = config.decode;

    DomainPrompt seed = default_seed_prompt(domain);
    StabilityOutcome outcome =
        stability_protocol(seed, split, config.budget, *gateway, config.n_runs,
                           static_cast<std::uint64_t>(config.decode.seed), options);

    nlohmann::json summary{{"domain", to_string(domain)},
                           {"n_runs", config.n_runs},
                           {"runs", nlohmann::json::array()},
                           {"failures", outcome.run_failures}};
    for (std::size_t i = 0; i < outcome.results.size(); ++i) {
        const OptimizationResult& result = outcome.results[i];
        std::string tag = to_string(domain) + "_run" + std::to_string(i);
        auto lineage = lineage_from_trace(result.trace, result.best.candidate_id);
        {
            std::ofstream out(out_dir / ("prompt_" + tag + ".json"));
            out << prompt_to_json(result.best.prompt, lineage).dump(2) << '\n';
        }
        result.trace.save(out_dir / ("trace_" + tag + ".jsonl"));
        summary["runs"].push_back({{"run_id", result.trace.run_id()},
                                   {"best_candidate_id", result.best.candidate_id},
                                   {"best_mean", result.best.mean_score()},
                                   {"metric_calls_used", result.metric_calls_used}});
    }
    {
        std::ofstream out(out_dir / "optimize_summary.json");
        out << summary.dump(2) << '\n';
    }
    {
        LedgerReport report = gateway->ledger().report();
        std::ofstream out(out_dir / "ledger.json");
        out << nlohmann::json{{"main_usd", format_usd(report.main_usd)},
                              {"reflection_usd", format_usd(report.reflection_usd)},
                              {"wall_minutes", report.wall_minutes},
                              {"calls", gateway->ledger().size()}}
                   .dump(2)
            << '\n';
    }
    write_manifest(out_dir);
    return outcome.results.empty() ? kExitPartial
                                   : (outcome.run_failures.empty() ? kExitOk : kExitPartial);
}

int run_assess(const RunConfig& config, const std::vector<std::filesystem::path>& artifact_paths,
               const std::filesystem::path& out_dir) {
    if (artifact_paths.empty()) throw ConfigError("assess needs at least one prompt artifact");
    std::vector<DomainPrompt> prompts;
    for (const auto& path : artifact_paths) {
        std::ifstream in(path);
        if (!in) throw MalformedRecord(path.string(), "cannot open prompt artifact");
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::exception& e) {
            throw MalformedRecord(path.string(), e.what());
        }
        prompts.push_back(prompt_from_json(doc));
    }

    auto trials = load_corpus(config.trials);
    auto gateway = make_gateway(config);
    AssessOptions options;
    options.decode = config.decode;

    std::atomic<bool> any_failure{false};
    for (int rep = 1; rep <= config.n_evals; ++rep) {
        std::string run_id = "rep" + std::to_string(rep);
        std::vector<nlohmann::json> lines(trials.size());

        auto assess_one = [&](std::size_t i) {
            try {
                TrialAssessment assessment =
                    assess_trial(trials[i], prompts, *gateway, options, run_id);
                if (!assessment.failures.empty()) any_failure = true;
                lines[i] = assessment_to_json(assessment);
            } catch (const Error& e) {
                any_failure = true;
                lines[i] = nlohmann::json{{"trial_id", trials[i].trial_id},
                                          {"run_id", run_id},
                                          {"error", std::string(e.code()) + ": " + e.what()}};
            }
        };

        if (config.parallelism <= 1) {
            for (std::size_t i = 0; i < trials.size(); ++i) assess_one(i);
        } else {
            std::size_t next = 0;
            while (next < trials.size()) {
                std::vector<std::future<void>> batch;
                for (int k = 0; k < config.parallelism && next < trials.size(); ++k, ++next) {
                    batch.push_back(std::async(std::launch::async, assess_one, next));
                }
                for (auto& f : batch) f.get();
            }
        }
        write_jsonl(out_dir / ("assessments_" + run_id + ".jsonl"), lines);
    }
    write_manifest(out_dir);
    return any_failure ? kExitPartial : kExitOk;
}

int run_evaluate(const RunConfig& config,
                 const std::vector<std::filesystem::path>& assessment_paths,
                 const std::filesystem::path& out_dir) {
    if (assessment_paths.empty()) throw ConfigError("evaluate needs at least one assessments file");
    auto golds = load_gold(config.gold);
    std::map<std::string, const GoldLabelSet*> gold_by_trial;
    for (const auto& g : golds) gold_by_trial[g.trial_id] = &g;

    // pairs[rep][domain]
    std::vector<std::map<RobDomain, std::vector<LabeledPair>>> rep_pairs;
    std::vector<nlohmann::json> disagreement_lines;
    for (const auto& path : assessment_paths) {
        std::map<RobDomain, std::vector<LabeledPair>> by_domain;
        for (const auto& rec : read_jsonl(path)) {
            if (rec.contains("error")) continue;  // per-trial failure record
            TrialAssessment assessment = assessment_from_json(rec);
            auto gold_it = gold_by_trial.find(assessment.trial_id);
            if (gold_it == gold_by_trial.end()) throw MissingGold(assessment.trial_id);
            for (const auto& [domain, judgment] : assessment.judgments) {
                LabeledPair pair;
                pair.trial_id = assessment.trial_id;
                pair.domain = domain;
                pair.gold = gold_it->second->labels.at(domain);
                pair.predicted = judgment.risk_level;
                by_domain[domain].push_back(pair);
            }
        }
        rep_pairs.push_back(std::move(by_domain));
    }

    std::set<RobDomain> domains;
    for (const auto& rep : rep_pairs) {
        for (const auto& [domain, pairs] : rep) domains.insert(domain);
    }

    auto seed = static_cast<std::uint64_t>(config.decode.seed);
    std::vector<MetricReport> final_reports;
    for (RobDomain domain : domains) {
        std::vector<MetricReport> per_rep;
        for (const auto& rep : rep_pairs) {
            auto it = rep.find(domain);
            if (it == rep.end() || it->second.empty()) continue;
            per_rep.push_back(compute_report(it->second, to_string(domain), kBootstrapResamples, seed));
        }
        if (per_rep.empty()) continue;
        final_reports.push_back(per_rep.size() == 1 ? per_rep.front() : aggregate_runs(per_rep));
    }
    {
        std::vector<MetricReport> pooled_reps;
        for (const auto& rep : rep_pairs) {
            std::vector<LabeledPair> all;
            for (const auto& [domain, pairs] : rep) all.insert(all.end(), pairs.begin(), pairs.end());
            if (!all.empty()) pooled_reps.push_back(compute_report(all, "ALL", kBootstrapResamples, seed));
        }
        if (!pooled_reps.empty()) {
            final_reports.push_back(pooled_reps.size() == 1 ? pooled_reps.front()
                                                            : aggregate_runs(pooled_reps));
        }
    }

    for (std::size_t rep = 0; rep < rep_pairs.size(); ++rep) {
        for (const auto& [domain, pairs] : rep_pairs[rep]) {
            DisagreementTable table = disagreement_table(pairs);
            for (const auto& record : table.records) {
                disagreement_lines.push_back(
                    {{"rep", rep + 1},
                     {"trial_id", record.pair.trial_id},
                     {"domain", to_string(record.pair.domain)},
                     {"gold", to_string(record.pair.gold)},
                     {"predicted", to_string(record.pair.predicted)},
                     {"direction", to_string(record.direction)}});
            }
        }
    }

    write_metrics_csv(out_dir / "metrics.csv", model_pair_label(config), final_reports);
    write_jsonl(out_dir / "disagreements.jsonl", disagreement_lines);
    write_manifest(out_dir);
    return kExitOk;
}

int run_compare(const std::vector<std::filesystem::path>& metric_paths,
                std::vector<std::string> labels, const std::filesystem::path& out_dir) {
    if (metric_paths.size() < 2) throw SchemaMismatch("compare needs at least 2 metric files");
    if (labels.empty()) {
        for (const auto& path : metric_paths) labels.push_back(path.stem().string());
    }
    if (labels.size() != metric_paths.size()) {
        throw SchemaMismatch("labels count does not match metric files count");
    }

    // per system: domain -> correct_rate point
    std::vector<std::map<std::string, double>> systems;
    for (const auto& path : metric_paths) {
        std::map<std::string, double> rates;
        for (const auto& row : read_metrics_csv(path)) {
            if (row.metric != "correct_rate" || row.domain == "ALL" || !row.point) continue;
            rates[row.domain] = *row.point;
        }
        if (rates.empty()) throw SchemaMismatch(path.string() + ": no correct_rate rows");
        systems.push_back(std::move(rates));
    }

    std::set<std::string> domains;
    for (const auto& rates : systems) {
        for (const auto& [domain, rate] : rates) domains.insert(domain);
    }

    std::ofstream out(out_dir / "comparison.csv");
    if (!out) throw MalformedRecord((out_dir / "comparison.csv").string(), "cannot open for writing");
    out << "domain";
    for (const auto& label : labels) out << ',' << label;
    out << '\n';
    for (const auto& domain : domains) {
        out << domain;
        for (const auto& rates : systems) {
            auto it = rates.find(domain);
            out << ',' << (it == rates.end() ? "NA" : fmt6(it->second));
        }
        out << '\n';
    }
    out << "median";
    for (const auto& rates : systems) {
        std::vector<double> points;
        for (const auto& [domain, rate] : rates) points.push_back(rate);
        std::sort(points.begin(), points.end());
        std::size_t n = points.size();
        double median = n % 2 == 1 ? points[n / 2] : 0.5 * (points[n / 2 - 1] + points[n / 2]);
        out << ',' << fmt6(median);
    }
    out << '\n';
    return kExitOk;
}

}  // namespace robforge
