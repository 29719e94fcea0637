// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <robforge/assessment.hpp>
#include <robforge/corpus.hpp>
#include <robforge/gateway.hpp>

namespace robforge {

/// One point in the search space: a prompt plus its lineage and (once
/// evaluated) its per-validation-instance score vector.
struct PromptCandidate {
    std::string candidate_id;
    std::optional<std::string> parent_id;
    int generation = 0;
    DomainPrompt prompt;
    std::optional<std::vector<double>> scores;

    bool scored() const { return scores.has_value(); }
    double mean_score() const;
};

/// True when a is at least b on every instance and strictly better on one.
bool dominates(std::span<const double> a, std::span<const double> b);

/// Set of mutually non-dominated candidates plus the element-wise best score
/// attained on each validation instance. Equal to brute-force dominance
/// filtering over every candidate ever offered.
class ParetoFront {
public:
    /// Offers a scored candidate. Admits it unless some member dominates it;
    /// members the newcomer dominates are evicted. Returns whether it was
    /// admitted. Throws UnscoredCandidate for unscored input.
    bool update(const PromptCandidate& candidate);

    const std::vector<PromptCandidate>& members() const { return members_; }
    const std::vector<double>& per_instance_best() const { return best_; }
    bool empty() const { return members_.empty(); }

    /// Number of instances on which the member attains per_instance_best.
    long win_count(const PromptCandidate& member) const;

private:
    std::vector<PromptCandidate> members_;
    std::vector<double> best_;
};

/// Append-only, replayable event log of one optimization run. Event
/// timestamps are logical sequence numbers so identical runs serialize
/// byte-identically.
class ExecutionTrace {
public:
    struct Event {
        long seq = 0;
        std::string kind;  // seeded|scored|parent_selected|reflected|child_proposed|front_updated|budget_tick|finished
        nlohmann::json payload;
    };

    explicit ExecutionTrace(std::string run_id = {}) : run_id_(std::move(run_id)) {}

    void append(const std::string& kind, nlohmann::json payload);
    const std::vector<Event>& events() const { return events_; }
    const std::string& run_id() const { return run_id_; }
    long count(const std::string& kind) const;

    void save(const std::filesystem::path& path) const;
    static ExecutionTrace load(const std::filesystem::path& path);

private:
    std::string run_id_;
    std::vector<Event> events_;
    bool finished_ = false;
};

struct OptimizationBudget {
    long metric_call_cap = 428;
    std::string preset = "light";

    static OptimizationBudget light() { return {428, "light"}; }
    static OptimizationBudget capped(long cap) { return {cap, "cap"}; }
};

/// Counts metric calls against the cap; throws BudgetExceeded before the
/// call that would cross it. One budget_tick trace event per consumed call.
class MetricBudget {
public:
    explicit MetricBudget(long cap) : cap_(cap) {}

    void tick(ExecutionTrace* trace);
    long used() const { return used_; }
    long cap() const { return cap_; }

private:
    long cap_;
    long used_ = 0;
};

struct ScoreFeedback {
    std::size_t example_index = 0;
    std::string text;
};

struct ScoreOutcome {
    std::vector<double> scores;             // 1.0 on gold-label match, else 0.0
    std::vector<ScoreFeedback> feedback;    // one entry per mismatch
};

struct OptimizerOptions {
    int reflection_batch = 4;  // training failures sampled per generation
    AssessOptions assess;
};

/// Scores a candidate on a set of examples. Every element consumes one
/// metric call; on BudgetExceeded the partial vector is discarded (never
/// returned) and the exception propagates.
ScoreOutcome score_candidate(const PromptCandidate& candidate,
                             const std::vector<TrainingExample>& examples, Gateway& gateway,
                             MetricBudget& budget, ExecutionTrace* trace = nullptr,
                             const AssessOptions& options = {});

/// Samples a front member with probability proportional to the number of
/// instances on which it attains per_instance_best.
const PromptCandidate& select_parent(const ParetoFront& front, std::mt19937_64& rng);

/// One reflection-role completion over the parent instruction and sampled
/// failure feedback; the response becomes the child instruction. The paired
/// questions are inherited unchanged and the child starts unscored.
PromptCandidate reflect_mutate(const PromptCandidate& parent,
                               const std::vector<ScoreFeedback>& failures, Gateway& gateway,
                               const std::string& child_id, const DecodeParams& decode = {});

struct OptimizationResult {
    PromptCandidate best;
    ParetoFront front;
    ExecutionTrace trace;
    long metric_calls_used = 0;
};

/// The generation loop: score the seed, then repeat select_parent ->
/// failure mining on the training set -> reflect_mutate -> score the child
/// on validation -> pareto update, until the metric-call budget is
/// exhausted. Best = maximum mean validation score, ties broken by earliest
/// candidate_id.
OptimizationResult optimize(const DomainPrompt& seed_prompt, const DatasetSplit& split,
                            const OptimizationBudget& budget, Gateway& gateway,
                            std::uint64_t rng_seed, const OptimizerOptions& options = {});

struct StabilityOutcome {
    std::vector<OptimizationResult> results;
    std::vector<std::string> run_failures;  // per-run error notes
};

/// n_runs optimizations under identical settings with rng seeds
/// {base, base+1, ...}; failed runs are recorded, surviving runs returned.
StabilityOutcome stability_protocol(const DomainPrompt& seed_prompt, const DatasetSplit& split,
                                    const OptimizationBudget& budget, Gateway& gateway,
                                    int n_runs, std::uint64_t base_seed,
                                    const OptimizerOptions& options = {});

}  // namespace robforge
