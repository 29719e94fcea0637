// SPDX-License-Identifier: Apache-2.0

#include <robforge/optimizer.hpp>

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <robforge/jsonl.hpp>

namespace robforge {

namespace {

std::string candidate_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "c%04d", index);
    return buf;
}

std::string trim_copy(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

double PromptCandidate::mean_score() const {
    if (!scores || scores->empty()) throw UnscoredCandidate(candidate_id);
    return std::accumulate(scores->begin(), scores->end(), 0.0) /
           static_cast<double>(scores->size());
}

bool dominates(std::span<const double> a, std::span<const double> b) {
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return false;
        if (a[i] > b[i]) strict = true;
    }
    return strict;
}

bool ParetoFront::update(const PromptCandidate& candidate) {
    if (!candidate.scored()) throw UnscoredCandidate(candidate.candidate_id);
    const auto& scores = *candidate.scores;
    if (best_.empty()) best_.assign(scores.size(), 0.0);

    for (const auto& member : members_) {
        if (dominates(*member.scores, scores)) return false;
    }
    std::erase_if(members_, [&](const PromptCandidate& member) {
        return dominates(scores, *member.scores);
    });
    members_.push_back(candidate);
    for (std::size_t i = 0; i < scores.size(); ++i) best_[i] = std::max(best_[i], scores[i]);
    return true;
}

long ParetoFront::win_count(const PromptCandidate& member) const {
    long wins = 0;
    const auto& scores = *member.scores;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] == best_[i]) ++wins;
    }
    return wins;
}

void ExecutionTrace::append(const std::string& kind, nlohmann::json payload) {
    if (finished_) throw ConfigError("trace already finished: " + run_id_);
    Event event;
    event.seq = static_cast<long>(events_.size());
    event.kind = kind;
    event.payload = std::move(payload);
    if (kind == "finished") finished_ = true;
    events_.push_back(std::move(event));
}

long ExecutionTrace::count(const std::string& kind) const {
    return static_cast<long>(std::count_if(events_.begin(), events_.end(),
                                           [&](const Event& e) { return e.kind == kind; }));
}

void ExecutionTrace::save(const std::filesystem::path& path) const {
    std::vector<nlohmann::json> lines;
    lines.reserve(events_.size());
    for (const auto& e : events_) {
        lines.push_back(nlohmann::json{
            {"run_id", run_id_}, {"seq", e.seq}, {"kind", e.kind}, {"payload", e.payload}});
    }
    write_jsonl(path, lines);
}

ExecutionTrace ExecutionTrace::load(const std::filesystem::path& path) {
    auto lines = read_jsonl(path);
    ExecutionTrace trace(lines.empty() ? std::string{} : lines.front().at("run_id").get<std::string>());
    for (const auto& line : lines) {
        Event event;
        event.seq = line.at("seq").get<long>();
        event.kind = line.at("kind").get<std::string>();
        event.payload = line.at("payload");
        if (event.seq != static_cast<long>(trace.events_.size())) {
            throw MalformedRecord(path.string(), "trace events out of order");
        }
        trace.events_.push_back(std::move(event));
    }
    if (!trace.events_.empty() && trace.events_.back().kind == "finished") trace.finished_ = true;
    return trace;
}

void MetricBudget::tick(ExecutionTrace* trace) {
    if (used_ >= cap_) throw BudgetExceeded(used_, cap_);
    ++used_;
    if (trace) trace->append("budget_tick", {{"used", used_}, {"cap", cap_}});
}

ScoreOutcome score_candidate(const PromptCandidate& candidate,
                             const std::vector<TrainingExample>& examples, Gateway& gateway,
                             MetricBudget& budget, ExecutionTrace* trace,
                             const AssessOptions& options) {
    if (examples.empty()) throw EmptyInput();
    ScoreOutcome outcome;
    outcome.scores.reserve(examples.size());
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const TrainingExample& example = examples[i];
        budget.tick(trace);

        TrialDocument doc;
        doc.trial_id = candidate.candidate_id + "/ex" + std::to_string(i);
        doc.body = example.excerpt;
        AssessOptions opts = options;
        opts.group = doc.trial_id;

        std::optional<RiskLabel> predicted;
        std::string failure_note;
        try {
            predicted = assess_domain(doc, candidate.prompt, gateway, opts).risk_level;
        } catch (const BudgetExceeded&) {
            throw;
        } catch (const Error& e) {
            failure_note = e.code();
        }

        if (predicted && *predicted == example.label) {
            outcome.scores.push_back(1.0);
        } else {
            outcome.scores.push_back(0.0);
            std::ostringstream fb;
            fb << "Example " << i << ": ";
            if (predicted) {
                fb << "predicted \"" << to_string(*predicted) << "\" but the annotated label is \""
                   << to_string(example.label) << "\".";
            } else {
                fb << "assessment failed (" << failure_note << "); annotated label is \""
                   << to_string(example.label) << "\".";
            }
            fb << " Annotator justification: " << example.justification;
            fb << " Evidence span: " << example.evidence_span;
            outcome.feedback.push_back({i, fb.str()});
        }
    }
    return outcome;
}

const PromptCandidate& select_parent(const ParetoFront& front, std::mt19937_64& rng) {
    if (front.empty()) throw EmptyFront();
    const auto& members = front.members();
    std::vector<long> weights;
    weights.reserve(members.size());
    long total = 0;
    for (const auto& member : members) {
        long w = front.win_count(member);
        weights.push_back(w);
        total += w;
    }
    // Every per_instance_best value is attained by some member, so total > 0.
    std::uniform_int_distribution<long> dist(0, total - 1);
    long draw = dist(rng);
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (draw < weights[i]) return members[i];
        draw -= weights[i];
    }
    return members.back();
}

PromptCandidate reflect_mutate(const PromptCandidate& parent,
                               const std::vector<ScoreFeedback>& failures, Gateway& gateway,
                               const std::string& child_id, const DecodeParams& decode) {
    CompletionRequest request;
    request.role_tag = Role::reflection;
    request.decode = decode;
    request.group = child_id;
    request.system_text =
        "You refine instructions for an assistant that judges risk of bias in clinical trial "
        "reports. Read the current instruction and the failure feedback, then write an improved "
        "instruction. Reply with the improved instruction text only.";
    std::ostringstream user;
    user << "Current instruction:\n" << parent.prompt.instruction << "\n\n";
    if (failures.empty()) {
        user << "No failing examples were sampled. Propose a general improvement that makes the "
                "instruction more precise and more faithful to the assessment criteria.";
    } else {
        user << "Failure feedback:\n";
        for (const auto& f : failures) user << "- " << f.text << "\n";
    }
    request.user_text = user.str();

    std::string instruction;
    for (int attempt = 0; attempt < 2; ++attempt) {
        instruction = trim_copy(gateway.complete(request).text);
        if (!instruction.empty()) break;
    }
    if (instruction.empty()) throw EmptyReflection();

    PromptCandidate child;
    child.candidate_id = child_id;
    child.parent_id = parent.candidate_id;
    child.generation = parent.generation + 1;
    child.prompt = parent.prompt;
    child.prompt.instruction = instruction;
    child.prompt.version_id = child_id;
    return child;
}

OptimizationResult optimize(const DomainPrompt& seed_prompt, const DatasetSplit& split,
                            const OptimizationBudget& budget, Gateway& gateway,
                            std::uint64_t rng_seed, const OptimizerOptions& options) {
    std::string run_id =
        to_string(seed_prompt.domain) + "-s" + std::to_string(rng_seed);
    ExecutionTrace trace(run_id);
    MetricBudget meter(budget.metric_call_cap);
    std::mt19937_64 rng(rng_seed);

    std::vector<PromptCandidate> scored_pool;
    ParetoFront front;
    int next_index = 0;

    PromptCandidate seed;
    seed.candidate_id = candidate_name(next_index++);
    seed.generation = 0;
    seed.prompt = seed_prompt;
    seed.prompt.version_id = run_id + "/" + seed.candidate_id;

    trace.append("seeded", {{"candidate_id", seed.candidate_id},
                            {"domain", to_string(seed_prompt.domain)},
                            {"instruction", seed.prompt.instruction},
                            {"budget_cap", budget.metric_call_cap},
                            {"preset", budget.preset},
                            {"rng_seed", rng_seed}});

    auto record_scored = [&](PromptCandidate& candidate, const ScoreOutcome& outcome) {
        candidate.scores = outcome.scores;
        trace.append("scored", {{"candidate_id", candidate.candidate_id},
                                {"scores", outcome.scores},
                                {"mean", candidate.mean_score()}});
        scored_pool.push_back(candidate);
        bool admitted = front.update(candidate);
        nlohmann::json member_ids = nlohmann::json::array();
        for (const auto& m : front.members()) member_ids.push_back(m.candidate_id);
        trace.append("front_updated", {{"candidate_id", candidate.candidate_id},
                                       {"admitted", admitted},
                                       {"members", member_ids},
                                       {"per_instance_best", front.per_instance_best()}});
    };

    try {
        ScoreOutcome outcome =
            score_candidate(seed, split.validation, gateway, meter, &trace, options.assess);
        record_scored(seed, outcome);

        while (true) {
            PromptCandidate parent = select_parent(front, rng);
            trace.append("parent_selected", {{"candidate_id", parent.candidate_id}});

            // Failure mining on the training set: a seeded sample of examples
            // is re-scored (these are metric calls too) and the mismatch
            // feedback goes to the reflection model.
            std::vector<std::size_t> indices(split.train.size());
            std::iota(indices.begin(), indices.end(), std::size_t{0});
            std::shuffle(indices.begin(), indices.end(), rng);
            std::size_t batch = std::min<std::size_t>(
                static_cast<std::size_t>(options.reflection_batch), indices.size());
            std::vector<TrainingExample> mined;
            mined.reserve(batch);
            for (std::size_t i = 0; i < batch; ++i) mined.push_back(split.train[indices[i]]);

            ScoreOutcome mining =
                score_candidate(parent, mined, gateway, meter, &trace, options.assess);

            std::string child_id = candidate_name(next_index++);
            PromptCandidate child =
                reflect_mutate(parent, mining.feedback, gateway, child_id, options.assess.decode);
            child.prompt.version_id = run_id + "/" + child_id;
            trace.append("reflected", {{"parent_id", parent.candidate_id},
                                       {"failures_fed", mining.feedback.size()}});
            trace.append("child_proposed", {{"candidate_id", child.candidate_id},
                                            {"parent_id", parent.candidate_id},
                                            {"generation", child.generation},
                                            {"instruction", child.prompt.instruction}});

            ScoreOutcome outcome_child =
                score_candidate(child, split.validation, gateway, meter, &trace, options.assess);
            record_scored(child, outcome_child);
        }
    } catch (const BudgetExceeded&) {
        // normal termination
    } catch (const Error& e) {
        trace.append("finished", {{"status", "failed"},
                                  {"error", std::string(e.code()) + ": " + e.what()},
                                  {"metric_calls_used", meter.used()}});
        throw;
    }

    if (scored_pool.empty()) {
        trace.append("finished",
                     {{"status", "failed"}, {"error", "budget exhausted before the seed was scored"},
                      {"metric_calls_used", meter.used()}});
        throw BudgetExceeded(meter.used(), meter.cap());
    }

    const PromptCandidate* best = &scored_pool.front();
    for (const auto& candidate : scored_pool) {
        double mean = candidate.mean_score();
        double best_mean = best->mean_score();
        if (mean > best_mean ||
            (mean == best_mean && candidate.candidate_id < best->candidate_id)) {
            best = &candidate;
        }
    }

    trace.append("finished", {{"status", "ok"},
                              {"best_candidate_id", best->candidate_id},
                              {"best_mean", best->mean_score()},
                              {"metric_calls_used", meter.used()}});

    OptimizationResult result;
    result.best = *best;
    result.front = front;
    result.trace = std::move(trace);
    result.metric_calls_used = meter.used();
    return result;
}

StabilityOutcome stability_protocol(const DomainPrompt& seed_prompt, const DatasetSplit& split,
                                    const OptimizationBudget& budget, Gateway& gateway,
                                    int n_runs, std::uint64_t base_seed,
                                    const OptimizerOptions& options) {
    if (n_runs < 1) throw ConfigError("n_runs must be >= 1");
    StabilityOutcome outcome;
    for (int i = 0; i < n_runs; ++i) {
        std::uint64_t seed = base_seed + static_cast<std::uint64_t>(i);
        try {
            outcome.results.push_back(optimize(seed_prompt, split, budget, gateway, seed, options));
        } catch (const Error& e) {
            outcome.run_failures.push_back("seed " + std::to_string(seed) + ": " + e.code() + ": " +
                                           e.what());
        }
    }
    return outcome;
}

}  // namespace robforge
