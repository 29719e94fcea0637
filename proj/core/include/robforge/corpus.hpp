// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <robforge/domain.hpp>

namespace robforge {

/// A full-text trial report in plain UTF-8.
struct TrialDocument {
    std::string trial_id;
    std::string body;
    std::map<std::string, std::string> source_meta;
};

/// Reference-standard judgments for one trial, one label per domain.
struct GoldLabelSet {
    std::string trial_id;
    std::map<RobDomain, RiskLabel> labels;  // always exactly 7 entries
};

/// One supervised example for prompt optimization.
struct TrainingExample {
    RobDomain domain;
    std::string excerpt;
    std::string evidence_question;
    std::string evidence_span;
    std::string evaluative_question;
    RiskLabel label;
    std::string justification;
    /// Set when evidence_span is not a literal substring of excerpt
    /// (annotators may paraphrase; advisory, never an error).
    bool span_non_literal = false;
};

/// Balanced 18/12 train/validation split for one domain: 6 train and 4
/// validation examples per label, disjoint.
struct DatasetSplit {
    RobDomain domain;
    std::vector<TrainingExample> train;       // length 18
    std::vector<TrainingExample> validation;  // length 12
};

/// Loads trials from either a directory of *.txt files (trial_id = stem) or a
/// trials.jsonl manifest. Result is sorted lexicographically by trial_id.
std::vector<TrialDocument> load_corpus(const std::filesystem::path& path);

/// Writes the JSONL manifest form; load_corpus(write_corpus(x)) round-trips.
void write_corpus(const std::filesystem::path& path, const std::vector<TrialDocument>& docs);

/// Loads gold.jsonl; every record must carry all 7 domains.
std::vector<GoldLabelSet> load_gold(const std::filesystem::path& path);

/// Loads examples.jsonl (TrainingExample records, any mix of domains).
std::vector<TrainingExample> load_examples(const std::filesystem::path& path);

/// Deterministic balanced split: seeded per-label shuffle, then 6 train + 4
/// validation per label, sampled without replacement.
DatasetSplit build_split(RobDomain domain, const std::vector<TrainingExample>& pool,
                         std::uint64_t seed);

std::map<RiskLabel, long> label_distribution(const std::vector<GoldLabelSet>& golds,
                                             RobDomain domain);

}  // namespace robforge
