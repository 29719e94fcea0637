// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <robforge/domain.hpp>

namespace robforge {

/// One (gold, predicted) observation for a trial and domain.
struct LabeledPair {
    std::string trial_id;
    RobDomain domain = RobDomain::d1;
    RiskLabel gold = RiskLabel::low;
    RiskLabel predicted = RiskLabel::low;
};

/// Full 3x3 confusion matrix (gold x predicted) plus the low-vs-non-low
/// binarization used by sensitivity/specificity/PPV/NPV.
struct ConfusionCounts {
    long full[3][3] = {};  // [gold][predicted], indexed by RiskLabel
    long tp = 0;           // gold low, predicted low
    long fn = 0;           // gold low, predicted non-low
    long fp = 0;           // gold non-low, predicted low
    long tn = 0;           // gold non-low, predicted non-low

    long total() const;
    /// Re-derives the binarized counts from the full matrix; used to check
    /// the construction invariant.
    static ConfusionCounts from_full(const long (&full)[3][3]);
};

/// Builds counts from pairs of a single domain. EmptyInput / MixedDomains.
ConfusionCounts confusion(const std::vector<LabeledPair>& pairs);

/// Same, but pools across domains (used for the overall row).
ConfusionCounts confusion_pooled(const std::vector<LabeledPair>& pairs);

// Rates under the low-positive binarization. nullopt on zero denominator;
// undefined is a value, never NaN.
std::optional<double> sensitivity(const ConfusionCounts& c);   // tp / (tp + fn)
std::optional<double> specificity(const ConfusionCounts& c);   // tn / (tn + fp)
std::optional<double> ppv(const ConfusionCounts& c);           // tp / (tp + fp)
std::optional<double> npv(const ConfusionCounts& c);           // tn / (tn + fn)

/// Three-class exact-match fraction.
double correct_rate(const std::vector<LabeledPair>& pairs);
double correct_rate(const ConfusionCounts& c);

/// Three-class Cohen's kappa with expected agreement from marginal
/// products. Degenerate pe = 1 resolves to 1 when po = 1, else 0.
double cohen_kappa(const std::vector<LabeledPair>& pairs);
double cohen_kappa(const ConfusionCounts& c);

/// A statistic over a pair sample; nullopt marks "undefined on this sample".
using Statistic = std::function<std::optional<double>(const std::vector<LabeledPair>&)>;

struct BootstrapResult {
    double ci_low = 0.0;
    double ci_high = 0.0;
    long undefined_dropped = 0;
    std::vector<double> resample_values;  // defined resamples only
};

/// Nonparametric percentile bootstrap (2.5th / 97.5th) over trial-level
/// resamples with replacement. Deterministic given seed; per-resample
/// generators derive from (seed, resample_index). Resamples where the
/// statistic is undefined are dropped and counted.
BootstrapResult bootstrap_ci(const Statistic& statistic, const std::vector<LabeledPair>& pairs,
                             long n_resamples, std::uint64_t seed);

struct MetricStat {
    double point = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    bool defined = false;
    long undefined_resamples = 0;
    std::vector<double> resamples;  // carried for pooled multi-run CIs
};

struct MetricReport {
    std::string domain_code;  // "D1".."D7" or "ALL"
    long n = 0;
    MetricStat correct_rate;
    MetricStat sensitivity;
    MetricStat specificity;
    MetricStat ppv;
    MetricStat npv;
    MetricStat kappa;
};

inline constexpr int kBootstrapResamples = 2000;

/// All six metrics with bootstrap CIs over one pair sample.
MetricReport compute_report(const std::vector<LabeledPair>& pairs, const std::string& domain_code,
                            long n_resamples = kBootstrapResamples, std::uint64_t seed = 42);

/// Multi-run aggregation: point estimates averaged over runs where defined;
/// CIs recomputed from the pooled per-run resample values, never by
/// averaging interval endpoints.
MetricReport aggregate_runs(const std::vector<MetricReport>& reports);

enum class DisagreementDirection {
    conservative_downgrade,  // gold in {low, high}, predicted unclear
    upgrade,                 // gold unclear, predicted in {low, high}
    polarity_flip,           // low <-> high
};

std::string to_string(DisagreementDirection direction);

struct DisagreementRecord {
    LabeledPair pair;
    DisagreementDirection direction = DisagreementDirection::conservative_downgrade;
};

struct DisagreementTable {
    std::vector<DisagreementRecord> records;
    std::map<DisagreementDirection, long> summary;
};

/// One record per non-matching pair; the three directions partition them.
DisagreementTable disagreement_table(const std::vector<LabeledPair>& pairs);

}  // namespace robforge
