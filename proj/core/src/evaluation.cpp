// SPDX-License-Identifier: Apache-2.0

#include <robforge/evaluation.hpp>

#include <algorithm>
#include <cmath>
#include <random>

namespace robforge {

namespace {

inline int idx(RiskLabel label) { return static_cast<int>(label); }

constexpr int kLow = 0;

/// splitmix64; decorrelates (seed, resample_index) into a generator seed.
std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double percentile(const std::vector<double>& sorted, double q) {
    if (sorted.size() == 1) return sorted.front();
    double pos = q * static_cast<double>(sorted.size() - 1);
    auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

ConfusionCounts counts_from(const std::vector<LabeledPair>& pairs, bool check_domain) {
    if (pairs.empty()) throw EmptyInput();
    if (check_domain) {
        for (const auto& p : pairs) {
            if (p.domain != pairs.front().domain) throw MixedDomains();
        }
    }
    long full[3][3] = {};
    for (const auto& p : pairs) full[idx(p.gold)][idx(p.predicted)] += 1;
    return ConfusionCounts::from_full(full);
}

MetricStat make_stat(const Statistic& statistic, const std::vector<LabeledPair>& pairs,
                     long n_resamples, std::uint64_t seed) {
    MetricStat stat;
    auto point = statistic(pairs);
    stat.defined = point.has_value();
    if (point) stat.point = *point;
    try {
        BootstrapResult ci = bootstrap_ci(statistic, pairs, n_resamples, seed);
        stat.ci_low = ci.ci_low;
        stat.ci_high = ci.ci_high;
        stat.undefined_resamples = ci.undefined_dropped;
        stat.resamples = std::move(ci.resample_values);
    } catch (const AllResamplesUndefined&) {
        stat.defined = false;
        stat.undefined_resamples = n_resamples;
    }
    return stat;
}

MetricStat aggregate_stat(std::vector<const MetricStat*> stats) {
    MetricStat out;
    double sum = 0.0;
    long defined = 0;
    for (const auto* s : stats) {
        if (s->defined) {
            sum += s->point;
            ++defined;
        }
        out.undefined_resamples += s->undefined_resamples;
        out.resamples.insert(out.resamples.end(), s->resamples.begin(), s->resamples.end());
    }
    if (defined > 0) {
        out.defined = true;
        out.point = sum / static_cast<double>(defined);
    }
    if (!out.resamples.empty()) {
        std::vector<double> sorted = out.resamples;
        std::sort(sorted.begin(), sorted.end());
        out.ci_low = percentile(sorted, 0.025);
        out.ci_high = percentile(sorted, 0.975);
    }
    return out;
}

}  // namespace

long ConfusionCounts::total() const {
    long t = 0;
    for (const auto& row : full) {
        for (long c : row) t += c;
    }
    return t;
}

ConfusionCounts ConfusionCounts::from_full(const long (&full)[3][3]) {
    ConfusionCounts c;
    for (int g = 0; g < 3; ++g) {
        for (int p = 0; p < 3; ++p) c.full[g][p] = full[g][p];
    }
    c.tp = full[kLow][kLow];
    for (int p = 0; p < 3; ++p) {
        if (p != kLow) c.fn += full[kLow][p];
    }
    for (int g = 0; g < 3; ++g) {
        if (g == kLow) continue;
        c.fp += full[g][kLow];
        for (int p = 0; p < 3; ++p) {
            if (p != kLow) c.tn += full[g][p];
        }
    }
    return c;
}

ConfusionCounts confusion(const std::vector<LabeledPair>& pairs) { return counts_from(pairs, true); }

ConfusionCounts confusion_pooled(const std::vector<LabeledPair>& pairs) {
    return counts_from(pairs, false);
}

std::optional<double> sensitivity(const ConfusionCounts& c) {
    long denom = c.tp + c.fn;
    if (denom == 0) return std::nullopt;
    return static_cast<double>(c.tp) / static_cast<double>(denom);
}

std::optional<double> specificity(const ConfusionCounts& c) {
    long denom = c.tn + c.fp;
    if (denom == 0) return std::nullopt;
    return static_cast<double>(c.tn) / static_cast<double>(denom);
}

std::optional<double> ppv(const ConfusionCounts& c) {
    long denom = c.tp + c.fp;
    if (denom == 0) return std::nullopt;
    return static_cast<double>(c.tp) / static_cast<double>(denom);
}

std::optional<double> npv(const ConfusionCounts& c) {
    long denom = c.tn + c.fn;
    if (denom == 0) return std::nullopt;
    return static_cast<double>(c.tn) / static_cast<double>(denom);
}

double correct_rate(const ConfusionCounts& c) {
    long n = c.total();
    if (n == 0) throw EmptyInput();
    long matches = c.full[0][0] + c.full[1][1] + c.full[2][2];
    return static_cast<double>(matches) / static_cast<double>(n);
}

double correct_rate(const std::vector<LabeledPair>& pairs) {
    if (pairs.empty()) throw EmptyInput();
    long matches = 0;
    for (const auto& p : pairs) matches += p.gold == p.predicted ? 1 : 0;
    return static_cast<double>(matches) / static_cast<double>(pairs.size());
}

double cohen_kappa(const ConfusionCounts& c) {
    long n = c.total();
    if (n == 0) throw EmptyInput();
    long diag = c.full[0][0] + c.full[1][1] + c.full[2][2];
    long marginal_product_sum = 0;
    for (int k = 0; k < 3; ++k) {
        long row = c.full[k][0] + c.full[k][1] + c.full[k][2];
        long col = c.full[0][k] + c.full[1][k] + c.full[2][k];
        marginal_product_sum += row * col;
    }
    double po = static_cast<double>(diag) / static_cast<double>(n);
    double pe = static_cast<double>(marginal_product_sum) /
                (static_cast<double>(n) * static_cast<double>(n));
    if (pe == 1.0) return po == 1.0 ? 1.0 : 0.0;
    return (po - pe) / (1.0 - pe);
}

double cohen_kappa(const std::vector<LabeledPair>& pairs) {
    return cohen_kappa(confusion_pooled(pairs));
}

BootstrapResult bootstrap_ci(const Statistic& statistic, const std::vector<LabeledPair>& pairs,
                             long n_resamples, std::uint64_t seed) {
    if (pairs.empty()) throw EmptyInput();
    if (n_resamples < 100) throw ConfigError("bootstrap needs >= 100 resamples");

    BootstrapResult result;
    result.resample_values.reserve(static_cast<std::size_t>(n_resamples));
    std::vector<LabeledPair> resample(pairs.size());
    for (long r = 0; r < n_resamples; ++r) {
        std::mt19937_64 rng(mix(seed ^ mix(static_cast<std::uint64_t>(r))));
        for (auto& slot : resample) slot = pairs[rng() % pairs.size()];
        auto value = statistic(resample);
        if (value) result.resample_values.push_back(*value);
        else ++result.undefined_dropped;
    }
    if (result.resample_values.empty()) throw AllResamplesUndefined();

    std::vector<double> sorted = result.resample_values;
    std::sort(sorted.begin(), sorted.end());
    result.ci_low = percentile(sorted, 0.025);
    result.ci_high = percentile(sorted, 0.975);
    return result;
}

MetricReport compute_report(const std::vector<LabeledPair>& pairs, const std::string& domain_code,
                            long n_resamples, std::uint64_t seed) {
    if (pairs.empty()) throw EmptyInput();
    MetricReport report;
    report.domain_code = domain_code;
    report.n = static_cast<long>(pairs.size());

    auto rate_stat = [](std::optional<double> (*f)(const ConfusionCounts&)) {
        return [f](const std::vector<LabeledPair>& sample) -> std::optional<double> {
            return f(confusion_pooled(sample));
        };
    };
    Statistic correct = [](const std::vector<LabeledPair>& sample) -> std::optional<double> {
        return correct_rate(sample);
    };
    Statistic kappa = [](const std::vector<LabeledPair>& sample) -> std::optional<double> {
        return cohen_kappa(sample);
    };

    report.correct_rate = make_stat(correct, pairs, n_resamples, seed);
    report.sensitivity = make_stat(rate_stat(&sensitivity), pairs, n_resamples, seed);
    report.specificity = make_stat(rate_stat(&specificity), pairs, n_resamples, seed);
    report.ppv = make_stat(rate_stat(&ppv), pairs, n_resamples, seed);
    report.npv = make_stat(rate_stat(&npv), pairs, n_resamples, seed);
    report.kappa = make_stat(kappa, pairs, n_resamples, seed);
    return report;
}

MetricReport aggregate_runs(const std::vector<MetricReport>& reports) {
    if (reports.empty()) throw EmptyInput();
    const MetricReport& first = reports.front();
    for (const auto& r : reports) {
        if (r.domain_code != first.domain_code) throw HeterogeneousReports("domain mismatch");
        if (r.n != first.n) throw HeterogeneousReports("n mismatch");
    }
    MetricReport out;
    out.domain_code = first.domain_code;
    out.n = first.n;
    auto collect = [&](MetricStat MetricReport::* member) {
        std::vector<const MetricStat*> stats;
        stats.reserve(reports.size());
        for (const auto& r : reports) stats.push_back(&(r.*member));
        return aggregate_stat(std::move(stats));
    };
    out.correct_rate = collect(&MetricReport::correct_rate);
    out.sensitivity = collect(&MetricReport::sensitivity);
    out.specificity = collect(&MetricReport::specificity);
    out.ppv = collect(&MetricReport::ppv);
    out.npv = collect(&MetricReport::npv);
    out.kappa = collect(&MetricReport::kappa);
    return out;
}

std::string to_string(DisagreementDirection direction) {
    switch (direction) {
        case DisagreementDirection::conservative_downgrade: return "conservative_downgrade";
        case DisagreementDirection::upgrade: return "upgrade";
        case DisagreementDirection::polarity_flip: return "polarity_flip";
    }
    return "?";
}

DisagreementTable disagreement_table(const std::vector<LabeledPair>& pairs) {
    DisagreementTable table;
    table.summary[DisagreementDirection::conservative_downgrade] = 0;
    table.summary[DisagreementDirection::upgrade] = 0;
    table.summary[DisagreementDirection::polarity_flip] = 0;
    for (const auto& p : pairs) {
        if (p.gold == p.predicted) continue;
        DisagreementDirection direction;
        if (p.predicted == RiskLabel::unclear) {
            direction = DisagreementDirection::conservative_downgrade;
        } else if (p.gold == RiskLabel::unclear) {
            direction = DisagreementDirection::upgrade;
        } else {
            direction = DisagreementDirection::polarity_flip;
        }
        table.records.push_back({p, direction});
        table.summary[direction] += 1;
    }
    return table;
}

}  // namespace robforge
