// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>
#include <vector>

#include <robforge/evaluation.hpp>

using namespace robforge;

namespace {

LabeledPair pair_of(RiskLabel gold, RiskLabel predicted, RobDomain domain = RobDomain::d1) {
    LabeledPair p;
    p.domain = domain;
    p.gold = gold;
    p.predicted = predicted;
    return p;
}

std::vector<LabeledPair> pairs_from_matrix(const long (&m)[3][3]) {
    std::vector<LabeledPair> pairs;
    for (int g = 0; g < 3; ++g) {
        for (int p = 0; p < 3; ++p) {
            for (long k = 0; k < m[g][p]; ++k) {
                pairs.push_back(pair_of(static_cast<RiskLabel>(g), static_cast<RiskLabel>(p)));
            }
        }
    }
    return pairs;
}

}  // namespace

TEST_CASE("confusion counts match a hand count, including the binarization") {
    std::vector<LabeledPair> pairs;
    // gold low: 3 as low, 1 as unclear; gold unclear: 2 as low; gold high: 1 as high
    for (int i = 0; i < 3; ++i) pairs.push_back(pair_of(RiskLabel::low, RiskLabel::low));
    pairs.push_back(pair_of(RiskLabel::low, RiskLabel::unclear));
    for (int i = 0; i < 2; ++i) pairs.push_back(pair_of(RiskLabel::unclear, RiskLabel::low));
    pairs.push_back(pair_of(RiskLabel::high, RiskLabel::high));

    ConfusionCounts c = confusion(pairs);
    CHECK(c.total() == 7);
    CHECK(c.full[0][0] == 3);
    CHECK(c.full[0][1] == 1);
    CHECK(c.full[1][0] == 2);
    CHECK(c.full[2][2] == 1);
    CHECK(c.tp == 3);
    CHECK(c.fn == 1);
    CHECK(c.fp == 2);
    CHECK(c.tn == 1);

    CHECK(*sensitivity(c) == doctest::Approx(3.0 / 4.0));
    CHECK(*specificity(c) == doctest::Approx(1.0 / 3.0));
    CHECK(*ppv(c) == doctest::Approx(3.0 / 5.0));
    CHECK(*npv(c) == doctest::Approx(1.0 / 2.0));
    CHECK(correct_rate(pairs) == doctest::Approx(4.0 / 7.0));

    CHECK_THROWS_AS(confusion({}), EmptyInput);
    std::vector<LabeledPair> mixed = {pair_of(RiskLabel::low, RiskLabel::low, RobDomain::d1),
                                      pair_of(RiskLabel::low, RiskLabel::low, RobDomain::d2)};
    CHECK_THROWS_AS(confusion(mixed), MixedDomains);
    CHECK(confusion_pooled(mixed).tp == 2);
}

TEST_CASE("zero denominators are undefined values, not NaN or zero") {
    // no gold-low pairs: sensitivity and ppv undefined
    std::vector<LabeledPair> no_low = {pair_of(RiskLabel::high, RiskLabel::unclear),
                                       pair_of(RiskLabel::unclear, RiskLabel::unclear)};
    ConfusionCounts c = confusion(no_low);
    CHECK(!sensitivity(c).has_value());
    CHECK(!ppv(c).has_value());
    CHECK(specificity(c).has_value());

    // everything predicted low: npv undefined
    std::vector<LabeledPair> all_low_pred = {pair_of(RiskLabel::low, RiskLabel::low),
                                             pair_of(RiskLabel::high, RiskLabel::low)};
    CHECK(!npv(confusion(all_low_pred)).has_value());
}

TEST_CASE("kappa equals the frozen oracle on a fixed 3x3 matrix") {
    const long m[3][3] = {{4, 1, 0}, {1, 3, 1}, {0, 1, 4}};
    // n=15, po=11/15, marginals all 5 -> pe=1/3, kappa=0.6
    CHECK(cohen_kappa(pairs_from_matrix(m)) == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("kappa degenerate cases") {
    // constant predictor on a skewed gold: po == pe exactly, kappa == 0
    std::vector<LabeledPair> constant;
    for (int i = 0; i < 89; ++i) constant.push_back(pair_of(RiskLabel::low, RiskLabel::low));
    for (int i = 0; i < 11; ++i) constant.push_back(pair_of(RiskLabel::unclear, RiskLabel::low));
    CHECK(cohen_kappa(constant) == 0.0);

    // all mass in one diagonal cell: pe == 1 and po == 1 -> kappa resolves to 1
    long perfect[3][3] = {{5, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    CHECK(cohen_kappa(ConfusionCounts::from_full(perfect)) == 1.0);
    // all mass in one off-diagonal cell: po = pe = 0 -> kappa 0
    long degenerate[3][3] = {{0, 5, 0}, {0, 0, 0}, {0, 0, 0}};
    CHECK(cohen_kappa(ConfusionCounts::from_full(degenerate)) == 0.0);

    CHECK(cohen_kappa(pairs_from_matrix(perfect)) == 1.0);
}

TEST_CASE("bootstrap is seed-deterministic and counts undefined resamples") {
    std::vector<LabeledPair> pairs;
    std::mt19937_64 rng(5);
    for (int i = 0; i < 30; ++i) {
        pairs.push_back(pair_of(static_cast<RiskLabel>(rng() % 3),
                                static_cast<RiskLabel>(rng() % 3)));
    }
    Statistic accuracy = [](const std::vector<LabeledPair>& sample) -> std::optional<double> {
        return correct_rate(sample);
    };

    BootstrapResult a = bootstrap_ci(accuracy, pairs, 500, 42);
    BootstrapResult b = bootstrap_ci(accuracy, pairs, 500, 42);
    CHECK(a.ci_low == b.ci_low);
    CHECK(a.ci_high == b.ci_high);
    CHECK(a.resample_values == b.resample_values);
    BootstrapResult c = bootstrap_ci(accuracy, pairs, 500, 43);
    CHECK(a.resample_values != c.resample_values);
    CHECK(a.ci_low <= a.ci_high);

    // one gold-low pair among many: some resamples lack it and sensitivity
    // is dropped as undefined there
    std::vector<LabeledPair> skewed;
    skewed.push_back(pair_of(RiskLabel::low, RiskLabel::low));
    for (int i = 0; i < 9; ++i) skewed.push_back(pair_of(RiskLabel::high, RiskLabel::unclear));
    Statistic sens = [](const std::vector<LabeledPair>& sample) -> std::optional<double> {
        return sensitivity(confusion_pooled(sample));
    };
    BootstrapResult d = bootstrap_ci(sens, skewed, 500, 42);
    CHECK(d.undefined_dropped > 0);
    CHECK(d.undefined_dropped + static_cast<long>(d.resample_values.size()) == 500);

    Statistic never = [](const std::vector<LabeledPair>&) -> std::optional<double> {
        return std::nullopt;
    };
    CHECK_THROWS_AS(bootstrap_ci(never, pairs, 500, 42), AllResamplesUndefined);
    CHECK_THROWS_AS(bootstrap_ci(accuracy, pairs, 50, 42), ConfigError);
    CHECK_THROWS_AS(bootstrap_ci(accuracy, {}, 500, 42), EmptyInput);
}

TEST_CASE("reports aggregate by averaging points and pooling resamples") {
    std::vector<LabeledPair> pairs;
    std::mt19937_64 rng(6);
    for (int i = 0; i < 40; ++i) {
        pairs.push_back(pair_of(static_cast<RiskLabel>(rng() % 3),
                                static_cast<RiskLabel>(rng() % 3)));
    }
    MetricReport r1 = compute_report(pairs, "D1", 200, 42);
    CHECK(r1.domain_code == "D1");
    CHECK(r1.n == 40);
    CHECK(r1.correct_rate.defined);
    CHECK(r1.correct_rate.point == doctest::Approx(correct_rate(pairs)));

    MetricReport r2 = compute_report(pairs, "D1", 200, 43);
    MetricReport agg = aggregate_runs({r1, r2});
    CHECK(agg.correct_rate.point ==
          doctest::Approx((r1.correct_rate.point + r2.correct_rate.point) / 2.0));
    CHECK(agg.correct_rate.resamples.size() ==
          r1.correct_rate.resamples.size() + r2.correct_rate.resamples.size());
    // pooled interval sits within the per-run extremes, never an endpoint average
    CHECK(agg.correct_rate.ci_low >= std::min(r1.correct_rate.ci_low, r2.correct_rate.ci_low));
    CHECK(agg.correct_rate.ci_high <= std::max(r1.correct_rate.ci_high, r2.correct_rate.ci_high));

    MetricReport other = compute_report(pairs, "D2", 200, 42);
    CHECK_THROWS_AS(aggregate_runs({r1, other}), HeterogeneousReports);
    MetricReport shorter = compute_report({pairs.begin(), pairs.begin() + 10}, "D1", 200, 42);
    CHECK_THROWS_AS(aggregate_runs({r1, shorter}), HeterogeneousReports);
    CHECK_THROWS_AS(aggregate_runs({}), EmptyInput);
}

TEST_CASE("disagreement directions partition every mismatch") {
    std::vector<LabeledPair> pairs;
    std::mt19937_64 rng(8);
    for (int i = 0; i < 200; ++i) {
        pairs.push_back(pair_of(static_cast<RiskLabel>(rng() % 3),
                                static_cast<RiskLabel>(rng() % 3)));
    }
    DisagreementTable table = disagreement_table(pairs);
    long mismatches = 0;
    for (const auto& p : pairs) mismatches += p.gold != p.predicted ? 1 : 0;
    CHECK(static_cast<long>(table.records.size()) == mismatches);
    long summed = 0;
    for (const auto& [direction, count] : table.summary) summed += count;
    CHECK(summed == mismatches);

    for (const auto& record : table.records) {
        switch (record.direction) {
            case DisagreementDirection::conservative_downgrade:
                CHECK(record.pair.predicted == RiskLabel::unclear);
                CHECK(record.pair.gold != RiskLabel::unclear);
                break;
            case DisagreementDirection::upgrade:
                CHECK(record.pair.gold == RiskLabel::unclear);
                CHECK(record.pair.predicted != RiskLabel::unclear);
                break;
            case DisagreementDirection::polarity_flip:
                CHECK(record.pair.gold != RiskLabel::unclear);
                CHECK(record.pair.predicted != RiskLabel::unclear);
                CHECK(record.pair.gold != record.pair.predicted);
                break;
        }
    }
}
