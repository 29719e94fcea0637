// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include <robforge/harmonizer.hpp>

using namespace robforge;

namespace {

std::filesystem::path schemes_dir() {
    return std::filesystem::path(ROBFORGE_CORE_DATA_DIR) / "schemes";
}

}  // namespace

TEST_CASE("four-level mapping truth table, both polarities") {
    using F = FourLevelRating;
    CHECK(map_four_level(F::definitely_yes, Polarity::yes_means_low) == RiskLabel::low);
    CHECK(map_four_level(F::probably_yes, Polarity::yes_means_low) == RiskLabel::unclear);
    CHECK(map_four_level(F::probably_no, Polarity::yes_means_low) == RiskLabel::unclear);
    CHECK(map_four_level(F::definitely_no, Polarity::yes_means_low) == RiskLabel::high);
    CHECK(map_four_level(F::definitely_yes, Polarity::yes_means_high) == RiskLabel::high);
    CHECK(map_four_level(F::probably_yes, Polarity::yes_means_high) == RiskLabel::unclear);
    CHECK(map_four_level(F::probably_no, Polarity::yes_means_high) == RiskLabel::unclear);
    CHECK(map_four_level(F::definitely_no, Polarity::yes_means_high) == RiskLabel::low);
}

TEST_CASE("four-level parsing accepts case and underscore variants") {
    CHECK(parse_four_level("definitely yes") == FourLevelRating::definitely_yes);
    CHECK(parse_four_level("Definitely_No") == FourLevelRating::definitely_no);
    CHECK(parse_four_level(" probably yes ") == FourLevelRating::probably_yes);
    CHECK_THROWS_AS(parse_four_level("certainly yes"), UnrecognizedLabel);
    CHECK_THROWS_AS(parse_four_level(""), UnrecognizedLabel);
}

TEST_CASE("subdomain merge follows the hierarchical rule and ignores order") {
    // exhaustive over all ordered tuples of length 1..3
    for (int len = 1; len <= 3; ++len) {
        int total = 1;
        for (int i = 0; i < len; ++i) total *= 3;
        for (int combo = 0; combo < total; ++combo) {
            std::vector<RiskLabel> ratings;
            int x = combo;
            for (int i = 0; i < len; ++i) {
                ratings.push_back(static_cast<RiskLabel>(x % 3));
                x /= 3;
            }
            bool any_high = std::any_of(ratings.begin(), ratings.end(),
                                        [](RiskLabel r) { return r == RiskLabel::high; });
            bool all_low = std::all_of(ratings.begin(), ratings.end(),
                                       [](RiskLabel r) { return r == RiskLabel::low; });
            RiskLabel expected =
                any_high ? RiskLabel::high : (all_low ? RiskLabel::low : RiskLabel::unclear);
            CHECK(merge_subdomains(ratings) == expected);

            std::sort(ratings.begin(), ratings.end());
            do {
                CHECK(merge_subdomains(ratings) == expected);
            } while (std::next_permutation(ratings.begin(), ratings.end()));
        }
    }
    CHECK_THROWS_AS(merge_subdomains(std::vector<RiskLabel>{}), EmptyRatingSet);
}

TEST_CASE("rating-set merge checks the sources bookkeeping") {
    SubdomainRatingSet set;
    set.target = RobDomain::d4;
    set.ratings = {RiskLabel::low, RiskLabel::unclear};
    set.sources = {"data collectors", "outcome assessors"};
    CHECK(merge_subdomains(set) == RiskLabel::unclear);
    set.sources.pop_back();
    CHECK_THROWS_AS(merge_subdomains(set), MalformedRecord);
}

TEST_CASE("external domain mapping is total over declared names only") {
    std::vector<DomainMapping> mappings = {{"randomization process", RobDomain::d1},
                                           {"missing outcome data", RobDomain::d5}};
    CHECK(map_external_domain(mappings, "randomization process") == RobDomain::d1);
    CHECK(map_external_domain(mappings, "missing outcome data") == RobDomain::d5);
    CHECK_THROWS_AS(map_external_domain(mappings, "vibes"), UnmappedDomain);
}

TEST_CASE("bundled scheme A maps six tripartite domains with a some-concerns alias") {
    ExternalScheme scheme = load_scheme(schemes_dir() / "scheme_a.json");
    CHECK(scheme.scale == "tripartite");
    CHECK(scheme.domains.size() == 6);
    CHECK(map_external_domain(scheme.mappings(), "randomization process") == RobDomain::d1);
    CHECK(map_external_domain(scheme.mappings(), "selection of the reported result") ==
          RobDomain::d6);
    CHECK_THROWS_AS(map_external_domain(scheme.mappings(), "other bias"), UnmappedDomain);
    CHECK(scheme.label_aliases.at("some concerns") == RiskLabel::unclear);
    CHECK(scheme.label_aliases.at("low risk") == RiskLabel::low);
}

TEST_CASE("bundled four-level schemes declare blinding subdomain groups") {
    for (const char* name : {"scheme_b.json", "scheme_c.json"}) {
        ExternalScheme scheme = load_scheme(schemes_dir() / name);
        CHECK(scheme.scale == "four_level");
        REQUIRE(scheme.subdomain_groups.count(RobDomain::d3) == 1);
        REQUIRE(scheme.subdomain_groups.count(RobDomain::d4) == 1);
        for (const auto& [target, members] : scheme.subdomain_groups) {
            for (const auto& member : members) {
                CHECK(map_external_domain(scheme.mappings(), member) == target);
                CHECK(scheme.polarity_for(member) == Polarity::yes_means_low);
            }
        }
    }
}

TEST_CASE("a full external judgment harmonizes end to end") {
    ExternalScheme scheme = load_scheme(schemes_dir() / "scheme_b.json");
    // patients definitely blinded, providers probably blinded -> D3 unclear
    std::vector<RiskLabel> d3 = {
        map_four_level(parse_four_level("definitely yes"),
                       scheme.polarity_for("blinding of patients")),
        map_four_level(parse_four_level("probably yes"),
                       scheme.polarity_for("blinding of providers")),
    };
    CHECK(merge_subdomains(d3) == RiskLabel::unclear);
    // any definitely-unblinded subdomain forces D4 high
    std::vector<RiskLabel> d4 = {
        map_four_level(parse_four_level("definitely no"),
                       scheme.polarity_for("blinding of data collectors")),
        map_four_level(parse_four_level("definitely yes"),
                       scheme.polarity_for("blinding of outcome assessors")),
        map_four_level(parse_four_level("definitely yes"),
                       scheme.polarity_for("blinding of data analysts")),
    };
    CHECK(merge_subdomains(d4) == RiskLabel::high);
}
