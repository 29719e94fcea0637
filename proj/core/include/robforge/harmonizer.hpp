// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <robforge/domain.hpp>

namespace robforge {

/// Four-level certainty scale used by external prompt sets.
enum class FourLevelRating { definitely_yes, probably_yes, probably_no, definitely_no };

std::string to_string(FourLevelRating rating);
FourLevelRating parse_four_level(std::string_view raw);

/// Whether a "yes" answer to the external question indicates methodological
/// adequacy (low risk) or a bias concern (high risk). Declared explicitly per
/// question; negatively phrased items flip the mapping.
enum class Polarity { yes_means_low, yes_means_high };

/// definitely_yes/no map to low/high (flipped under yes_means_high);
/// probably_* always maps to unclear.
RiskLabel map_four_level(FourLevelRating rating, Polarity polarity);

/// Tripartite ratings for the blinding-related subdomains feeding one merged
/// RoB 1 domain (D3 or D4).
struct SubdomainRatingSet {
    RobDomain target = RobDomain::d3;
    std::vector<RiskLabel> ratings;
    std::vector<std::string> sources;  // e.g. "patients", "data collectors"
};

/// Hierarchical merge: any high -> high; all low -> low; otherwise unclear.
RiskLabel merge_subdomains(std::span<const RiskLabel> ratings);
RiskLabel merge_subdomains(const SubdomainRatingSet& set);

struct DomainMapping {
    std::string external_name;
    RobDomain rob1_domain = RobDomain::d1;
};

RobDomain map_external_domain(const std::vector<DomainMapping>& mappings,
                              const std::string& external_name);

/// A third-party prompt set's rating scheme, shipped as data
/// (external_scheme.json), not code.
struct ExternalScheme {
    std::string name;
    std::string scale;  // "four_level" | "tripartite"
    struct Entry {
        std::string external_name;
        RobDomain rob1_domain = RobDomain::d1;
        Polarity polarity = Polarity::yes_means_low;
    };
    std::vector<Entry> domains;
    /// Subdomain groups merged into one RoB 1 domain (keyed by "D3"/"D4").
    std::map<RobDomain, std::vector<std::string>> subdomain_groups;
    /// Label aliases for tripartite schemes (e.g. "some concerns" -> unclear).
    std::map<std::string, RiskLabel> label_aliases;

    std::vector<DomainMapping> mappings() const;
    Polarity polarity_for(const std::string& external_name) const;
};

ExternalScheme load_scheme(const std::filesystem::path& path);

}  // namespace robforge
