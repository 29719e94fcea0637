// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>

#include <robforge/errors.hpp>

namespace robforge {

/// Tripartite Cochrane RoB 1 judgment. Ordering is for display only and
/// carries no metric meaning.
enum class RiskLabel { low, unclear, high };

inline constexpr std::array<RiskLabel, 3> kAllLabels = {RiskLabel::low, RiskLabel::unclear,
                                                        RiskLabel::high};

/// The seven RoB 1 assessment domains, D1..D7.
enum class RobDomain { d1, d2, d3, d4, d5, d6, d7 };

inline constexpr std::array<RobDomain, 7> kAllDomains = {
    RobDomain::d1, RobDomain::d2, RobDomain::d3, RobDomain::d4,
    RobDomain::d5, RobDomain::d6, RobDomain::d7};

std::string to_string(RiskLabel label);
std::string to_string(RobDomain domain);           // "D1".."D7"
std::string canonical_name(RobDomain domain);      // e.g. "random sequence generation"

/// Parses "D1".."D7" (case-insensitive). Throws MalformedRecord otherwise.
RobDomain parse_domain(std::string_view code);

/// Normalizes a model-emitted label: case-insensitive, optional " risk"
/// suffix, surrounding whitespace tolerated. Throws UnrecognizedLabel when
/// the text is not one of the tripartite values.
RiskLabel parse_label(std::string_view raw);

/// Per-domain judgment criteria text.
struct CriteriaSet {
    RobDomain domain;
    std::string low;
    std::string unclear;
    std::string high;
};

/// Criteria for one domain, from the bundled criteria resource. Total over
/// D1..D7; never fails.
const CriteriaSet& criteria_for(RobDomain domain);

/// Loads a criteria resource file (one JSON record per domain with fields
/// {domain_code, low, unclear, high}). Used to validate the shipped resource
/// against the compiled-in copy and to allow criteria edits without code
/// changes.
std::array<CriteriaSet, 7> load_criteria(const std::filesystem::path& path);

}  // namespace robforge
