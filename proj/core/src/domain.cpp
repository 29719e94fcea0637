// SPDX-License-Identifier: Apache-2.0

#include <robforge/domain.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>

#include <nlohmann/json.hpp>

namespace robforge {

namespace {

std::string lowered(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trimmed(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Criteria table, shipped verbatim in core/data/rob1_criteria.json.
// The compiled copy below keeps criteria_for total and allocation-free; the
// resource file is the editable source of record and a unit test holds the
// two in sync.
const std::array<CriteriaSet, 7> kCriteria = {{
    {RobDomain::d1,
     "Randomization method clearly described and appropriate (e.g., computer-generated, random "
     "number table).",
     "Randomization mentioned but method not described.",
     "Non-random or predictable method (e.g., alternation, date of birth)."},
    {RobDomain::d2,
     "Concealment mechanism prevents foreknowledge (e.g., sealed opaque envelopes, central "
     "allocation).",
     "Insufficient details on concealment method.",
     "Allocation predictable or not concealed."},
    {RobDomain::d3,
     "Blinding implemented and likely effective.",
     "Blinding unclear or partial.",
     "No blinding, and outcomes likely influenced by knowledge of intervention."},
    {RobDomain::d4,
     "Outcome assessors blinded and unlikely to be influenced.",
     "Blinding not reported or uncertain.",
     "Assessors not blinded and outcomes subjective or easily biased."},
    {RobDomain::d5,
     "Few or balanced dropouts; reasons explained; appropriate handling (e.g., ITT analysis).",
     "Incomplete data or handling not described.",
     "High or unequal attrition without adequate explanation or handling."},
    {RobDomain::d6,
     "All prespecified outcomes reported as planned.",
     "Unclear whether all outcomes reported.",
     "Evidence of omitted or selectively reported outcomes."},
    {RobDomain::d7,
     "No additional concerns.",
     "Possible but unverified sources of bias.",
     "Clear evidence of other problems (e.g., early stopping, baseline imbalance)."},
}};

}  // namespace

std::string to_string(RiskLabel label) {
    switch (label) {
        case RiskLabel::low: return "low";
        case RiskLabel::unclear: return "unclear";
        case RiskLabel::high: return "high";
    }
    return "?";
}

std::string to_string(RobDomain domain) {
    return "D" + std::to_string(static_cast<int>(domain) + 1);
}

std::string canonical_name(RobDomain domain) {
    switch (domain) {
        case RobDomain::d1: return "random sequence generation";
        case RobDomain::d2: return "allocation concealment";
        case RobDomain::d3: return "blinding of participants and personnel";
        case RobDomain::d4: return "blinding of outcome assessment";
        case RobDomain::d5: return "incomplete outcome data";
        case RobDomain::d6: return "selective reporting";
        case RobDomain::d7: return "other bias";
    }
    return "?";
}

RobDomain parse_domain(std::string_view code) {
    std::string c = lowered(trimmed(code));
    if (c.size() == 2 && c[0] == 'd' && c[1] >= '1' && c[1] <= '7') {
        return static_cast<RobDomain>(c[1] - '1');
    }
    throw MalformedRecord(std::string(code), "expected a domain code D1..D7");
}

RiskLabel parse_label(std::string_view raw) {
    std::string s = lowered(trimmed(raw));
    constexpr std::string_view suffix = " risk";
    if (s.size() > suffix.size() && s.ends_with(suffix)) {
        s = std::string(trimmed(std::string_view(s).substr(0, s.size() - suffix.size())));
    }
    if (s == "low") return RiskLabel::low;
    if (s == "unclear") return RiskLabel::unclear;
    if (s == "high") return RiskLabel::high;
    throw UnrecognizedLabel(std::string(raw));
}

const CriteriaSet& criteria_for(RobDomain domain) {
    return kCriteria[static_cast<std::size_t>(domain)];
}

std::array<CriteriaSet, 7> load_criteria(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MalformedRecord(path.string(), "cannot open criteria resource");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedRecord(path.string(), e.what());
    }
    if (!doc.is_array() || doc.size() != 7) {
        throw MalformedRecord(path.string(), "expected an array of 7 domain records");
    }
    std::array<CriteriaSet, 7> out = kCriteria;
    std::array<bool, 7> seen{};
    for (const auto& rec : doc) {
        if (!rec.contains("domain_code")) throw MalformedRecord(path.string(), "missing domain_code");
        RobDomain d = parse_domain(rec.at("domain_code").get<std::string>());
        auto idx = static_cast<std::size_t>(d);
        if (seen[idx]) throw MalformedRecord(path.string(), "duplicate domain " + to_string(d));
        seen[idx] = true;
        CriteriaSet cs;
        cs.domain = d;
        cs.low = rec.at("low").get<std::string>();
        cs.unclear = rec.at("unclear").get<std::string>();
        cs.high = rec.at("high").get<std::string>();
        if (cs.low.empty() || cs.unclear.empty() || cs.high.empty()) {
            throw MalformedRecord(path.string(), "empty criteria text for " + to_string(d));
        }
        out[idx] = std::move(cs);
    }
    return out;
}

}  // namespace robforge
