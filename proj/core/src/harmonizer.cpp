// SPDX-License-Identifier: Apache-2.0

#include <robforge/harmonizer.hpp>

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include <robforge/jsonl.hpp>

namespace robforge {

std::string to_string(FourLevelRating rating) {
    switch (rating) {
        case FourLevelRating::definitely_yes: return "definitely yes";
        case FourLevelRating::probably_yes: return "probably yes";
        case FourLevelRating::probably_no: return "probably no";
        case FourLevelRating::definitely_no: return "definitely no";
    }
    return "?";
}

FourLevelRating parse_four_level(std::string_view raw) {
    std::string s(raw);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
        return c == '_' ? ' ' : static_cast<char>(std::tolower(c));
    });
    std::size_t b = s.find_first_not_of(" \t\r\n");
    std::size_t e = s.find_last_not_of(" \t\r\n");
    if (b == std::string::npos) throw UnrecognizedLabel(std::string(raw));
    s = s.substr(b, e - b + 1);
    if (s == "definitely yes") return FourLevelRating::definitely_yes;
    if (s == "probably yes") return FourLevelRating::probably_yes;
    if (s == "probably no") return FourLevelRating::probably_no;
    if (s == "definitely no") return FourLevelRating::definitely_no;
    throw UnrecognizedLabel(std::string(raw));
}

RiskLabel map_four_level(FourLevelRating rating, Polarity polarity) {
    bool flip = polarity == Polarity::yes_means_high;
    switch (rating) {
        case FourLevelRating::definitely_yes: return flip ? RiskLabel::high : RiskLabel::low;
        case FourLevelRating::definitely_no: return flip ? RiskLabel::low : RiskLabel::high;
        case FourLevelRating::probably_yes:
        case FourLevelRating::probably_no: return RiskLabel::unclear;
    }
    return RiskLabel::unclear;
}

RiskLabel merge_subdomains(std::span<const RiskLabel> ratings) {
    if (ratings.empty()) throw EmptyRatingSet();
    bool any_high = false;
    bool all_low = true;
    for (RiskLabel r : ratings) {
        if (r == RiskLabel::high) any_high = true;
        if (r != RiskLabel::low) all_low = false;
    }
    if (any_high) return RiskLabel::high;
    if (all_low) return RiskLabel::low;
    return RiskLabel::unclear;
}

RiskLabel merge_subdomains(const SubdomainRatingSet& set) {
    if (set.ratings.size() != set.sources.size()) {
        throw MalformedRecord("subdomain rating set", "ratings/sources length mismatch");
    }
    return merge_subdomains(std::span<const RiskLabel>(set.ratings));
}

RobDomain map_external_domain(const std::vector<DomainMapping>& mappings,
                              const std::string& external_name) {
    for (const auto& m : mappings) {
        if (m.external_name == external_name) return m.rob1_domain;
    }
    throw UnmappedDomain(external_name);
}

std::vector<DomainMapping> ExternalScheme::mappings() const {
    std::vector<DomainMapping> out;
    out.reserve(domains.size());
    for (const auto& entry : domains) out.push_back({entry.external_name, entry.rob1_domain});
    return out;
}

Polarity ExternalScheme::polarity_for(const std::string& external_name) const {
    for (const auto& entry : domains) {
        if (entry.external_name == external_name) return entry.polarity;
    }
    throw UnmappedDomain(external_name);
}

ExternalScheme load_scheme(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MalformedRecord(path.string(), "cannot open scheme file");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedRecord(path.string(), e.what());
    }

    ExternalScheme scheme;
    scheme.name = doc.at("name").get<std::string>();
    scheme.scale = doc.at("scale").get<std::string>();
    if (scheme.scale != "four_level" && scheme.scale != "tripartite") {
        throw MalformedRecord(path.string(), "scale must be four_level or tripartite");
    }
    for (const auto& rec : doc.at("domains")) {
        ExternalScheme::Entry entry;
        entry.external_name = rec.at("external_name").get<std::string>();
        entry.rob1_domain = parse_domain(rec.at("rob1_domain").get<std::string>());
        std::string polarity = rec.value("polarity", "yes_means_low");
        if (polarity == "yes_means_low") entry.polarity = Polarity::yes_means_low;
        else if (polarity == "yes_means_high") entry.polarity = Polarity::yes_means_high;
        else throw MalformedRecord(path.string(), "unknown polarity: " + polarity);
        scheme.domains.push_back(std::move(entry));
    }
    if (doc.contains("subdomain_groups")) {
        for (const auto& [code, members] : doc.at("subdomain_groups").items()) {
            RobDomain target = parse_domain(code);
            for (const auto& member : members) {
                scheme.subdomain_groups[target].push_back(member.get<std::string>());
            }
        }
    }
    if (doc.contains("label_aliases")) {
        for (const auto& [alias, label] : doc.at("label_aliases").items()) {
            scheme.label_aliases[alias] = parse_label(label.get<std::string>());
        }
    }
    return scheme;
}

}  // namespace robforge
