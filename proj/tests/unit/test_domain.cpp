// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <robforge/domain.hpp>

using namespace robforge;

TEST_CASE("domain codes round-trip") {
    for (RobDomain d : kAllDomains) {
        CHECK(parse_domain(to_string(d)) == d);
        CHECK(!canonical_name(d).empty());
    }
    CHECK(parse_domain("d4") == RobDomain::d4);
    CHECK(parse_domain("  D7 ") == RobDomain::d7);
    CHECK_THROWS_AS(parse_domain("D8"), MalformedRecord);
    CHECK_THROWS_AS(parse_domain("domain1"), MalformedRecord);
    CHECK_THROWS_AS(parse_domain(""), MalformedRecord);
}

TEST_CASE("label parsing is lenient about case and the risk suffix") {
    CHECK(parse_label("low") == RiskLabel::low);
    CHECK(parse_label("Low") == RiskLabel::low);
    CHECK(parse_label("  HIGH  ") == RiskLabel::high);
    CHECK(parse_label("Unclear risk") == RiskLabel::unclear);
    CHECK(parse_label("LOW RISK") == RiskLabel::low);
    CHECK_THROWS_AS(parse_label("medium"), UnrecognizedLabel);
    CHECK_THROWS_AS(parse_label("risk"), UnrecognizedLabel);
    CHECK_THROWS_AS(parse_label(""), UnrecognizedLabel);
}

TEST_CASE("every domain has non-empty tripartite criteria") {
    for (RobDomain d : kAllDomains) {
        const CriteriaSet& c = criteria_for(d);
        CHECK(c.domain == d);
        CHECK(!c.low.empty());
        CHECK(!c.unclear.empty());
        CHECK(!c.high.empty());
    }
}

TEST_CASE("bundled criteria resource matches the compiled copy") {
    auto loaded = load_criteria(std::filesystem::path(ROBFORGE_CORE_DATA_DIR) / "rob1_criteria.json");
    for (RobDomain d : kAllDomains) {
        const CriteriaSet& builtin = criteria_for(d);
        const CriteriaSet& file = loaded[static_cast<std::size_t>(d)];
        CHECK(file.low == builtin.low);
        CHECK(file.unclear == builtin.unclear);
        CHECK(file.high == builtin.high);
    }
}
