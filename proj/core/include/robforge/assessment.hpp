// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <robforge/corpus.hpp>
#include <robforge/domain.hpp>
#include <robforge/gateway.hpp>

namespace robforge {

/// One optimizable prompt: an instruction plus the paired evidence /
/// evaluative questions for a domain.
struct DomainPrompt {
    RobDomain domain = RobDomain::d1;
    std::string instruction;
    std::string evidence_question;
    std::string evaluative_question;
    std::string version_id;
};

/// Default seed prompt for a domain: paired Cochrane-style questions plus a
/// plain instruction naming the structured output fields.
DomainPrompt default_seed_prompt(RobDomain domain);

/// The four-field structured output contract.
struct ParsedOutput {
    std::string reasoning;
    std::string risk_level;  // raw, pre-normalization
    std::string justification;
    double confidence = 0.0;
};

/// Extracts {reasoning, risk_level, justification, confidence} from
/// key:value text, tolerating code fences, list bullets, bold markers,
/// quoting, and any field order. All four fields are required and must be
/// non-empty; confidence outside [0,1] is an error, never clamped.
ParsedOutput parse_structured_output(const std::string& raw);

/// Re-serializes a parsed output into canonical key:value form
/// (parse_structured_output round-trips over it).
std::string render_structured_output(const ParsedOutput& parsed);

struct DomainJudgment {
    RobDomain domain = RobDomain::d1;
    std::string reasoning;
    RiskLabel risk_level = RiskLabel::unclear;
    std::string justification;
    double confidence = 0.0;
    std::string raw_text;
    /// Non-fatal deviations from the output contract (e.g. missing
    /// reasoning) kept per the partial-compliance policy.
    std::vector<std::string> warnings;
};

struct AssessOptions {
    /// Character cap on trial text; above it, head + tail are retained.
    std::size_t body_char_cap = 60000;
    DecodeParams decode;
    std::string group;  // ledger grouping key; defaults to trial_id
};

/// A per-trial result: judgments for every requested domain plus error notes
/// for domains whose assessment failed.
struct TrialAssessment {
    std::string trial_id;
    std::map<RobDomain, DomainJudgment> judgments;
    std::map<RobDomain, std::string> failures;
    std::string run_id;
};

/// Composes instruction + paired questions + criteria + trial text into one
/// main-role completion (evidence identification stays an internal reasoning
/// step) and parses the structured result. One repair retry on malformed
/// output before MalformedOutput is thrown.
DomainJudgment assess_domain(const TrialDocument& trial, const DomainPrompt& prompt,
                             Gateway& gateway, const AssessOptions& options = {});

/// Runs assess_domain for each supplied prompt. Per-domain failures are
/// recorded; only if every domain fails is the first error rethrown.
TrialAssessment assess_trial(const TrialDocument& trial, const std::vector<DomainPrompt>& prompts,
                             Gateway& gateway, const AssessOptions& options = {},
                             const std::string& run_id = {});

// ---- JSONL schema for assessments.jsonl ----
nlohmann::json assessment_to_json(const TrialAssessment& assessment);
TrialAssessment assessment_from_json(const nlohmann::json& record);

// ---- prompt artifact file ----
nlohmann::json prompt_to_json(const DomainPrompt& prompt, const std::vector<std::string>& lineage);
DomainPrompt prompt_from_json(const nlohmann::json& record);

}  // namespace robforge
