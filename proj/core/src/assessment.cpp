// SPDX-License-Identifier: Apache-2.0

#include <robforge/assessment.hpp>

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <set>
#include <sstream>

namespace robforge {

namespace {

const char* kFieldNames[4] = {"reasoning", "risk_level", "justification", "confidence"};

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string strip_quotes(std::string s) {
    s = trim(s);
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                          (s.front() == '\'' && s.back() == '\''))) {
        s = s.substr(1, s.size() - 2);
    }
    return s;
}

// Drops a leading list bullet and bold markers, returning the remainder.
std::string normalize_line_head(std::string line) {
    std::size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i < line.size() && (line[i] == '-' || line[i] == '*')) {
        std::size_t j = i + 1;
        // "**key**" is bold, not a bullet
        if (!(line[i] == '*' && j < line.size() && line[j] == '*')) {
            while (j < line.size() && (line[j] == ' ' || line[j] == '\t')) ++j;
            i = j;
        }
    }
    return line.substr(i);
}

/// Best-effort field extraction; validation happens in the callers.
std::map<std::string, std::string> extract_fields(const std::string& raw) {
    std::map<std::string, std::string> fields;
    std::string current_key;
    std::istringstream in(raw);
    std::string line;
    while (std::getline(in, line)) {
        std::string head = normalize_line_head(line);
        if (head.rfind("```", 0) == 0) continue;

        bool started_field = false;
        for (const char* name : kFieldNames) {
            std::size_t klen = std::strlen(name);
            std::size_t off = 0;
            if (head.rfind("**", 0) == 0) off = 2;
            if (head.compare(off, klen, name) != 0) continue;
            std::size_t pos = off + klen;
            if (head.compare(pos, 2, "**") == 0) pos += 2;
            while (pos < head.size() && (head[pos] == ' ' || head[pos] == '\t')) ++pos;
            if (pos >= head.size() || head[pos] != ':') continue;
            current_key = name;
            fields[current_key] = strip_quotes(head.substr(pos + 1));
            started_field = true;
            break;
        }
        if (!started_field && !current_key.empty()) {
            std::string cont = trim(line);
            if (!cont.empty()) {
                auto& val = fields[current_key];
                if (!val.empty()) val += "\n";
                val += cont;
            }
        }
    }
    return fields;
}

std::optional<double> parse_confidence(const std::string& text) {
    const std::string t = trim(text);
    if (t.empty()) return std::nullopt;
    char* end = nullptr;
    double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str()) return std::nullopt;
    return v;
}

std::string truncate_body(const std::string& body, std::size_t cap) {
    if (body.size() <= cap) return body;
    std::size_t head = cap * 2 / 3;
    std::size_t tail = cap - head;
    return body.substr(0, head) + "\n...[truncated]...\n" + body.substr(body.size() - tail);
}

std::string compose_user_text(const TrialDocument& trial, const DomainPrompt& prompt,
                              const AssessOptions& options) {
    const CriteriaSet& criteria = criteria_for(prompt.domain);
    std::ostringstream out;
    out << "Domain: " << to_string(prompt.domain) << " (" << canonical_name(prompt.domain) << ")\n\n";
    out << "Evidence question: " << prompt.evidence_question << "\n";
    out << "Evaluative question: " << prompt.evaluative_question << "\n\n";
    out << "Criteria:\n";
    out << "- Low: " << criteria.low << "\n";
    out << "- Unclear: " << criteria.unclear << "\n";
    out << "- High: " << criteria.high << "\n\n";
    out << "Trial text:\n" << truncate_body(trial.body, options.body_char_cap) << "\n\n";
    out << "Respond with exactly these fields: reasoning, risk_level, justification, confidence.";
    return out.str();
}

/// Builds a judgment from extracted fields if at least risk_level and
/// justification are usable. Missing reasoning/confidence are tolerated with
/// warnings per the partial-compliance policy.
std::optional<DomainJudgment> judgment_from_fields(const std::map<std::string, std::string>& fields,
                                                   RobDomain domain, const std::string& raw) {
    auto it = fields.find("risk_level");
    if (it == fields.end() || trim(it->second).empty()) return std::nullopt;
    RiskLabel risk;
    try {
        risk = parse_label(it->second);
    } catch (const UnrecognizedLabel&) {
        return std::nullopt;
    }
    auto just_it = fields.find("justification");
    if (just_it == fields.end() || trim(just_it->second).empty()) return std::nullopt;

    DomainJudgment judgment;
    judgment.domain = domain;
    judgment.risk_level = risk;
    judgment.justification = just_it->second;
    judgment.raw_text = raw;

    auto reason_it = fields.find("reasoning");
    if (reason_it != fields.end() && !trim(reason_it->second).empty()) {
        judgment.reasoning = reason_it->second;
    } else {
        judgment.warnings.push_back("missing reasoning field");
    }

    auto conf_it = fields.find("confidence");
    std::optional<double> conf;
    if (conf_it != fields.end()) conf = parse_confidence(conf_it->second);
    if (conf && *conf >= 0.0 && *conf <= 1.0) {
        judgment.confidence = *conf;
    } else {
        judgment.confidence = 0.0;
        judgment.warnings.push_back(conf ? "confidence out of [0,1]; defaulted to 0"
                                         : "missing confidence field; defaulted to 0");
    }
    return judgment;
}

}  // namespace

ParsedOutput parse_structured_output(const std::string& raw) {
    if (trim(raw).empty()) throw MalformedOutput({"reasoning", "risk_level", "justification", "confidence"});
    auto fields = extract_fields(raw);

    std::vector<std::string> missing;
    for (const char* name : kFieldNames) {
        auto it = fields.find(name);
        if (it == fields.end() || trim(it->second).empty()) missing.push_back(name);
    }
    if (!missing.empty()) throw MalformedOutput(std::move(missing));

    auto conf = parse_confidence(fields.at("confidence"));
    if (!conf) throw MalformedOutput({"confidence"});
    if (*conf < 0.0 || *conf > 1.0) throw ConfidenceOutOfRange(*conf);

    ParsedOutput out;
    out.reasoning = fields.at("reasoning");
    out.risk_level = fields.at("risk_level");
    out.justification = fields.at("justification");
    out.confidence = *conf;
    return out;
}

std::string render_structured_output(const ParsedOutput& parsed) {
    char conf[32];
    std::snprintf(conf, sizeof(conf), "%.12g", parsed.confidence);
    std::ostringstream out;
    out << "reasoning: " << parsed.reasoning << "\n";
    out << "risk_level: " << parsed.risk_level << "\n";
    out << "justification: " << parsed.justification << "\n";
    out << "confidence: " << conf << "\n";
    return out.str();
}

DomainPrompt default_seed_prompt(RobDomain domain) {
    static const char* kEvidence[7] = {
        "Extract the exact sentence(s) describing how the allocation sequence was generated.",
        "Extract the exact sentence(s) describing how group assignments were concealed before "
        "enrollment.",
        "Extract the exact sentence(s) describing whether participants and personnel were blinded.",
        "Extract the exact sentence(s) describing whether outcome assessors were blinded.",
        "Extract the exact sentence(s) describing attrition, exclusions, and how incomplete outcome "
        "data were handled.",
        "Extract the exact sentence(s) describing which outcomes were prespecified and which were "
        "reported.",
        "Extract the exact sentence(s) describing any other potential source of bias.",
    };
    static const char* kEvaluative[7] = {
        "Was the allocation sequence adequately generated?",
        "Was the allocation adequately concealed?",
        "Were participants and personnel adequately blinded?",
        "Was outcome assessment adequately blinded?",
        "Were incomplete outcome data adequately addressed?",
        "Is the study free of selective outcome reporting?",
        "Is the study apparently free of other sources of bias?",
    };
    DomainPrompt prompt;
    prompt.domain = domain;
    prompt.instruction =
        "Assess the risk of bias for the domain \"" + canonical_name(domain) +
        "\" using only the provided trial text and the stated criteria. First identify the relevant "
        "evidence, then judge it. Answer with exactly four fields: reasoning (1-3 sentences), "
        "risk_level (Low, Unclear, or High), justification (tie the evidence to the criteria), and "
        "confidence (a decimal between 0 and 1).";
    prompt.evidence_question = kEvidence[static_cast<int>(domain)];
    prompt.evaluative_question = kEvaluative[static_cast<int>(domain)];
    prompt.version_id = "seed-" + to_string(domain);
    return prompt;
}

DomainJudgment assess_domain(const TrialDocument& trial, const DomainPrompt& prompt,
                             Gateway& gateway, const AssessOptions& options) {
    if (trial.body.empty()) throw EmptyBody(trial.trial_id);

    CompletionRequest request;
    request.role_tag = Role::main;
    request.system_text = prompt.instruction;
    request.user_text = compose_user_text(trial, prompt, options);
    request.decode = options.decode;
    request.group = options.group.empty() ? trial.trial_id : options.group;

    auto attempt = [&](const CompletionRequest& req) -> std::optional<DomainJudgment> {
        CompletionResult result = gateway.complete(req);
        try {
            ParsedOutput parsed = parse_structured_output(result.text);
            DomainJudgment judgment;
            judgment.domain = prompt.domain;
            judgment.reasoning = parsed.reasoning;
            judgment.risk_level = parse_label(parsed.risk_level);
            judgment.justification = parsed.justification;
            judgment.confidence = parsed.confidence;
            judgment.raw_text = result.text;
            return judgment;
        } catch (const Error&) {
            return judgment_from_fields(extract_fields(result.text), prompt.domain, result.text);
        }
    };

    if (auto judgment = attempt(request)) return *judgment;

    // One repair retry restating the output contract; the repair call is
    // recorded in the ledger like any other completion.
    CompletionRequest repair = request;
    repair.user_text +=
        "\n\nYour previous reply did not follow the output contract. Respond again with exactly "
        "these four fields, each as `key: value` on its own line: reasoning, risk_level (Low, "
        "Unclear, or High), justification, confidence (decimal in [0,1]).";
    if (auto judgment = attempt(repair)) return *judgment;
    throw MalformedOutput({"risk_level"});
}

TrialAssessment assess_trial(const TrialDocument& trial, const std::vector<DomainPrompt>& prompts,
                             Gateway& gateway, const AssessOptions& options,
                             const std::string& run_id) {
    {
        std::set<RobDomain> distinct;
        for (const auto& p : prompts) {
            if (!distinct.insert(p.domain).second) {
                throw ConfigError("duplicate domain in prompt list: " + to_string(p.domain));
            }
        }
    }

    TrialAssessment assessment;
    assessment.trial_id = trial.trial_id;
    assessment.run_id = run_id;
    std::exception_ptr first_error;
    for (const auto& prompt : prompts) {
        try {
            assessment.judgments[prompt.domain] = assess_domain(trial, prompt, gateway, options);
        } catch (const Error& e) {
            if (!first_error) first_error = std::current_exception();
            assessment.failures[prompt.domain] = e.code() + ": " + e.what();
        }
    }
    if (assessment.judgments.empty() && first_error) std::rethrow_exception(first_error);
    return assessment;
}

nlohmann::json assessment_to_json(const TrialAssessment& assessment) {
    nlohmann::json judgments = nlohmann::json::object();
    for (const auto& [domain, j] : assessment.judgments) {
        nlohmann::json rec{
            {"reasoning", j.reasoning},
            {"risk_level", to_string(j.risk_level)},
            {"justification", j.justification},
            {"confidence", j.confidence},
            {"raw_text", j.raw_text},
        };
        if (!j.warnings.empty()) rec["warnings"] = j.warnings;
        judgments[to_string(domain)] = std::move(rec);
    }
    nlohmann::json out{{"trial_id", assessment.trial_id},
                       {"run_id", assessment.run_id},
                       {"judgments", std::move(judgments)}};
    if (!assessment.failures.empty()) {
        nlohmann::json failures = nlohmann::json::object();
        for (const auto& [domain, note] : assessment.failures) failures[to_string(domain)] = note;
        out["failures"] = std::move(failures);
    }
    return out;
}

TrialAssessment assessment_from_json(const nlohmann::json& record) {
    TrialAssessment assessment;
    assessment.trial_id = record.at("trial_id").get<std::string>();
    assessment.run_id = record.value("run_id", std::string{});
    for (const auto& [code, rec] : record.at("judgments").items()) {
        DomainJudgment j;
        j.domain = parse_domain(code);
        j.reasoning = rec.value("reasoning", std::string{});
        j.risk_level = parse_label(rec.at("risk_level").get<std::string>());
        j.justification = rec.value("justification", std::string{});
        j.confidence = rec.value("confidence", 0.0);
        j.raw_text = rec.value("raw_text", std::string{});
        if (rec.contains("warnings")) j.warnings = rec.at("warnings").get<std::vector<std::string>>();
        assessment.judgments[j.domain] = std::move(j);
    }
    if (record.contains("failures")) {
        for (const auto& [code, note] : record.at("failures").items()) {
            assessment.failures[parse_domain(code)] = note.get<std::string>();
        }
    }
    return assessment;
}

nlohmann::json prompt_to_json(const DomainPrompt& prompt, const std::vector<std::string>& lineage) {
    return nlohmann::json{{"domain", to_string(prompt.domain)},
                          {"instruction", prompt.instruction},
                          {"evidence_question", prompt.evidence_question},
                          {"evaluative_question", prompt.evaluative_question},
                          {"version_id", prompt.version_id},
                          {"lineage", lineage}};
}

DomainPrompt prompt_from_json(const nlohmann::json& record) {
    DomainPrompt prompt;
    prompt.domain = parse_domain(record.at("domain").get<std::string>());
    prompt.instruction = record.at("instruction").get<std::string>();
    prompt.evidence_question = record.at("evidence_question").get<std::string>();
    prompt.evaluative_question = record.at("evaluative_question").get<std::string>();
    prompt.version_id = record.value("version_id", std::string{});
    if (prompt.instruction.empty()) {
        throw MalformedRecord("prompt artifact", "empty instruction");
    }
    return prompt;
}

}  // namespace robforge
