// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace robforge {

/// Base class for all library errors. `code()` is a stable machine-readable
/// identifier; `what()` carries the human-readable detail.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// ---- label / domain ----

struct UnrecognizedLabel : Error {
    explicit UnrecognizedLabel(const std::string& raw)
        : Error("UnrecognizedLabel", "unrecognized risk label: \"" + raw + "\""), raw(raw) {}
    std::string raw;
};

// ---- corpus ----

struct DuplicateTrialId : Error {
    explicit DuplicateTrialId(const std::string& trial_id)
        : Error("DuplicateTrialId", "duplicate trial id: " + trial_id), trial_id(trial_id) {}
    std::string trial_id;
};

struct EmptyBody : Error {
    explicit EmptyBody(const std::string& trial_id)
        : Error("EmptyBody", "empty body for trial: " + trial_id), trial_id(trial_id) {}
    std::string trial_id;
};

struct MalformedRecord : Error {
    MalformedRecord(const std::string& where, const std::string& detail)
        : Error("MalformedRecord", "malformed record at " + where + ": " + detail), where(where) {}
    std::string where;
};

struct MissingDomain : Error {
    MissingDomain(const std::string& trial_id, const std::string& domain_code)
        : Error("MissingDomain", "trial " + trial_id + " is missing domain " + domain_code),
          trial_id(trial_id), domain_code(domain_code) {}
    std::string trial_id;
    std::string domain_code;
};

struct InsufficientExamples : Error {
    InsufficientExamples(const std::string& label, int have, int need)
        : Error("InsufficientExamples",
                "label \"" + label + "\": have " + std::to_string(have) + " examples, need " +
                    std::to_string(need)),
          label(label), have(have), need(need) {}
    std::string label;
    int have;
    int need;
};

// ---- gateway ----

struct TransportError : Error {
    explicit TransportError(const std::string& detail)
        : Error("TransportError", "transport failure: " + detail) {}
};

struct ProviderError : Error {
    ProviderError(int status, const std::string& body)
        : Error("ProviderError", "provider error (status " + std::to_string(status) + "): " + body),
          status(status), body(body) {}
    int status;
    std::string body;
};

struct BudgetExceeded : Error {
    BudgetExceeded(long long used, long long cap)
        : Error("BudgetExceeded",
                "budget exhausted: " + std::to_string(used) + "/" + std::to_string(cap)),
          used(used), cap(cap) {}
    long long used;
    long long cap;
};

// ---- assessment ----

struct MalformedOutput : Error {
    explicit MalformedOutput(std::vector<std::string> missing_fields)
        : Error("MalformedOutput", "structured output missing fields: " + join(missing_fields)),
          missing_fields(std::move(missing_fields)) {}
    std::vector<std::string> missing_fields;

private:
    static std::string join(const std::vector<std::string>& fields) {
        std::string out;
        for (const auto& f : fields) {
            if (!out.empty()) out += ", ";
            out += f;
        }
        return out;
    }
};

struct ConfidenceOutOfRange : Error {
    explicit ConfidenceOutOfRange(double value)
        : Error("ConfidenceOutOfRange", "confidence out of [0,1]: " + std::to_string(value)),
          value(value) {}
    double value;
};

// ---- optimizer ----

struct UnscoredCandidate : Error {
    explicit UnscoredCandidate(const std::string& candidate_id)
        : Error("UnscoredCandidate", "candidate not scored: " + candidate_id) {}
};

struct EmptyFront : Error {
    EmptyFront() : Error("EmptyFront", "pareto front is empty") {}
};

struct EmptyReflection : Error {
    EmptyReflection() : Error("EmptyReflection", "reflection model returned blank output") {}
};

// ---- harmonizer ----

struct EmptyRatingSet : Error {
    EmptyRatingSet() : Error("EmptyRatingSet", "subdomain rating set is empty") {}
};

struct UnmappedDomain : Error {
    explicit UnmappedDomain(const std::string& external_name)
        : Error("UnmappedDomain", "external domain not declared in mapping: " + external_name),
          external_name(external_name) {}
    std::string external_name;
};

// ---- evaluation ----

struct EmptyInput : Error {
    EmptyInput() : Error("EmptyInput", "empty input") {}
};

struct MixedDomains : Error {
    MixedDomains() : Error("MixedDomains", "pairs span more than one domain") {}
};

struct HeterogeneousReports : Error {
    explicit HeterogeneousReports(const std::string& detail)
        : Error("HeterogeneousReports", "cannot aggregate reports: " + detail) {}
};

struct AllResamplesUndefined : Error {
    AllResamplesUndefined()
        : Error("AllResamplesUndefined", "statistic undefined on every bootstrap resample") {}
};

struct MissingGold : Error {
    explicit MissingGold(const std::string& trial_id)
        : Error("MissingGold", "no gold labels for assessed trial: " + trial_id),
          trial_id(trial_id) {}
    std::string trial_id;
};

// ---- cli ----

struct SchemaMismatch : Error {
    explicit SchemaMismatch(const std::string& detail)
        : Error("SchemaMismatch", "metric file schema mismatch: " + detail) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& detail) : Error("ConfigError", detail) {}
};

}  // namespace robforge
