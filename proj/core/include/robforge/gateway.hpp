// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <robforge/errors.hpp>

namespace robforge {

/// Which side of the dual-model setup a request targets: the base model doing
/// primary reasoning or the reflection model guiding optimization feedback.
enum class Role { main, reflection };

std::string to_string(Role role);

struct DecodeParams {
    double temperature = 0.0;
    double top_p = 1.0;
    std::int64_t seed = 42;
};

struct CompletionRequest {
    Role role_tag = Role::main;
    std::string system_text;
    std::string user_text;
    DecodeParams decode;
    /// Optional grouping key (e.g. trial id) for per-article cost breakdowns.
    std::string group;
};

struct UsageRecord {
    Role role_tag = Role::main;
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    std::int64_t cost_microusd = 0;
    std::int64_t latency_ms = 0;
    std::string group;
    bool failed = false;
};

struct CompletionResult {
    std::string text;
    UsageRecord usage;
};

/// Per-token prices in integer micro-dollars.
struct PriceTable {
    std::int64_t input_microusd_per_token = 0;
    std::int64_t output_microusd_per_token = 0;
};

struct LedgerReport {
    double main_usd = 0.0;
    double reflection_usd = 0.0;
    double wall_minutes = 0.0;
};

/// Renders a USD amount to 3 decimals, e.g. "0.040".
std::string format_usd(double usd);

/// Append-only usage log with exact integer totals per role. Appends are
/// serialized; totals never pass through floating point.
class CostLedger {
public:
    void append(const UsageRecord& record);
    std::vector<UsageRecord> entries() const;
    std::int64_t total_microusd(Role role) const;
    std::size_t size() const;

    LedgerReport report() const;

private:
    mutable std::mutex mutex_;
    std::vector<UsageRecord> entries_;
    std::int64_t totals_[2] = {0, 0};
    std::optional<std::chrono::steady_clock::time_point> first_;
    std::optional<std::chrono::steady_clock::time_point> last_;
};

/// Raw transport: produces text plus token counts, no pricing or retries.
class Backend {
public:
    virtual ~Backend() = default;
    /// Returns (text, prompt_tokens, completion_tokens).
    virtual std::tuple<std::string, std::int64_t, std::int64_t> complete_raw(
        const CompletionRequest& request) = 0;
};

/// One scripted response rule. `match` is either the 16-hex request digest or
/// a plain substring checked against system_text + user_text; "*" matches
/// everything. An optional role restricts the rule to one side of the dual
/// setup.
struct MockRule {
    std::string match;
    std::string response;
    std::optional<Role> role;
};

/// Deterministic scripted backend for offline runs: identical request
/// sequences produce byte-identical responses. Tokens are counted as
/// whitespace-delimited words.
class MockBackend : public Backend {
public:
    explicit MockBackend(std::vector<MockRule> rules) : rules_(std::move(rules)) {}

    static std::string request_digest(const CompletionRequest& request);
    static std::vector<MockRule> load_script(const std::filesystem::path& path);

    std::tuple<std::string, std::int64_t, std::int64_t> complete_raw(
        const CompletionRequest& request) override;

private:
    std::vector<MockRule> rules_;
};

/// OpenAI-compatible chat-completions backend. The bearer token comes from
/// the ROBFORGE_API_KEY environment variable, never from config.
class HttpBackend : public Backend {
public:
    HttpBackend(std::string base_url, std::string model);

    std::tuple<std::string, std::int64_t, std::int64_t> complete_raw(
        const CompletionRequest& request) override;

private:
    std::string base_url_;
    std::string model_;
};

struct GatewayOptions {
    int max_attempts = 3;                 // transport-level retries only
    int backoff_initial_ms = 100;
    std::optional<std::int64_t> cost_cap_microusd;
    int parallelism = 1;
};

/// Routes requests to the configured backend per role, applies the retry
/// policy, prices usage, and records every call (including failures, with
/// zero completion tokens) into the ledger.
class Gateway {
public:
    Gateway(std::shared_ptr<Backend> main_backend, std::shared_ptr<Backend> reflection_backend,
            PriceTable main_prices, PriceTable reflection_prices, GatewayOptions options = {});

    CompletionResult complete(const CompletionRequest& request);

    CostLedger& ledger() { return ledger_; }
    const CostLedger& ledger() const { return ledger_; }
    const GatewayOptions& options() const { return options_; }

private:
    Backend& backend_for(Role role);
    const PriceTable& prices_for(Role role) const;

    std::shared_ptr<Backend> main_;
    std::shared_ptr<Backend> reflection_;
    PriceTable main_prices_;
    PriceTable reflection_prices_;
    GatewayOptions options_;
    CostLedger ledger_;
};

}  // namespace robforge
