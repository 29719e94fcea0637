// SPDX-License-Identifier: Apache-2.0

#include <robforge/gateway.hpp>

#include <cstdlib>
#include <sstream>
#include <thread>
#include <tuple>

#include <nlohmann/json.hpp>

#include <robforge/jsonl.hpp>

// httplib pulled in only here to keep rebuilds cheap.
#include <httplib.h>

namespace robforge {

namespace {

std::int64_t count_tokens(const std::string& text) {
    std::istringstream in(text);
    std::string tok;
    std::int64_t n = 0;
    while (in >> tok) ++n;
    return n;
}

}  // namespace

std::string to_string(Role role) { return role == Role::main ? "main" : "reflection"; }

std::string format_usd(double usd) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", usd);
    return buf;
}

void CostLedger::append(const UsageRecord& record) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto now = std::chrono::steady_clock::now();
    if (!first_) first_ = now;
    last_ = now;
    totals_[record.role_tag == Role::main ? 0 : 1] += record.cost_microusd;
    entries_.push_back(record);
}

std::vector<UsageRecord> CostLedger::entries() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_;
}

std::int64_t CostLedger::total_microusd(Role role) const {
    std::lock_guard<std::mutex> lock(mutex_);
    return totals_[role == Role::main ? 0 : 1];
}

std::size_t CostLedger::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_.size();
}

LedgerReport CostLedger::report() const {
    std::lock_guard<std::mutex> lock(mutex_);
    LedgerReport r;
    r.main_usd = static_cast<double>(totals_[0]) / 1e6;
    r.reflection_usd = static_cast<double>(totals_[1]) / 1e6;
    if (first_ && last_) {
        r.wall_minutes =
            std::chrono::duration_cast<std::chrono::milliseconds>(*last_ - *first_).count() / 60000.0;
    }
    return r;
}

std::string MockBackend::request_digest(const CompletionRequest& request) {
    return fnv1a_hex(to_string(request.role_tag) + "\x1f" + request.system_text + "\x1f" +
                     request.user_text);
}

std::vector<MockRule> MockBackend::load_script(const std::filesystem::path& path) {
    std::vector<MockRule> rules;
    for (const auto& rec : read_jsonl(path)) {
        MockRule rule;
        rule.match = rec.at("match").get<std::string>();
        rule.response = rec.at("response").get<std::string>();
        if (rec.contains("role")) {
            std::string role = rec.at("role").get<std::string>();
            if (role == "main") rule.role = Role::main;
            else if (role == "reflection") rule.role = Role::reflection;
            else throw MalformedRecord(path.string(), "unknown role: " + role);
        }
        rules.push_back(std::move(rule));
    }
    return rules;
}

std::tuple<std::string, std::int64_t, std::int64_t> MockBackend::complete_raw(
    const CompletionRequest& request) {
    std::string digest = request_digest(request);
    std::string haystack = request.system_text + "\n" + request.user_text;
    for (const auto& rule : rules_) {
        if (rule.role && *rule.role != request.role_tag) continue;
        bool hit = rule.match == "*" || rule.match == digest ||
                   haystack.find(rule.match) != std::string::npos;
        if (hit) {
            return {rule.response, count_tokens(request.system_text) + count_tokens(request.user_text),
                    count_tokens(rule.response)};
        }
    }
    throw ProviderError(404, "no mock rule matched request digest " + digest);
}

HttpBackend::HttpBackend(std::string base_url, std::string model)
    : base_url_(std::move(base_url)), model_(std::move(model)) {}

std::tuple<std::string, std::int64_t, std::int64_t> HttpBackend::complete_raw(
    const CompletionRequest& request) {
    nlohmann::json body{
        {"model", model_},
        {"messages",
         {{{"role", "system"}, {"content", request.system_text}},
          {{"role", "user"}, {"content", request.user_text}}}},
        {"temperature", request.decode.temperature},
        {"top_p", request.decode.top_p},
        {"seed", request.decode.seed},
    };

    httplib::Client client(base_url_);
    client.set_read_timeout(300, 0);
    httplib::Headers headers;
    if (const char* key = std::getenv("ROBFORGE_API_KEY")) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    auto res = client.Post("/chat/completions", headers, body.dump(), "application/json");
    if (!res) throw TransportError(httplib::to_string(res.error()));
    if (res->status != 200) throw ProviderError(res->status, res->body);

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(res->status, std::string("unparseable response body: ") + e.what());
    }
    std::string text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
    std::int64_t prompt_tokens = count_tokens(request.system_text) + count_tokens(request.user_text);
    std::int64_t completion_tokens = count_tokens(text);
    if (doc.contains("usage")) {
        const auto& usage = doc.at("usage");
        prompt_tokens = usage.value("prompt_tokens", prompt_tokens);
        completion_tokens = usage.value("completion_tokens", completion_tokens);
    }
    return {text, prompt_tokens, completion_tokens};
}

Gateway::Gateway(std::shared_ptr<Backend> main_backend, std::shared_ptr<Backend> reflection_backend,
                 PriceTable main_prices, PriceTable reflection_prices, GatewayOptions options)
    : main_(std::move(main_backend)),
      reflection_(std::move(reflection_backend)),
      main_prices_(main_prices),
      reflection_prices_(reflection_prices),
      options_(options) {}

Backend& Gateway::backend_for(Role role) {
    auto& ptr = role == Role::main ? main_ : reflection_;
    if (!ptr) throw ProviderError(0, "no backend configured for role " + to_string(role));
    return *ptr;
}

const PriceTable& Gateway::prices_for(Role role) const {
    return role == Role::main ? main_prices_ : reflection_prices_;
}

CompletionResult Gateway::complete(const CompletionRequest& request) {
    if (options_.cost_cap_microusd) {
        std::int64_t spent =
            ledger_.total_microusd(Role::main) + ledger_.total_microusd(Role::reflection);
        if (spent >= *options_.cost_cap_microusd) {
            throw BudgetExceeded(spent, *options_.cost_cap_microusd);
        }
    }

    const PriceTable& prices = prices_for(request.role_tag);
    Backend& backend = backend_for(request.role_tag);

    auto start = std::chrono::steady_clock::now();
    auto record_and_throw = [&](std::int64_t prompt_tokens) {
        UsageRecord failure;
        failure.role_tag = request.role_tag;
        failure.prompt_tokens = prompt_tokens;
        failure.completion_tokens = 0;
        failure.cost_microusd = prompt_tokens * prices.input_microusd_per_token;
        failure.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - start)
                                 .count();
        failure.group = request.group;
        failure.failed = true;
        ledger_.append(failure);
    };

    int backoff_ms = options_.backoff_initial_ms;
    for (int attempt = 1;; ++attempt) {
        try {
            auto [text, prompt_tokens, completion_tokens] = backend.complete_raw(request);
            UsageRecord usage;
            usage.role_tag = request.role_tag;
            usage.prompt_tokens = prompt_tokens;
            usage.completion_tokens = completion_tokens;
            usage.cost_microusd = prompt_tokens * prices.input_microusd_per_token +
                                  completion_tokens * prices.output_microusd_per_token;
            usage.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                   std::chrono::steady_clock::now() - start)
                                   .count();
            usage.group = request.group;
            ledger_.append(usage);
            return {std::move(text), usage};
        } catch (const TransportError&) {
            if (attempt >= options_.max_attempts) {
                record_and_throw(count_tokens(request.system_text) + count_tokens(request.user_text));
                throw;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            backoff_ms *= 2;
        } catch (const ProviderError&) {
            record_and_throw(count_tokens(request.system_text) + count_tokens(request.user_text));
            throw;
        }
    }
}

}  // namespace robforge
