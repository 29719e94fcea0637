// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdlib>

#include <robforge/config.hpp>

using namespace robforge;

namespace {

const char* kSample = R"(
# run configuration
[backends.main]
kind = "mock"
model = "mock-main"
input_microusd_per_token = 2
output_microusd_per_token = 6

[backends.reflection]
kind = "http"
model = "big-model"
base_url = "http://127.0.0.1:9"
[decode]
temperature = 0.0
top_p = 0.95
seed = 7  # inline comment

[run]
budget = "cap=99"
n_runs = 2
n_evals = 4

[paths]
trials = "/tmp/trials.jsonl"
mock_script = "/tmp/script.jsonl"
)";

}  // namespace

TEST_CASE("the toml subset parses sections, types, and comments") {
    TomlDoc doc = TomlDoc::parse_string(kSample);
    CHECK(*doc.get_string("backends.main.kind") == "mock");
    CHECK(*doc.get_string("backends.reflection.base_url") == "http://127.0.0.1:9");
    CHECK(*doc.get_int("decode.seed") == 7);
    CHECK(*doc.get_double("decode.top_p") == doctest::Approx(0.95));
    CHECK(!doc.get_string("paths.gold").has_value());
    CHECK(doc.contains("run.budget"));

    CHECK_THROWS_AS(TomlDoc::parse_string("[broken\nk = 1"), ConfigError);
    CHECK_THROWS_AS(TomlDoc::parse_string("no equals sign"), ConfigError);
    CHECK_THROWS_AS(TomlDoc::parse_string("k = \"unterminated"), ConfigError);

    TomlDoc typed = TomlDoc::parse_string("[a]\nx = \"text\"\nb = maybe");
    CHECK_THROWS_AS(typed.get_int("a.x"), ConfigError);
    CHECK_THROWS_AS(typed.get_bool("a.b"), ConfigError);
}

TEST_CASE("environment variables override file values key by key") {
    TomlDoc doc = TomlDoc::parse_string(kSample);
    setenv("ROBFORGE_DECODE_SEED", "1234", 1);
    setenv("ROBFORGE_BACKENDS_MAIN_MODEL", "swapped", 1);
    CHECK(*doc.get_int("decode.seed") == 1234);
    CHECK(*doc.get_string("backends.main.model") == "swapped");
    unsetenv("ROBFORGE_DECODE_SEED");
    unsetenv("ROBFORGE_BACKENDS_MAIN_MODEL");
    CHECK(*doc.get_int("decode.seed") == 7);
}

TEST_CASE("budget presets parse to caps") {
    CHECK(parse_budget("light").metric_call_cap == 428);
    CHECK(parse_budget("light").preset == "light");
    CHECK(parse_budget("cap=17").metric_call_cap == 17);
    CHECK_THROWS_AS(parse_budget("cap=0"), ConfigError);
    CHECK_THROWS_AS(parse_budget("cap=x"), ConfigError);
    CHECK_THROWS_AS(parse_budget("heavy"), ConfigError);
}

TEST_CASE("run config is assembled and validated from the document") {
    RunConfig cfg = config_from_toml(TomlDoc::parse_string(kSample));
    CHECK(cfg.main_backend.kind == "mock");
    CHECK(cfg.main_backend.prices.input_microusd_per_token == 2);
    CHECK(cfg.reflection_backend.kind == "http");
    CHECK(cfg.reflection_backend.base_url == "http://127.0.0.1:9");
    CHECK(cfg.decode.seed == 7);
    CHECK(cfg.budget.metric_call_cap == 99);
    CHECK(cfg.n_runs == 2);
    CHECK(cfg.n_evals == 4);
    CHECK(cfg.parallelism == 1);  // default
    CHECK(cfg.trials == "/tmp/trials.jsonl");

    CHECK_THROWS_AS(config_from_toml(TomlDoc::parse_string("[backends.main]\nkind = \"ftp\"")),
                    ConfigError);
    CHECK_THROWS_AS(config_from_toml(TomlDoc::parse_string("[backends.main]\nkind = \"http\"")),
                    ConfigError);  // http requires base_url
    CHECK_THROWS_AS(config_from_toml(TomlDoc::parse_string("[decode]\ntop_p = 0.0")), ConfigError);
    CHECK_THROWS_AS(config_from_toml(TomlDoc::parse_string("[decode]\ntemperature = -1.0")),
                    ConfigError);
    CHECK_THROWS_AS(config_from_toml(TomlDoc::parse_string("[run]\nn_runs = 0")), ConfigError);
}

TEST_CASE("defaults match the published run settings") {
    RunConfig cfg;
    CHECK(cfg.decode.temperature == 0.0);
    CHECK(cfg.decode.top_p == 1.0);
    CHECK(cfg.decode.seed == 42);
    CHECK(cfg.budget.metric_call_cap == 428);
    CHECK(cfg.n_runs == 5);
    CHECK(cfg.n_evals == 3);
}
