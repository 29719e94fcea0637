// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <robforge/gateway.hpp>
#include <robforge/optimizer.hpp>

namespace robforge {

/// Flat view of a TOML document: "section.key" -> raw value. Covers the
/// subset this project uses (sections, strings, integers, floats, booleans,
/// comments); no system TOML library is available in this toolchain.
class TomlDoc {
public:
    static TomlDoc parse_file(const std::filesystem::path& path);
    static TomlDoc parse_string(const std::string& text, const std::string& origin = "<string>");

    std::optional<std::string> get_string(const std::string& key) const;
    std::optional<std::int64_t> get_int(const std::string& key) const;
    std::optional<double> get_double(const std::string& key) const;
    std::optional<bool> get_bool(const std::string& key) const;
    bool contains(const std::string& key) const { return values_.contains(key); }

private:
    std::map<std::string, std::string> values_;  // raw (unquoted) text
};

struct ModelSpec {
    std::string kind = "mock";  // "mock" | "http"
    std::string model;
    std::string base_url;
    PriceTable prices;
};

/// Declarative run configuration (TOML file + ROBFORGE_* environment
/// overrides). The API key is read only from ROBFORGE_API_KEY, never from
/// the file.
struct RunConfig {
    ModelSpec main_backend;
    ModelSpec reflection_backend;
    DecodeParams decode;  // defaults: temperature 0.0, top_p 1.0, seed 42
    OptimizationBudget budget = OptimizationBudget::light();
    std::filesystem::path trials;
    std::filesystem::path gold;
    std::filesystem::path examples;
    std::filesystem::path output_dir;
    std::filesystem::path mock_script;
    int parallelism = 1;
    int n_runs = 5;
    int n_evals = 3;
};

/// Parses "light" or "cap=N".
OptimizationBudget parse_budget(const std::string& text);

RunConfig config_from_toml(const TomlDoc& doc);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace robforge
