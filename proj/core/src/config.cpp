// SPDX-License-Identifier: Apache-2.0

#include <robforge/config.hpp>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace robforge {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

/// ROBFORGE_BACKENDS_MAIN_MODEL overrides "backends.main.model", etc.
std::optional<std::string> env_override(const std::string& key) {
    std::string name = "ROBFORGE_";
    for (char c : key) {
        name += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
}

}  // namespace

TomlDoc TomlDoc::parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_string(buffer.str(), path.string());
}

TomlDoc TomlDoc::parse_string(const std::string& text, const std::string& origin) {
    TomlDoc doc;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        auto where = [&] { return origin + ":" + std::to_string(lineno); };
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError(where() + ": unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            if (section.empty()) throw ConfigError(where() + ": empty section name");
            continue;
        }
        std::size_t eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(where() + ": expected key = value");
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (key.empty()) throw ConfigError(where() + ": empty key");
        if (!value.empty() && value.front() == '"') {
            std::size_t close = value.find('"', 1);
            if (close == std::string::npos) throw ConfigError(where() + ": unterminated string");
            value = value.substr(1, close - 1);
        } else {
            // strip a trailing comment from bare values
            std::size_t hash = value.find('#');
            if (hash != std::string::npos) value = trim(value.substr(0, hash));
        }
        doc.values_[section.empty() ? key : section + "." + key] = value;
    }
    return doc;
}

std::optional<std::string> TomlDoc::get_string(const std::string& key) const {
    if (auto env = env_override(key)) return env;
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::int64_t> TomlDoc::get_int(const std::string& key) const {
    auto raw = get_string(key);
    if (!raw) return std::nullopt;
    try {
        return std::stoll(*raw);
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + " is not an integer: " + *raw);
    }
}

std::optional<double> TomlDoc::get_double(const std::string& key) const {
    auto raw = get_string(key);
    if (!raw) return std::nullopt;
    try {
        return std::stod(*raw);
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + " is not a number: " + *raw);
    }
}

std::optional<bool> TomlDoc::get_bool(const std::string& key) const {
    auto raw = get_string(key);
    if (!raw) return std::nullopt;
    if (*raw == "true") return true;
    if (*raw == "false") return false;
    throw ConfigError("config key " + key + " is not a boolean: " + *raw);
}

OptimizationBudget parse_budget(const std::string& text) {
    if (text == "light") return OptimizationBudget::light();
    if (text.rfind("cap=", 0) == 0) {
        try {
            long cap = std::stol(text.substr(4));
            if (cap < 1) throw ConfigError("budget cap must be >= 1");
            return OptimizationBudget::capped(cap);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError("malformed budget cap: " + text);
        }
    }
    throw ConfigError("unknown budget preset: " + text + " (expected light or cap=N)");
}

RunConfig config_from_toml(const TomlDoc& doc) {
    RunConfig cfg;
    auto fill_model = [&](ModelSpec& spec, const std::string& section) {
        if (auto v = doc.get_string(section + ".kind")) spec.kind = *v;
        if (auto v = doc.get_string(section + ".model")) spec.model = *v;
        if (auto v = doc.get_string(section + ".base_url")) spec.base_url = *v;
        if (auto v = doc.get_int(section + ".input_microusd_per_token")) {
            spec.prices.input_microusd_per_token = *v;
        }
        if (auto v = doc.get_int(section + ".output_microusd_per_token")) {
            spec.prices.output_microusd_per_token = *v;
        }
        if (spec.kind != "mock" && spec.kind != "http") {
            throw ConfigError(section + ".kind must be \"mock\" or \"http\"");
        }
        if (spec.kind == "http" && spec.base_url.empty()) {
            throw ConfigError(section + ".base_url is required for the http backend");
        }
    };
    fill_model(cfg.main_backend, "backends.main");
    fill_model(cfg.reflection_backend, "backends.reflection");

    if (auto v = doc.get_double("decode.temperature")) cfg.decode.temperature = *v;
    if (auto v = doc.get_double("decode.top_p")) cfg.decode.top_p = *v;
    if (auto v = doc.get_int("decode.seed")) cfg.decode.seed = *v;
    if (cfg.decode.temperature < 0) throw ConfigError("decode.temperature must be >= 0");
    if (cfg.decode.top_p <= 0 || cfg.decode.top_p > 1) {
        throw ConfigError("decode.top_p must be in (0, 1]");
    }

    if (auto v = doc.get_string("run.budget")) cfg.budget = parse_budget(*v);
    if (auto v = doc.get_int("run.n_runs")) cfg.n_runs = static_cast<int>(*v);
    if (auto v = doc.get_int("run.n_evals")) cfg.n_evals = static_cast<int>(*v);
    if (auto v = doc.get_int("run.parallelism")) cfg.parallelism = static_cast<int>(*v);
    if (cfg.n_runs < 1 || cfg.n_evals < 1 || cfg.parallelism < 1) {
        throw ConfigError("run.n_runs, run.n_evals and run.parallelism must be >= 1");
    }

    if (auto v = doc.get_string("paths.trials")) cfg.trials = *v;
    if (auto v = doc.get_string("paths.gold")) cfg.gold = *v;
    if (auto v = doc.get_string("paths.examples")) cfg.examples = *v;
    if (auto v = doc.get_string("paths.output_dir")) cfg.output_dir = *v;
    if (auto v = doc.get_string("paths.mock_script")) cfg.mock_script = *v;
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    return config_from_toml(TomlDoc::parse_file(path));
}

}  // namespace robforge
