// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include <robforge/errors.hpp>

namespace robforge {

/// Reads a JSONL file; one parsed object per non-blank line. Parse failures
/// report the 1-based line number.
inline std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MalformedRecord(path.string(), "cannot open file");
    std::vector<nlohmann::json> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw MalformedRecord(path.string() + ":" + std::to_string(lineno), e.what());
        }
    }
    return out;
}

inline void write_jsonl(const std::filesystem::path& path,
                        const std::vector<nlohmann::json>& records) {
    std::ofstream out(path);
    if (!out) throw MalformedRecord(path.string(), "cannot open file for writing");
    for (const auto& rec : records) out << rec.dump() << '\n';
}

/// 64-bit FNV-1a, rendered as 16 hex digits. Used for mock-script matching
/// and output manifests.
inline std::string fnv1a_hex(std::string_view data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MalformedRecord(path.string(), "cannot open file");
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace robforge
