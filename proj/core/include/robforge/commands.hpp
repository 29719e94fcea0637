// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <robforge/config.hpp>
#include <robforge/gateway.hpp>

namespace robforge {

// Exit codes shared with the CLI: 0 success, 1 partial (some items failed),
// 2 usage/config error (mapped by the caller from thrown errors).
inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitUsage = 2;

/// Builds the gateway named by the config (mock script or HTTP backends).
std::unique_ptr<Gateway> make_gateway(const RunConfig& config);

/// Resolves the output directory: an explicit --out path is used as-is;
/// otherwise a run-<decimal timestamp> directory under config.output_dir.
std::filesystem::path prepare_out_dir(const RunConfig& config,
                                      const std::optional<std::filesystem::path>& out_override);

/// Writes manifest.json (filename -> content digest) over every regular file
/// in the directory.
void write_manifest(const std::filesystem::path& out_dir);

/// optimize: runs the stability protocol for one domain, writing one prompt
/// artifact + trace per run.
int run_optimize(const RunConfig& config, RobDomain domain, const std::filesystem::path& out_dir);

/// assess: applies prompt artifacts to every trial, n_evals repetitions,
/// writing assessments_rep<k>.jsonl.
int run_assess(const RunConfig& config, const std::vector<std::filesystem::path>& artifact_paths,
               const std::filesystem::path& out_dir);

/// evaluate: per-domain metric reports (aggregated over repetitions) plus
/// the pooled ALL row; writes metrics.csv and disagreements.jsonl.
int run_evaluate(const RunConfig& config,
                 const std::vector<std::filesystem::path>& assessment_paths,
                 const std::filesystem::path& out_dir);

/// compare: side-by-side correct-rate table across >= 2 metrics.csv files
/// plus per-system medians across domains; writes comparison.csv.
int run_compare(const std::vector<std::filesystem::path>& metric_paths,
                std::vector<std::string> labels, const std::filesystem::path& out_dir);

}  // namespace robforge
