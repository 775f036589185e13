#pragma once

#include <filesystem>
#include <iosfwd>

#include <json.hpp>

#include "rlab/config.hpp"
#include "rlab/error.hpp"

namespace rlab {

/// Everything a subcommand needs. Outputs go under `out_dir`, which is
/// created on demand; each command also writes `resolved_config.txt` there.
struct CommandContext {
  RunConfig config;
  std::filesystem::path out_dir = ".";
  std::ostream* log = nullptr;  // progress lines; null = silent
};

// Each command returns the JSON it wrote as its main report.
nlohmann::json cmd_train(const CommandContext& ctx);
nlohmann::json cmd_sample(const CommandContext& ctx);
nlohmann::json cmd_similarity(const CommandContext& ctx);
nlohmann::json cmd_perturb(const CommandContext& ctx);
nlohmann::json cmd_search(const CommandContext& ctx);
nlohmann::json cmd_exhaustive(const CommandContext& ctx);
nlohmann::json cmd_compare(const CommandContext& ctx);

/// Largest step count whose full-compute latency fits within `budget_ms`
/// (at least 1).
int matched_reduced_steps(double budget_ms, const CostModel& model);

/// Process exit code for an error kind: 2 config / invalid strategy,
/// 3 missing artifact, 4 budget or search safeguard, 5 numeric failure,
/// 1 anything else.
int exit_code_for(ErrorKind kind) noexcept;

}  // namespace rlab
