#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rlab/analysis.hpp"
#include "rlab/cache.hpp"
#include "rlab/metrics.hpp"
#include "rlab/sampler.hpp"
#include "rlab/strategy.hpp"
#include "rlab/train.hpp"

namespace rlab {

/// Flat key=value run configuration. Lines are UTF-8, '#' starts a comment,
/// blank lines are ignored. Unknown keys are rejected (ErrorKind::config).
class RunConfig {
 public:
  RunConfig() = default;

  static RunConfig parse(std::string_view text);
  static RunConfig load(const std::filesystem::path& path);

  /// Every key this program understands, with its default value.
  static const std::map<std::string, std::string>& defaults();

  void set(const std::string& key, const std::string& value);
  bool explicitly_set(const std::string& key) const { return values_.contains(key); }

  std::string get(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  double get_double(const std::string& key) const;

  /// Defaults merged with explicit values, sorted by key.
  std::map<std::string, std::string> resolved() const;
  /// resolved() as key=value text, parseable by `parse`.
  std::string dump() const;

  // Typed views.
  std::filesystem::path checkpoint() const { return get("checkpoint"); }
  std::uint64_t seed() const { return static_cast<std::uint64_t>(get_int("seed")); }
  std::vector<std::uint64_t> seeds() const;
  std::vector<PromptSpec> prompts() const;
  std::vector<PromptSeed> prompt_seeds() const { return prompt_grid(prompts(), seeds()); }
  int steps() const;
  int reuse() const;
  std::optional<StrategyVector> strategy() const;
  SamplerConfig sampler() const;
  ReuseConfig reuse_config() const;
  CostModel cost_model() const;
  TrainConfig train_config() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace rlab
