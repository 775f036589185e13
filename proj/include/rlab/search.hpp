#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rlab/analysis.hpp"
#include "rlab/strategy.hpp"

namespace rlab {

/// Binomial coefficient, exact in 64 bits for the sizes used here.
std::uint64_t binomial(int n, int k);

/// Number of N-step strategies with r reuse steps. With the first-step
/// constraint the first bit is pinned to 1: C(N-1, r); without it C(N, r).
std::uint64_t strategy_space_size(int n, int r, bool first_step_fixed = true);

/// One round's bit-flip neighbourhood size: (N-r-1) r constrained, (N-r) r
/// if step 1 could also be swapped.
std::uint64_t bit_flip_count(int n, int r, bool first_step_fixed = true);

/// Every strategy reached by swapping one compute step (other than step 1)
/// with one reuse step, ordered lexicographically by (compute position,
/// reuse position).
std::vector<StrategyVector> bit_flip_set(const StrategyVector& strategy);

/// Utility U(pi) in dB with memoisation. Misses in a batch are computed in
/// parallel; results are keyed by strategy so order never matters.
class StrategyUtility {
 public:
  virtual ~StrategyUtility() = default;

  double operator()(const StrategyVector& s);
  std::vector<double> evaluate(std::span<const StrategyVector> batch);

  /// Distinct strategies actually computed (memo misses).
  std::size_t evaluations() const noexcept { return memo_.size(); }
  void clear_memo() { memo_.clear(); }

 protected:
  /// Must be safe to call concurrently.
  virtual double compute(const StrategyVector& s) const = 0;

 private:
  std::map<StrategyVector, double> memo_;
};

/// Wraps a plain function (synthetic utilities in tests and demos).
class FunctionUtility final : public StrategyUtility {
 public:
  explicit FunctionUtility(std::function<double(const StrategyVector&)> fn) : fn_(std::move(fn)) {}

 protected:
  double compute(const StrategyVector& s) const override { return fn_(s); }

 private:
  std::function<double(const StrategyVector&)> fn_;
};

/// Mean PSNR, over prompt/seed pairs, between the strategy's sample and the
/// reference sample. References are computed once at construction.
class PsnrUtility final : public StrategyUtility {
 public:
  PsnrUtility(const ModelWeights& weights, const NoiseSchedule& schedule, const SamplerConfig& config,
              std::vector<PromptSeed> prompts, ReuseConfig reuse = {});

  const std::vector<DenseArray>& references() const noexcept { return references_; }
  /// Per-prompt PSNR without touching the memo.
  std::vector<double> per_prompt(const StrategyVector& s) const;

 protected:
  double compute(const StrategyVector& s) const override;

 private:
  const ModelWeights& weights_;
  const NoiseSchedule& schedule_;
  SamplerConfig config_;
  std::vector<PromptSeed> prompts_;
  ReuseConfig reuse_;
  std::vector<DenseArray> references_;
};

/// Evaluate `strategies` with a fresh PsnrUtility-equivalent computation;
/// used as an independent recompute oracle for memoisation.
double evaluate_utility(const StrategyVector& strategy, const ModelWeights& weights, const NoiseSchedule& schedule,
                        const SamplerConfig& config, std::span<const PromptSeed> prompts, ReuseConfig reuse = {});

struct SearchConfig {
  int n = 20;
  int r = 10;
  double epsilon = 0.05;  // dB
  int max_rounds = 100;
};

struct SearchLogEntry {
  StrategyVector strategy;
  double utility_db = 0.0;
  int round = 0;  // 0 = the initial HURRY evaluation
  bool accepted = false;
};

struct SearchReport {
  StrategyVector start;
  double start_utility = 0.0;
  StrategyVector best;
  double best_utility = 0.0;
  std::vector<double> optima;  // Optima(0..rounds)
  std::vector<SearchLogEntry> log;
  int rounds = 0;
  std::size_t evaluations = 0;
};

/// Greedy bit-flip search from HURRY. Each round scans the bit-flip set of
/// the strategy held at the start of the round; any neighbour beating the
/// running optimum by more than epsilon becomes the best strategy and the
/// new optimum. Stops after a round without change. Exceeding max_rounds
/// throws ErrorKind::search_safeguard.
SearchReport phast_search(const SearchConfig& config, StrategyUtility& utility);

struct RankedStrategy {
  StrategyVector strategy;
  double utility_db = 0.0;
};

/// All C(N-1, r) valid strategies, sorted by utility (descending) with ties
/// broken by bitstring (ascending). Throws ErrorKind::budget_exceeded when
/// the space is larger than `budget`.
std::vector<RankedStrategy> exhaustive_search(int n, int r, StrategyUtility& utility, std::uint64_t budget = 100000);

/// Uniformly random valid strategy with r reuse steps.
StrategyVector random_strategy(int n, int r, std::uint64_t seed);

}  // namespace rlab
