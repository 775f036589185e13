#include "rlab/search.hpp"

#include <algorithm>
#include <numeric>

#include "rlab/error.hpp"
#include "rlab/metrics.hpp"
#include "rlab/rng.hpp"

namespace rlab {

std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (int i = 1; i <= k; ++i) result = result * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return result;
}

std::uint64_t strategy_space_size(int n, int r, bool first_step_fixed) {
  return first_step_fixed ? binomial(n - 1, r) : binomial(n, r);
}

std::uint64_t bit_flip_count(int n, int r, bool first_step_fixed) {
  const int movable_ones = first_step_fixed ? n - r - 1 : n - r;
  return static_cast<std::uint64_t>(std::max(movable_ones, 0)) * static_cast<std::uint64_t>(r);
}

std::vector<StrategyVector> bit_flip_set(const StrategyVector& strategy) {
  const auto& bits = strategy.bits();
  std::vector<StrategyVector> out;
  for (std::size_t one = 1; one < bits.size(); ++one) {
    if (bits[one] != 1) continue;
    for (std::size_t zero = 1; zero < bits.size(); ++zero) {
      if (bits[zero] != 0) continue;
      auto flipped = bits;
      flipped[one] = 0;
      flipped[zero] = 1;
      out.emplace_back(std::move(flipped));
    }
  }
  return out;
}

double StrategyUtility::operator()(const StrategyVector& s) { return evaluate(std::span(&s, 1)).front(); }

std::vector<double> StrategyUtility::evaluate(std::span<const StrategyVector> batch) {
  std::vector<StrategyVector> misses;
  for (const auto& s : batch) {
    if (!memo_.contains(s) && std::find(misses.begin(), misses.end(), s) == misses.end()) misses.push_back(s);
  }
  std::vector<double> computed(misses.size());
  const int m = static_cast<int>(misses.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < m; ++i) computed[static_cast<std::size_t>(i)] = compute(misses[static_cast<std::size_t>(i)]);
  for (std::size_t i = 0; i < misses.size(); ++i) memo_.emplace(misses[i], computed[i]);

  std::vector<double> out;
  out.reserve(batch.size());
  for (const auto& s : batch) out.push_back(memo_.at(s));
  return out;
}

namespace {

SampleOptions quiet_options(const ReuseConfig& reuse) {
  SampleOptions o;
  o.reuse = reuse;
  o.record_observations = false;
  o.record_trajectory = false;
  return o;
}

SamplerConfig seeded(SamplerConfig c, std::uint64_t seed) {
  c.seed = seed;
  return c;
}

}  // namespace

PsnrUtility::PsnrUtility(const ModelWeights& weights, const NoiseSchedule& schedule, const SamplerConfig& config,
                         std::vector<PromptSeed> prompts, ReuseConfig reuse)
    : weights_(weights), schedule_(schedule), config_(config), prompts_(std::move(prompts)), reuse_(reuse) {
  if (prompts_.empty()) fail(ErrorKind::config, "utility needs at least one prompt");
  references_.resize(prompts_.size());
  const int np = static_cast<int>(prompts_.size());
#pragma omp parallel for schedule(dynamic)
  for (int p = 0; p < np; ++p) {
    const auto& ps = prompts_[static_cast<std::size_t>(p)];
    references_[static_cast<std::size_t>(p)] =
        sample_reference(weights_, schedule_, seeded(config_, ps.seed), ps.prompt, quiet_options(reuse_)).image;
  }
}

std::vector<double> PsnrUtility::per_prompt(const StrategyVector& s) const {
  std::vector<double> out;
  for (std::size_t p = 0; p < prompts_.size(); ++p) {
    const auto& ps = prompts_[p];
    const SampleResult run = sample(weights_, schedule_, seeded(config_, ps.seed), ps.prompt, &s, quiet_options(reuse_));
    out.push_back(psnr(run.image, references_[p]));
  }
  return out;
}

double PsnrUtility::compute(const StrategyVector& s) const {
  const auto values = per_prompt(s);
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double evaluate_utility(const StrategyVector& strategy, const ModelWeights& weights, const NoiseSchedule& schedule,
                        const SamplerConfig& config, std::span<const PromptSeed> prompts, ReuseConfig reuse) {
  if (prompts.empty()) fail(ErrorKind::config, "utility needs at least one prompt");
  double total = 0.0;
  for (const auto& ps : prompts) {
    const SamplerConfig c = seeded(config, ps.seed);
    const DenseArray ref = sample_reference(weights, schedule, c, ps.prompt, quiet_options(reuse)).image;
    const DenseArray img = sample(weights, schedule, c, ps.prompt, &strategy, quiet_options(reuse)).image;
    total += psnr(img, ref);
  }
  return total / static_cast<double>(prompts.size());
}

SearchReport phast_search(const SearchConfig& config, StrategyUtility& utility) {
  if (config.epsilon < 0.0) fail(ErrorKind::config, "epsilon must be >= 0");
  if (config.max_rounds < 1) fail(ErrorKind::config, "max_rounds must be >= 1");
  SearchReport report;
  report.start = hurry(config.n, config.r);
  report.start_utility = utility(report.start);
  report.best = report.start;
  report.optima.push_back(report.start_utility);
  report.log.push_back({report.start, report.start_utility, 0, true});

  bool changed = true;
  while (changed) {
    if (report.rounds == config.max_rounds) {
      fail(ErrorKind::search_safeguard, "search did not settle within " + std::to_string(config.max_rounds) +
                                            " rounds (best so far " + report.best.str() + ")");
    }
    ++report.rounds;
    double optimum = report.optima.back();
    changed = false;
    const std::vector<StrategyVector> neighbours = bit_flip_set(report.best);
    const std::vector<double> values = utility.evaluate(neighbours);
    for (std::size_t i = 0; i < neighbours.size(); ++i) {
      const bool accept = values[i] > optimum + config.epsilon;
      if (accept) {
        report.best = neighbours[i];
        optimum = values[i];
        changed = true;
      }
      report.log.push_back({neighbours[i], values[i], report.rounds, accept});
    }
    report.optima.push_back(optimum);
  }
  report.best_utility = report.optima.back();
  report.evaluations = utility.evaluations();
  return report;
}

std::vector<RankedStrategy> exhaustive_search(int n, int r, StrategyUtility& utility, std::uint64_t budget) {
  if (n < 1 || r < 0 || r >= n) fail(ErrorKind::invalid_strategy, "exhaustive search needs 0 <= r <= N-1");
  const std::uint64_t count = strategy_space_size(n, r);
  if (count > budget) {
    fail(ErrorKind::budget_exceeded, "exhaustive space C(" + std::to_string(n - 1) + "," + std::to_string(r) +
                                         ") = " + std::to_string(count) + " exceeds budget " +
                                         std::to_string(budget));
  }
  // Enumerate reuse positions among steps 2..N in lexicographic order.
  std::vector<StrategyVector> all;
  all.reserve(count);
  std::vector<int> pos(static_cast<std::size_t>(r));
  std::iota(pos.begin(), pos.end(), 1);
  while (true) {
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(n), 1);
    for (int p : pos) bits[static_cast<std::size_t>(p)] = 0;
    all.emplace_back(std::move(bits));
    int i = r - 1;
    while (i >= 0 && pos[static_cast<std::size_t>(i)] == n - r + i) --i;
    if (i < 0) break;
    ++pos[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < r; ++j) pos[static_cast<std::size_t>(j)] = pos[static_cast<std::size_t>(j - 1)] + 1;
  }
  const std::vector<double> values = utility.evaluate(all);
  std::vector<RankedStrategy> ranked;
  ranked.reserve(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) ranked.push_back({std::move(all[i]), values[i]});
  std::sort(ranked.begin(), ranked.end(), [](const RankedStrategy& a, const RankedStrategy& b) {
    if (a.utility_db != b.utility_db) return a.utility_db > b.utility_db;
    return a.strategy.str() < b.strategy.str();
  });
  return ranked;
}

StrategyVector random_strategy(int n, int r, std::uint64_t seed) {
  if (n < 1 || r < 0 || r >= n) fail(ErrorKind::invalid_strategy, "random strategy needs 0 <= r <= N-1");
  std::vector<int> steps(static_cast<std::size_t>(n - 1));
  std::iota(steps.begin(), steps.end(), 1);
  SeededRng rng(seed);
  // Partial Fisher-Yates: the first r entries become the reuse positions.
  for (int i = 0; i < r; ++i) {
    const auto j = static_cast<std::size_t>(i) + rng.below(static_cast<std::uint64_t>(n - 1 - i));
    std::swap(steps[static_cast<std::size_t>(i)], steps[j]);
  }
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n), 1);
  for (int i = 0; i < r; ++i) bits[static_cast<std::size_t>(steps[static_cast<std::size_t>(i)])] = 0;
  return StrategyVector(std::move(bits));
}

}  // namespace rlab
