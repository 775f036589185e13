#include "rlab/commands.hpp"

#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "rlab/checkpoint.hpp"
#include "rlab/error.hpp"
#include "rlab/image_io.hpp"
#include "rlab/search.hpp"

namespace rlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void note(const CommandContext& ctx, const std::string& line) {
  if (ctx.log) *ctx.log << line << '\n' << std::flush;
}

fs::path prepare(const CommandContext& ctx) {
  std::error_code ec;
  fs::create_directories(ctx.out_dir, ec);
  if (ec) fail(ErrorKind::io, "cannot create output directory " + ctx.out_dir.string() + ": " + ec.message());
  std::ofstream out(ctx.out_dir / "resolved_config.txt");
  if (!out) fail(ErrorKind::io, "cannot write to " + ctx.out_dir.string());
  out << ctx.config.dump();
  return ctx.out_dir;
}

json config_json(const RunConfig& cfg) {
  json j = json::object();
  for (const auto& [k, v] : cfg.resolved()) j[k] = v;
  return j;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out << std::setprecision(10);
  return out;
}

struct Loaded {
  ModelWeights weights;
  NoiseSchedule schedule;
};

Loaded load_model(const RunConfig& cfg) {
  ModelWeights w = load_checkpoint(cfg.checkpoint());
  NoiseSchedule s = make_schedule(w.dims.timesteps);
  return {std::move(w), std::move(s)};
}

SampleOptions options_for(const RunConfig& cfg) {
  SampleOptions o;
  o.reuse = cfg.reuse_config();
  o.cost = cfg.cost_model();
  o.record_observations = false;
  o.record_trajectory = false;
  return o;
}

json cost_json(const CostTally& c) {
  return {{"full_steps", c.full_steps},
          {"reuse_steps", c.reuse_steps},
          {"estimated_ms", c.estimated_ms},
          {"cache_bytes", c.cache_bytes}};
}

std::string sample_name(const PromptSeed& ps) { return ps.prompt.name() + "_seed" + std::to_string(ps.seed); }

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::invalid_strategy:
      return 2;
    case ErrorKind::missing_artifact:
      return 3;
    case ErrorKind::budget_exceeded:
    case ErrorKind::search_safeguard:
      return 4;
    case ErrorKind::numeric:
    case ErrorKind::training_divergence:
      return 5;
    default:
      return 1;
  }
}

int matched_reduced_steps(double budget_ms, const CostModel& model) {
  int n = 1;
  while (full_latency(n + 1, model) <= budget_ms) ++n;
  return n;
}

json cmd_train(const CommandContext& ctx) {
  const fs::path out = prepare(ctx);
  const TrainConfig tc = ctx.config.train_config();
  const int every = std::max(1, tc.steps / 20);
  const TrainResult result = train_toy(tc, [&](int step, double loss) {
    if (step % every == 0 || step == tc.steps) {
      std::ostringstream line;
      line << "step " << step << "/" << tc.steps << " loss " << loss;
      note(ctx, line.str());
    }
  });
  const fs::path ckpt = ctx.config.checkpoint();
  if (ckpt.has_parent_path()) fs::create_directories(ckpt.parent_path());
  save_checkpoint(ckpt, result.weights);

  json report = {{"checkpoint", ckpt.string()},
                 {"parameters", result.weights.parameter_count()},
                 {"architecture_hash", result.weights.dims.architecture_hash()},
                 {"initial_validation_loss", result.report.initial_validation_loss},
                 {"final_validation_loss", result.report.final_validation_loss},
                 {"config", config_json(ctx.config)}};
  write_json(out / "train_report.json", report);
  auto csv = open_csv(out / "train_loss.csv");
  csv << "step,loss\n";
  for (std::size_t i = 0; i < result.report.step_losses.size(); ++i) csv << i + 1 << ',' << result.report.step_losses[i] << '\n';
  note(ctx, "wrote " + ckpt.string());
  return report;
}

json cmd_sample(const CommandContext& ctx) {
  const fs::path out = prepare(ctx);
  const auto model = load_model(ctx.config);
  const SamplerConfig base = ctx.config.sampler();
  const auto strategy = ctx.config.strategy();
  const SampleOptions opts = options_for(ctx.config);

  json images = json::array();
  for (const auto& ps : ctx.config.prompt_seeds()) {
    SamplerConfig c = base;
    c.seed = ps.seed;
    const SampleResult r = sample(model.weights, model.schedule, c, ps.prompt, strategy ? &*strategy : nullptr, opts);
    const std::string file = sample_name(ps) + ".ppm";
    write_ppm(out / file, r.image);
    images.push_back({{"prompt", ps.prompt.name()}, {"seed", ps.seed}, {"file", file}, {"cost", cost_json(r.cost)}});
  }
  const StrategyVector effective = strategy ? *strategy : StrategyVector::all_ones(base.steps);
  json report = {{"strategy", effective.str()},
                 {"estimated_ms", latency_estimate(effective, ctx.config.cost_model())},
                 {"cache_bytes", strategy && strategy->reuse_count() > 0 ? cache_memory_bytes(opts.reuse, model.weights.dims) : 0},
                 {"images", images},
                 {"config", config_json(ctx.config)}};
  write_json(out / "cost.json", report);
  return report;
}

json cmd_similarity(const CommandContext& ctx) {
  const fs::path out = prepare(ctx);
  const auto model = load_model(ctx.config);
  const auto prompts = ctx.config.prompt_seeds();
  const SimilarityCurve curve = similarity_curve(model.weights, model.schedule, ctx.config.sampler(), prompts);

  auto csv = open_csv(out / "similarity.csv");
  csv << "step,site_kind,mean,std\n";
  auto emit = [&](const char* kind, const std::vector<SimilarityPoint>& pts) {
    json arr = json::array();
    for (const auto& p : pts) {
      csv << p.step << ',' << kind << ',' << p.mean << ',' << p.std << '\n';
      arr.push_back(p.mean);
    }
    return arr;
  };
  json report = {{"self_attention_mean", emit("self", curve.self_attn)},
                 {"cross_attention_mean", emit("cross", curve.cross_attn)},
                 {"prompts", prompts.size()},
                 {"config", config_json(ctx.config)}};
  write_json(out / "similarity_summary.json", report);
  return report;
}

json cmd_perturb(const CommandContext& ctx) {
  const fs::path out = prepare(ctx);
  const auto model = load_model(ctx.config);
  const auto prompts = ctx.config.prompt_seeds();
  std::optional<std::pair<int, int>> window;
  const auto lo = ctx.config.get_int("fit_lo"), hi = ctx.config.get_int("fit_hi");
  if (lo != 0 || hi != 0) window = std::pair{static_cast<int>(lo), static_cast<int>(hi)};
  const PerturbationReport rep =
      perturbation_sweep(model.weights, model.schedule, ctx.config.sampler(), prompts,
                         static_cast<float>(ctx.config.get_double("eta")), window,
                         static_cast<std::uint64_t>(ctx.config.get_int("noise_seed")));

  auto csv = open_csv(out / "perturbation.csv");
  csv << "step,mean_dev,std_dev,fitted\n";
  for (std::size_t i = 0; i < rep.steps.size(); ++i) {
    csv << rep.steps[i] << ',' << rep.mean_dev[i] << ',' << rep.std_dev[i] << ',';
    if (rep.fit) csv << (*rep.fit)(rep.steps[i]);
    csv << '\n';
  }
  json report = {{"eta", rep.eta},
                 {"fit_lo", rep.fit_lo},
                 {"fit_hi", rep.fit_hi},
                 {"conjecture_supported", rep.conjecture_supported()},
                 {"config", config_json(ctx.config)}};
  if (rep.fit) {
    report["k1"] = rep.fit->k1;
    report["k2"] = rep.fit->k2;
    report["pearson_r"] = rep.fit->pearson_r;
  } else {
    report["fit_error"] = rep.fit_error;
  }
  write_json(out / "perturbation_fit.json", report);
  return report;
}

json cmd_search(const CommandContext& ctx) {
  const fs::path out = prepare(ctx);
  const auto model = load_model(ctx.config);
  SearchConfig sc;
  sc.n = ctx.config.steps();
  sc.r = ctx.config.reuse();
  sc.epsilon = ctx.config.get_double("epsilon");
  sc.max_rounds = static_cast<int>(ctx.config.get_int("max_rounds"));
  PsnrUtility utility(model.weights, model.schedule, ctx.config.sampler(), ctx.config.prompt_seeds(),
                      ctx.config.reuse_config());
  const SearchReport rep = phast_search(sc, utility);

  std::ofstream log(out / "search_log.jsonl");
  if (!log) fail(ErrorKind::io, "cannot write search log");
  for (const auto& e : rep.log) {
    log << json{{"round", e.round}, {"strategy", e.strategy.str()}, {"utility_db", e.utility_db}, {"accepted", e.accepted}}.dump()
        << '\n';
  }
  const CostModel cost = ctx.config.cost_model();
  json report = {{"start", rep.start.str()},
                 {"start_utility_db", rep.start_utility},
                 {"best", rep.best.str()},
                 {"best_bracketed", rep.best.bracketed()},
                 {"best_utility_db", rep.best_utility},
                 {"optima_db", rep.optima},
                 {"rounds", rep.rounds},
                 {"evaluations", rep.evaluations},
                 {"estimated_ms", latency_estimate(rep.best, cost)},
                 {"config", config_json(ctx.config)}};
  write_json(out / "search_report.json", report);
  note(ctx, "best " + rep.best.str());
  return report;
}

json cmd_exhaustive(const CommandContext& ctx) {
  const fs::path out = prepare(ctx);
  const int n = ctx.config.steps(), r = ctx.config.reuse();
  const auto budget = static_cast<std::uint64_t>(ctx.config.get_int("budget"));
  // Check the budget before paying for the reference samples.
  if (strategy_space_size(n, r) > budget) {
    fail(ErrorKind::budget_exceeded, "strategy space " + std::to_string(strategy_space_size(n, r)) +
                                         " exceeds budget " + std::to_string(budget));
  }
  const auto model = load_model(ctx.config);
  PsnrUtility utility(model.weights, model.schedule, ctx.config.sampler(), ctx.config.prompt_seeds(),
                      ctx.config.reuse_config());
  const auto ranked = exhaustive_search(n, r, utility, budget);
  auto csv = open_csv(out / "exhaustive.csv");
  csv << "rank,strategy,utility_db\n";
  for (std::size_t i = 0; i < ranked.size(); ++i) csv << i + 1 << ',' << ranked[i].strategy.str() << ',' << ranked[i].utility_db << '\n';
  json report = {{"count", ranked.size()},
                 {"best", ranked.front().strategy.str()},
                 {"best_utility_db", ranked.front().utility_db},
                 {"median_utility_db", ranked[ranked.size() / 2].utility_db},
                 {"config", config_json(ctx.config)}};
  write_json(out / "exhaustive_summary.json", report);
  return report;
}

json cmd_compare(const CommandContext& ctx) {
  const fs::path out = prepare(ctx);
  const auto model = load_model(ctx.config);
  const SamplerConfig base = ctx.config.sampler();
  const int n = base.steps, r = ctx.config.reuse();
  const CostModel cost = ctx.config.cost_model();
  const auto prompts = ctx.config.prompt_seeds();
  const ReuseConfig reuse = ctx.config.reuse_config();

  PsnrUtility utility(model.weights, model.schedule, base, prompts, reuse);
  const StrategyVector hurry_s = hurry(n, r);
  SearchConfig sc{n, r, ctx.config.get_double("epsilon"), static_cast<int>(ctx.config.get_int("max_rounds"))};
  const SearchReport phast = phast_search(sc, utility);

  const double reuse_ms = latency_estimate(hurry_s, cost);
  int reduced = static_cast<int>(ctx.config.get_int("reduced_steps"));
  if (reduced <= 0) reduced = matched_reduced_steps(reuse_ms, cost);
  if (reduced > n) fail(ErrorKind::config, "reduced_steps must not exceed steps");

  // Reduced-step sampler against the N-step reference, same initial noise.
  std::vector<double> reduced_psnr;
  SampleOptions opts = options_for(ctx.config);
  for (std::size_t p = 0; p < prompts.size(); ++p) {
    SamplerConfig c = base;
    c.seed = prompts[p].seed;
    c.steps = reduced;
    reduced_psnr.push_back(psnr(sample_reference(model.weights, model.schedule, c, prompts[p].prompt, opts).image,
                                utility.references()[p]));
  }

  auto row = [&](const std::string& name, int steps, const std::string& strat, double ms, double db) {
    return json{{"method", name}, {"steps", steps}, {"strategy", strat}, {"estimated_ms", ms}, {"psnr_db", db}};
  };
  json rows = json::array();
  rows.push_back(row("reference", n, StrategyVector::all_ones(n).str(), full_latency(n, cost), kPsnrCapDb));
  rows.push_back(row("hurry", n, hurry_s.str(), reuse_ms, utility(hurry_s)));
  rows.push_back(row("phast", n, phast.best.str(), latency_estimate(phast.best, cost), phast.best_utility));
  rows.push_back(row("reduced_steps", reduced, StrategyVector::all_ones(reduced).str(), full_latency(reduced, cost),
                     mean_of(reduced_psnr)));

  auto csv = open_csv(out / "compare.csv");
  csv << "method,steps,strategy,estimated_ms,psnr_db\n";
  for (const auto& j : rows) {
    csv << j["method"].get<std::string>() << ',' << j["steps"].get<int>() << ',' << j["strategy"].get<std::string>()
        << ',' << j["estimated_ms"].get<double>() << ',' << j["psnr_db"].get<double>() << '\n';
  }
  json report = {{"rows", rows},
                 {"cache_bytes", cache_memory_bytes(reuse, model.weights.dims)},
                 {"config", config_json(ctx.config)}};
  write_json(out / "compare.json", report);
  return report;
}

}  // namespace rlab
