#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rlab/commands.hpp"
#include "rlab/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Attention-map reuse lab: toy diffusion model, reuse strategies and search"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::vector<std::string> overrides;
  bool quiet = false;
  app.add_option("--config", config_path, "key=value config file");
  app.add_option("--seed", seed, "base seed (overrides config 'seed')");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--set", overrides, "extra key=value overrides, applied last");
  app.add_flag("-q,--quiet", quiet, "no progress output");

  using Command = nlohmann::json (*)(const rlab::CommandContext&);
  const std::vector<std::tuple<std::string, std::string, Command>> commands = {
      {"train", "train the toy denoiser and write a checkpoint", rlab::cmd_train},
      {"sample", "sample images (optionally with a reuse strategy)", rlab::cmd_sample},
      {"similarity", "adjacent-step attention similarity curves", rlab::cmd_similarity},
      {"perturb", "attention perturbation sweep and exponential fit", rlab::cmd_perturb},
      {"search", "greedy bit-flip strategy search from HURRY", rlab::cmd_search},
      {"exhaustive", "rank every strategy with r reuse steps", rlab::cmd_exhaustive},
      {"compare", "reference vs HURRY vs searched vs reduced-step sampler", rlab::cmd_compare},
  };
  std::map<CLI::App*, Command> handlers;
  for (const auto& [name, help, fn] : commands) handlers[app.add_subcommand(name, help)] = fn;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    rlab::CommandContext ctx;
    if (!config_path.empty()) ctx.config = rlab::RunConfig::load(config_path);
    if (seed) ctx.config.set("seed", std::to_string(*seed));
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) rlab::fail(rlab::ErrorKind::config, "--set expects key=value, got '" + kv + "'");
      ctx.config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    ctx.out_dir = out_dir;
    if (!quiet) ctx.log = &std::cerr;
    for (auto* sub : app.get_subcommands()) {
      const auto report = handlers.at(sub)(ctx);
      if (!quiet) std::cout << report.dump(2) << '\n';
    }
    return 0;
  } catch (const rlab::Error& e) {
    std::cerr << "error (" << rlab::to_string(e.kind()) << "): " << e.what() << '\n';
    return rlab::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
