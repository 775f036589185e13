#include "rlab/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "rlab/error.hpp"

namespace rlab {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

const std::map<std::string, std::string>& RunConfig::defaults() {
  static const std::map<std::string, std::string> table = {
      {"checkpoint", "artifacts/toy.ckpt"},
      {"seed", "0"},
      {"seeds", "0,1,2"},
      {"prompts", "all"},
      {"steps", "20"},
      {"reuse", "10"},
      {"solver", "ddim"},
      {"guidance_scale", "3.0"},
      {"strategy", ""},
      {"eta", "0.1"},
      {"noise_seed", "0"},
      {"fit_lo", "0"},
      {"fit_hi", "0"},
      {"epsilon", "0.05"},
      {"max_rounds", "100"},
      {"budget", "100000"},
      {"precision", "f32"},
      {"target", "attention_maps"},
      {"full_call_ms", "152"},
      {"reuse_call_ms", "47"},
      {"passes_per_step", "2"},
      {"reduced_steps", "0"},
      {"random_seed", "0"},
      {"train_steps", "5000"},
      {"batch_size", "32"},
      {"learning_rate", "0.002"},
      {"dataset_size", "2048"},
      {"validation_size", "288"},
      {"null_prob", "0.1"},
  };
  return table;
}

RunConfig RunConfig::parse(std::string_view text) {
  RunConfig cfg;
  std::stringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::config, "line " + std::to_string(line_no) + ": expected key=value");
    }
    cfg.set(trim(std::string_view(stripped).substr(0, eq)), trim(std::string_view(stripped).substr(eq + 1)));
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::missing_artifact, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!defaults().contains(key)) fail(ErrorKind::config, "unknown config key '" + key + "'");
  values_[key] = value;
}

std::string RunConfig::get(const std::string& key) const {
  if (auto it = values_.find(key); it != values_.end()) return it->second;
  if (auto it = defaults().find(key); it != defaults().end()) return it->second;
  fail(ErrorKind::config, "unknown config key '" + key + "'");
}

std::int64_t RunConfig::get_int(const std::string& key) const {
  const std::string v = get(key);
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    fail(ErrorKind::config, "key '" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

double RunConfig::get_double(const std::string& key) const {
  const std::string v = get(key);
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used == v.size()) return out;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::config, "key '" + key + "' expects a number, got '" + v + "'");
}

std::map<std::string, std::string> RunConfig::resolved() const {
  auto out = defaults();
  for (const auto& [k, v] : values_) out[k] = v;
  return out;
}

std::string RunConfig::dump() const {
  std::string out;
  for (const auto& [k, v] : resolved()) out += k + "=" + v + "\n";
  return out;
}

std::vector<std::uint64_t> RunConfig::seeds() const {
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(get("seeds"))) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || ptr != item.data() + item.size()) fail(ErrorKind::config, "bad seed '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) fail(ErrorKind::config, "seeds list is empty");
  return out;
}

std::vector<PromptSpec> RunConfig::prompts() const {
  const std::string raw = get("prompts");
  if (trim(raw) == "all") {
    const auto all = PromptSpec::all();
    return {all.begin(), all.end()};
  }
  std::vector<PromptSpec> out;
  for (const auto& item : split_list(raw)) {
    try {
      out.push_back(PromptSpec::parse(item));
    } catch (const Error& e) {
      fail(ErrorKind::config, e.what());
    }
  }
  if (out.empty()) fail(ErrorKind::config, "prompt list is empty");
  return out;
}

int RunConfig::steps() const {
  const auto n = get_int("steps");
  if (n < 1 || n > 1000) fail(ErrorKind::config, "steps must be in [1, 1000]");
  return static_cast<int>(n);
}

int RunConfig::reuse() const {
  const auto r = get_int("reuse");
  if (r < 0 || r >= steps()) fail(ErrorKind::invalid_strategy, "reuse must be in [0, steps - 1]");
  return static_cast<int>(r);
}

std::optional<StrategyVector> RunConfig::strategy() const {
  const std::string raw = trim(get("strategy"));
  if (raw.empty()) return std::nullopt;
  StrategyVector s = StrategyVector::parse(raw);
  if (s.size() != steps()) {
    fail(ErrorKind::invalid_strategy, "strategy has " + std::to_string(s.size()) + " entries but steps = " +
                                          std::to_string(steps()));
  }
  return s;
}

SamplerConfig RunConfig::sampler() const {
  SamplerConfig c;
  try {
    c.solver = parse_solver(get("solver"));
  } catch (const Error& e) {
    fail(ErrorKind::config, e.what());
  }
  c.steps = steps();
  c.guidance_scale = static_cast<float>(get_double("guidance_scale"));
  c.seed = seed();
  return c;
}

ReuseConfig RunConfig::reuse_config() const {
  try {
    return {parse_target(get("target")), parse_precision(get("precision"))};
  } catch (const Error& e) {
    fail(ErrorKind::config, e.what());
  }
}

CostModel RunConfig::cost_model() const {
  CostModel m;
  m.full_call_ms = get_double("full_call_ms");
  m.reuse_call_ms = get_double("reuse_call_ms");
  m.passes_per_step = static_cast<int>(get_int("passes_per_step"));
  m.validate();
  return m;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.steps = static_cast<int>(get_int("train_steps"));
  t.batch_size = static_cast<int>(get_int("batch_size"));
  t.learning_rate = static_cast<float>(get_double("learning_rate"));
  t.dataset_size = static_cast<int>(get_int("dataset_size"));
  t.validation_size = static_cast<int>(get_int("validation_size"));
  t.null_prompt_prob = static_cast<float>(get_double("null_prob"));
  t.seed = seed();
  if (t.steps < 1 || t.batch_size < 1 || t.dataset_size < 1 || t.validation_size < 1 || !(t.learning_rate > 0.0f) ||
      t.null_prompt_prob < 0.0f || t.null_prompt_prob > 1.0f) {
    fail(ErrorKind::config, "invalid training configuration");
  }
  return t;
}

}  // namespace rlab
