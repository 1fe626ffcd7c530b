#include "autohedge/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "autohedge/error.hpp"

extern char** environ;

namespace autohedge {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double to_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + text + "'");
  }
  return v;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& text) {
  Int v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + text + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + text + "'");
}

std::optional<double> to_auto_double(const std::string& key, const std::string& text) {
  if (text == "auto") return std::nullopt;
  return to_double(key, text);
}

std::string fmt_auto(const std::optional<double>& v) { return v ? fmt(*v) : "auto"; }

std::vector<int> to_int_list(const std::string& key, const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_int<int>(key, trim(item)));
  if (out.empty()) throw ConfigError("config key '" + key + "': expected a comma-separated list");
  return out;
}

std::string fmt_int_list(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

using Getter = std::function<std::string(const ExperimentConfig&)>;
using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

struct Field {
  std::string key;
  Getter get;
  Setter set;
};

#define AH_DOUBLE(KEY, MEMBER)                                                             \
  Field {                                                                                  \
    KEY, [](const ExperimentConfig& c) { return fmt(c.MEMBER); },                          \
        [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.MEMBER = to_double(k, v); } \
  }
#define AH_INT(KEY, MEMBER)                                                                \
  Field {                                                                                  \
    KEY, [](const ExperimentConfig& c) { return std::to_string(c.MEMBER); },               \
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {              \
          c.MEMBER = to_int<decltype(c.MEMBER)>(k, v);                                     \
        }                                                                                  \
  }
#define AH_BOOL(KEY, MEMBER)                                                               \
  Field {                                                                                  \
    KEY, [](const ExperimentConfig& c) { return std::string(c.MEMBER ? "true" : "false"); }, \
        [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.MEMBER = to_bool(k, v); } \
  }
#define AH_AUTO(KEY, MEMBER)                                                               \
  Field {                                                                                  \
    KEY, [](const ExperimentConfig& c) { return fmt_auto(c.MEMBER); },                     \
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {              \
          c.MEMBER = to_auto_double(k, v);                                                 \
        }                                                                                  \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"mode", [](const ExperimentConfig& c) { return to_string(c.mode); },
            [](ExperimentConfig& c, const std::string&, const std::string& v) {
              c.mode = experiment_mode_from_string(v);
            }},
      Field{"baseline_env", [](const ExperimentConfig& c) { return to_string(c.baseline_env); },
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
              if (v == "single") c.baseline_env = BaselineEnv::kSingle;
              else if (v == "skew") c.baseline_env = BaselineEnv::kSkew;
              else if (v == "price_of_risk") c.baseline_env = BaselineEnv::kPriceOfRisk;
              else if (v == "portfolio") c.baseline_env = BaselineEnv::kPortfolio;
              else throw ConfigError("config key '" + k + "': unknown environment '" + v + "'");
            }},
      AH_INT("seed", seed),
      AH_INT("epochs", sac.epochs),
      AH_INT("eval_episodes", eval_episodes),
      Field{"output_dir", [](const ExperimentConfig& c) { return c.output_dir; },
            [](ExperimentConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},

      AH_DOUBLE("market.s0", env.market.s0),
      AH_DOUBLE("market.mu", env.market.mu),
      AH_DOUBLE("market.sigma", env.market.sigma),
      AH_INT("market.n_steps", env.market.n_steps),
      AH_INT("market.window", env.market.window),
      AH_DOUBLE("market.nu_client", env.market.nu_client),
      AH_DOUBLE("market.nu_hedge", env.market.nu_hedge),
      AH_DOUBLE("market.gamma_spread", env.market.gamma_spread),
      AH_DOUBLE("market.spread_clamp_lo", env.market.spread_clamp_lo),
      AH_DOUBLE("market.spread_clamp_hi", env.market.spread_clamp_hi),

      AH_DOUBLE("flow.c_scale", env.flow.c_scale),
      AH_DOUBLE("flow.alpha", env.flow.alpha_flow),
      AH_DOUBLE("flow.beta", env.flow.beta_flow),
      AH_DOUBLE("flow.rho", env.flow.rho_flow),
      AH_DOUBLE("flow.beta_skew", env.flow.beta_skew),
      AH_INT("flow.smoothing_window", env.flow.intensity_smoothing_window),

      AH_DOUBLE("env.max_hedge_size", env.max_hedge_size),
      AH_DOUBLE("env.max_pos_limit", env.max_pos_limit),
      AH_DOUBLE("env.gamma_penalty", env.gamma_penalty),
      AH_DOUBLE("env.termination_multiple", env.termination_multiple),
      AH_AUTO("env.terminal_extra_penalty", env.terminal_extra_penalty),
      AH_BOOL("env.literal_price_of_risk", env.literal_price_of_risk),
      AH_INT("env.maker_taker_window", env.maker_taker_window),

      AH_DOUBLE("portfolio.w", portfolio.w),
      AH_DOUBLE("portfolio.rho", portfolio.rho),
      AH_DOUBLE("portfolio.phi", portfolio.phi),
      AH_DOUBLE("portfolio.gamma_penalty", portfolio.gamma_penalty),
      AH_DOUBLE("portfolio.max_pos_limit", portfolio.max_pos_limit),
      AH_DOUBLE("portfolio.max_hedge_size", portfolio.max_hedge_size),
      AH_DOUBLE("portfolio.termination_multiple", portfolio.termination_multiple),
      AH_AUTO("portfolio.terminal_extra_penalty", portfolio.terminal_extra_penalty),
      AH_BOOL("portfolio.convex_parametrization", portfolio.convex_parametrization),

      AH_DOUBLE("sac.gamma", sac.gamma),
      AH_DOUBLE("sac.tau", sac.tau),
      AH_DOUBLE("sac.alpha", sac.alpha),
      AH_BOOL("sac.auto_alpha", sac.auto_alpha),
      AH_AUTO("sac.target_entropy", sac.target_entropy),
      AH_DOUBLE("sac.lr_policy", sac.lr_policy),
      AH_DOUBLE("sac.lr_q", sac.lr_q),
      AH_DOUBLE("sac.lr_alpha", sac.lr_alpha),
      AH_INT("sac.batch_size", sac.batch_size),
      AH_INT("sac.replay_capacity", sac.replay_capacity),
      AH_INT("sac.warmup_steps", sac.warmup_steps),
      AH_INT("sac.updates_per_step", sac.updates_per_step),
      AH_INT("sac.steps_per_epoch", sac.steps_per_epoch),
      Field{"sac.hidden", [](const ExperimentConfig& c) { return fmt_int_list(c.sac.hidden); },
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
              c.sac.hidden = to_int_list(k, v);
            }},
      AH_DOUBLE("sac.reward_scale", sac.reward_scale),
  };
  return table;
}

#undef AH_DOUBLE
#undef AH_INT
#undef AH_BOOL
#undef AH_AUTO

const Field* find_field(const std::string& key) {
  for (const auto& f : fields()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

bool is_asset_key(const std::string& suffix_key) {
  return (suffix_key.starts_with("market.") || suffix_key.starts_with("flow.")) &&
         find_field(suffix_key) != nullptr;
}

// market2.x -> market.x, flow2.x -> flow.x
std::optional<std::string> asset2_base_key(const std::string& key) {
  for (const char* prefix : {"market2.", "flow2."}) {
    const std::string p(prefix);
    if (key.starts_with(p)) {
      std::string base = p.substr(0, p.size() - 2) + "." + key.substr(p.size());
      if (is_asset_key(base)) return base;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace

std::string to_string(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::kSingle: return "single";
    case ExperimentMode::kSkew: return "skew";
    case ExperimentMode::kPriceOfRisk: return "price_of_risk";
    case ExperimentMode::kPortfolio: return "portfolio";
    case ExperimentMode::kDummy: return "dummy";
    case ExperimentMode::kRandom: return "random";
  }
  return "single";
}

ExperimentMode experiment_mode_from_string(const std::string& name) {
  for (auto m : {ExperimentMode::kSingle, ExperimentMode::kSkew, ExperimentMode::kPriceOfRisk,
                 ExperimentMode::kPortfolio, ExperimentMode::kDummy, ExperimentMode::kRandom}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown experiment mode '" + name + "'");
}

std::string to_string(BaselineEnv env) {
  switch (env) {
    case BaselineEnv::kSingle: return "single";
    case BaselineEnv::kSkew: return "skew";
    case BaselineEnv::kPriceOfRisk: return "price_of_risk";
    case BaselineEnv::kPortfolio: return "portfolio";
  }
  return "single";
}

bool ExperimentConfig::is_portfolio() const {
  if (mode == ExperimentMode::kPortfolio) return true;
  return (mode == ExperimentMode::kDummy || mode == ExperimentMode::kRandom) &&
         baseline_env == BaselineEnv::kPortfolio;
}

EnvConfig ExperimentConfig::env_config() const {
  EnvConfig e = env;
  auto from_baseline = [](BaselineEnv b) {
    switch (b) {
      case BaselineEnv::kSkew: return EnvMode::kSkew;
      case BaselineEnv::kPriceOfRisk: return EnvMode::kPriceOfRisk;
      default: return EnvMode::kSingle;
    }
  };
  switch (mode) {
    case ExperimentMode::kSkew: e.mode = EnvMode::kSkew; break;
    case ExperimentMode::kPriceOfRisk: e.mode = EnvMode::kPriceOfRisk; break;
    case ExperimentMode::kDummy:
    case ExperimentMode::kRandom: e.mode = from_baseline(baseline_env); break;
    default: e.mode = EnvMode::kSingle; break;
  }
  return e;
}

PortfolioConfig ExperimentConfig::portfolio_config() const {
  PortfolioConfig p;
  p.w = portfolio.w;
  p.rho = portfolio.rho;
  p.phi = portfolio.phi;
  p.gamma_penalty = portfolio.gamma_penalty;
  p.max_pos_limit = portfolio.max_pos_limit;
  p.max_hedge_size = portfolio.max_hedge_size;
  p.termination_multiple = portfolio.termination_multiple;
  p.terminal_extra_penalty = portfolio.terminal_extra_penalty;
  p.convex_parametrization = portfolio.convex_parametrization;
  p.market1 = env.market;
  p.flow1 = env.flow;
  ExperimentConfig second;
  second.env.market = env.market;
  second.env.flow = env.flow;
  for (const auto& [key, value] : asset2_overrides) {
    apply_setting(second, *asset2_base_key(key), value);
  }
  p.market2 = second.env.market;
  p.flow2 = second.env.flow;
  p.flow1.max_hedge_size = p.max_hedge_size;
  p.flow2.max_hedge_size = p.max_hedge_size;
  return p;
}

void ExperimentConfig::validate() const {
  if (eval_episodes < 0) throw ConfigError("eval_episodes must be >= 0");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
  sac.validate();
  if (is_portfolio()) {
    portfolio_config().validate();
  } else {
    env_config().validate();
  }
  if (mode == ExperimentMode::kDummy && baseline_env == BaselineEnv::kPortfolio) {
    throw ConfigError("the dummy hedger is defined for single-asset environments only");
  }
}

ExperimentConfig preset_config(ExperimentMode mode) {
  ExperimentConfig c;
  c.mode = mode;
  c.sac.reward_scale = 0.01;
  c.sac.epochs = 20;
  c.sac.steps_per_epoch = 1000;
  switch (mode) {
    case ExperimentMode::kPriceOfRisk:
      c.env.market.nu_client = 2.0;
      c.output_dir = "runs/price_of_risk";
      break;
    case ExperimentMode::kPortfolio: c.output_dir = "runs/portfolio"; break;
    default: c.output_dir = "runs/" + to_string(mode); break;
  }
  return c;
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key.starts_with("market2.") || key.starts_with("flow2.")) {
    const auto base = asset2_base_key(key);
    if (!base) throw ConfigError("unknown config key '" + key + "'");
    ExperimentConfig probe;
    apply_setting(probe, *base, value);  // validates the value
    cfg.asset2_overrides[key] = value;
    return;
  }
  const Field* f = find_field(key);
  if (f == nullptr) throw ConfigError("unknown config key '" + key + "'");
  f->set(cfg, key, value);
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  for (const auto& f : fields()) out << f.key << " = " << f.get(cfg) << '\n';
  for (const auto& [key, value] : cfg.asset2_overrides) out << key << " = " << value << '\n';
  return out.str();
}

void apply_env_overrides(ExperimentConfig& cfg, std::span<const std::string> environment) {
  const std::string prefix(kEnvOverridePrefix);
  for (const auto& entry : environment) {
    if (!entry.starts_with(prefix)) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string name = entry.substr(prefix.size(), eq - prefix.size());
    std::string key;
    for (std::size_t i = 0; i < name.size(); ++i) {
      if (name[i] == '_' && i + 1 < name.size() && name[i + 1] == '_') {
        key += '.';
        ++i;
      } else {
        key += static_cast<char>(std::tolower(static_cast<unsigned char>(name[i])));
      }
    }
    apply_setting(cfg, key, entry.substr(eq + 1));
  }
}

std::vector<std::string> process_environment() {
  std::vector<std::string> out;
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) out.emplace_back(*e);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.push_back(f.key);
  return keys;
}

}  // namespace autohedge
