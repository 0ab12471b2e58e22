#include "fairalloc/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"

#include "fairalloc/errors.hpp"

namespace fairalloc {
namespace {

using nlohmann::json;

// Walks the document, collecting issues instead of stopping at the first one.
class Reader {
 public:
  std::vector<ConfigIssue> issues;

  void fail(const std::string& path, std::string message) {
    issues.push_back({path, std::move(message)});
  }

  const json* object(const json& parent, const std::string& path, const char* key, bool required) {
    auto it = parent.find(key);
    const std::string p = join(path, key);
    if (it == parent.end()) {
      if (required) fail(p, "missing required field");
      return nullptr;
    }
    if (!it->is_object()) {
      fail(p, "expected an object");
      return nullptr;
    }
    return &*it;
  }

  std::optional<double> number(const json& parent, const std::string& path, const char* key,
                               bool required) {
    auto it = parent.find(key);
    const std::string p = join(path, key);
    if (it == parent.end()) {
      if (required) fail(p, "missing required field");
      return std::nullopt;
    }
    if (!it->is_number()) {
      fail(p, "expected a number");
      return std::nullopt;
    }
    const double v = it->get<double>();
    if (!std::isfinite(v)) {
      fail(p, "expected a finite number");
      return std::nullopt;
    }
    return v;
  }

  std::optional<double> positive(const json& parent, const std::string& path, const char* key,
                                 bool required = true) {
    auto v = number(parent, path, key, required);
    if (v && !(*v > 0.0)) {
      fail(join(path, key), fmt::format("must be > 0 (got {})", *v));
      return std::nullopt;
    }
    return v;
  }

  std::optional<double> nonnegative(const json& parent, const std::string& path, const char* key,
                                    bool required = true) {
    auto v = number(parent, path, key, required);
    if (v && !(*v >= 0.0)) {
      fail(join(path, key), fmt::format("must be >= 0 (got {})", *v));
      return std::nullopt;
    }
    return v;
  }

  std::optional<std::uint64_t> count(const json& parent, const std::string& path, const char* key,
                                     bool required) {
    auto it = parent.find(key);
    const std::string p = join(path, key);
    if (it == parent.end()) {
      if (required) fail(p, "missing required field");
      return std::nullopt;
    }
    if (!it->is_number_integer() || (!it->is_number_unsigned() && it->get<std::int64_t>() < 0)) {
      fail(p, "expected a non-negative integer");
      return std::nullopt;
    }
    return it->get<std::uint64_t>();
  }

  std::optional<bool> boolean(const json& parent, const std::string& path, const char* key) {
    auto it = parent.find(key);
    if (it == parent.end()) return std::nullopt;
    if (!it->is_boolean()) {
      fail(join(path, key), "expected true or false");
      return std::nullopt;
    }
    return it->get<bool>();
  }

  std::optional<std::vector<double>> numbers(const json& parent, const std::string& path,
                                             const char* key, bool required) {
    auto it = parent.find(key);
    const std::string p = join(path, key);
    if (it == parent.end()) {
      if (required) fail(p, "missing required field");
      return std::nullopt;
    }
    if (!it->is_array()) {
      fail(p, "expected an array of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    bool ok = true;
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& v = (*it)[i];
      if (!v.is_number() || !std::isfinite(v.get<double>())) {
        fail(fmt::format("{}[{}]", p, i), "expected a finite number");
        ok = false;
      } else {
        out.push_back(v.get<double>());
      }
    }
    if (!ok) return std::nullopt;
    return out;
  }

  void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool known = false;
      for (const char* k : keys) known = known || it.key() == k;
      if (!known) fail(join(path, it.key()), "unknown field");
    }
  }

  // Exactly one key naming the variant, e.g. {"pareto": {...}}.
  std::optional<std::pair<std::string, const json*>> variant(const json& parent, const std::string& path,
                                                             const char* key,
                                                             std::initializer_list<const char*> names) {
    const json* obj = object(parent, path, key, true);
    if (obj == nullptr) return std::nullopt;
    const std::string p = join(path, key);
    if (obj->size() != 1) {
      fail(p, fmt::format("expected exactly one of {}", fmt::join(names, ", ")));
      return std::nullopt;
    }
    const auto it = obj->begin();
    for (const char* name : names) {
      if (it.key() == name) {
        if (!it->is_object()) {
          fail(join(p, name), "expected an object");
          return std::nullopt;
        }
        return std::make_pair(std::string(name), &*it);
      }
    }
    fail(join(p, it.key()), fmt::format("unknown variant; expected one of {}", fmt::join(names, ", ")));
    return std::nullopt;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
};

std::optional<CompletionSpec> read_completion(Reader& r, const json& group, const std::string& path) {
  auto v = r.variant(group, path, "completion", {"pareto", "exponential", "deterministic", "empirical"});
  if (!v) return std::nullopt;
  const auto& [name, body] = *v;
  const std::string p = path + ".completion." + name;
  if (name == "pareto") {
    r.only_keys(*body, p, {"scale", "shape"});
    auto scale = r.positive(*body, p, "scale");
    auto shape = r.positive(*body, p, "shape");
    if (scale && shape) return Pareto(*scale, *shape);
  } else if (name == "exponential") {
    r.only_keys(*body, p, {"rate"});
    if (auto rate = r.positive(*body, p, "rate")) return Exponential(*rate);
  } else if (name == "deterministic") {
    r.only_keys(*body, p, {"value"});
    if (auto value = r.positive(*body, p, "value")) return Deterministic(*value);
  } else {
    r.only_keys(*body, p, {"samples"});
    auto samples = r.numbers(*body, p, "samples", true);
    if (!samples) return std::nullopt;
    if (samples->empty()) {
      r.fail(p + ".samples", "must not be empty");
      return std::nullopt;
    }
    for (std::size_t i = 0; i < samples->size(); ++i) {
      if (!((*samples)[i] > 0.0)) {
        r.fail(fmt::format("{}.samples[{}]", p, i), "must be > 0");
        return std::nullopt;
      }
    }
    return Empirical(std::move(*samples));
  }
  return std::nullopt;
}

std::optional<RewardSpec> read_reward(Reader& r, const json& group, const std::string& path) {
  auto v = r.variant(group, path, "reward", {"power_of_time", "constant", "scaled_uniform"});
  if (!v) return std::nullopt;
  const auto& [name, body] = *v;
  const std::string p = path + ".reward." + name;
  if (name == "power_of_time") {
    r.only_keys(*body, p, {"exponent"});
    if (auto e = r.nonnegative(*body, p, "exponent")) return PowerOfTime(*e);
  } else if (name == "constant") {
    r.only_keys(*body, p, {"value"});
    if (auto c = r.nonnegative(*body, p, "value")) return ConstantReward(*c);
  } else {
    r.only_keys(*body, p, {"lo", "hi"});
    auto lo = r.nonnegative(*body, p, "lo");
    auto hi = r.nonnegative(*body, p, "hi");
    if (lo && hi) {
      if (*hi < *lo) {
        r.fail(p + ".hi", "must be >= lo");
        return std::nullopt;
      }
      return ScaledUniform(*lo, *hi);
    }
  }
  return std::nullopt;
}

void read_groups(Reader& r, const json& doc, ExperimentConfig& cfg) {
  auto it = doc.find("groups");
  if (it == doc.end()) {
    r.fail("groups", "missing required field");
    return;
  }
  if (!it->is_array() || it->empty()) {
    r.fail("groups", "expected a non-empty array");
    return;
  }
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < it->size(); ++i) {
    const json& g = (*it)[i];
    const std::string path = fmt::format("groups[{}]", i);
    if (!g.is_object()) {
      r.fail(path, "expected an object");
      continue;
    }
    r.only_keys(g, path, {"label", "completion", "reward"});
    std::string label = fmt::format("group-{}", i + 1);
    if (auto l = g.find("label"); l != g.end()) {
      if (l->is_string()) {
        label = l->get<std::string>();
      } else {
        r.fail(path + ".label", "expected a string");
      }
    }
    for (const auto& existing : labels) {
      if (existing == label) r.fail(path + ".label", fmt::format("duplicate label '{}'", label));
    }
    labels.push_back(label);

    auto completion = read_completion(r, g, path);
    auto reward = read_reward(r, g, path);
    if (!completion || !reward) continue;
    const auto* pareto = std::get_if<Pareto>(&*completion);
    const auto* power = std::get_if<PowerOfTime>(&*reward);
    if (pareto && power && power->exponent >= pareto->shape) {
      r.fail(path + ".reward.power_of_time.exponent",
             fmt::format("must be below the Pareto shape {} (infinite mean reward)", pareto->shape));
      continue;
    }
    cfg.groups.emplace_back(std::move(*completion), std::move(*reward), label);
  }
}

ExperimentConfig read_document(const json& doc) {
  Reader r;
  ExperimentConfig cfg;
  if (!doc.is_object()) throw ConfigError("", "top level must be a JSON object");
  r.only_keys(doc, "", {"schema_version", "seed", "groups", "deadlines", "utility", "V", "tau",
                        "gamma_cap", "experiment", "flags"});

  if (auto version = r.count(doc, "", "schema_version", true)) {
    if (*version != static_cast<std::uint64_t>(kSchemaVersion)) {
      r.fail("schema_version", fmt::format("unsupported version {} (expected {})", *version, kSchemaVersion));
    }
  }
  if (auto seed = r.count(doc, "", "seed", false)) cfg.seed = *seed;

  read_groups(r, doc, cfg);

  if (auto deadlines = r.numbers(doc, "", "deadlines", true)) {
    try {
      DeadlineSet check(*deadlines);
      cfg.deadlines = std::move(*deadlines);
    } catch (const std::invalid_argument& e) {
      r.fail("deadlines", e.what());
    }
  }

  const std::size_t num_groups = doc.contains("groups") && doc["groups"].is_array() ? doc["groups"].size() : 0;
  if (const json* u = r.object(doc, "", "utility", true)) {
    r.only_keys(*u, "utility", {"alpha", "weights"});
    if (auto alpha = r.nonnegative(*u, "utility", "alpha")) cfg.alpha = *alpha;
    if (auto weights = r.numbers(*u, "utility", "weights", false)) {
      for (std::size_t i = 0; i < weights->size(); ++i) {
        if (!((*weights)[i] > 0.0)) r.fail(fmt::format("utility.weights[{}]", i), "must be > 0");
      }
      if (weights->size() != num_groups) {
        r.fail("utility.weights", fmt::format("has {} entries but there are {} groups", weights->size(), num_groups));
      }
      cfg.weights = std::move(*weights);
    } else {
      cfg.weights.assign(num_groups, 1.0);
    }
  }

  if (auto v = r.positive(doc, "", "V", false)) cfg.V = *v;
  if (auto tau = r.count(doc, "", "tau", false)) {
    if (*tau < 1) r.fail("tau", "must be >= 1");
    cfg.tau = static_cast<std::size_t>(*tau);
  }
  if (const json* cap = r.object(doc, "", "gamma_cap", false)) {
    r.only_keys(*cap, "gamma_cap", {"mode", "value", "linear_headroom"});
    if (auto mode = cap->find("mode"); mode != cap->end()) {
      if (*mode == "empirical_rate") {
        cfg.gamma_cap.mode = GammaCap::Mode::EmpiricalRate;
      } else if (*mode == "fixed") {
        cfg.gamma_cap.mode = GammaCap::Mode::Fixed;
      } else {
        r.fail("gamma_cap.mode", "expected \"empirical_rate\" or \"fixed\"");
      }
    }
    if (auto value = r.positive(*cap, "gamma_cap", "value", false)) cfg.gamma_cap.value = *value;
    if (auto h = r.number(*cap, "gamma_cap", "linear_headroom", false)) {
      if (*h < 1.0) {
        r.fail("gamma_cap.linear_headroom", "must be >= 1");
      } else {
        cfg.gamma_cap.linear_headroom = *h;
      }
    }
  }

  if (const json* exp = r.object(doc, "", "experiment", false)) {
    r.only_keys(*exp, "experiment", {"simulate", "regret"});
    if (const json* sim = r.object(*exp, "experiment", "simulate", false)) {
      const std::string p = "experiment.simulate";
      r.only_keys(*sim, p, {"policy", "budget", "trials"});
      SimulateSpec spec;
      if (auto policy = sim->find("policy"); policy != sim->end()) {
        if (*policy == "olum") {
          spec.policy = PolicyKind::Olum;
        } else if (*policy == "oracle") {
          spec.policy = PolicyKind::Oracle;
        } else {
          r.fail(p + ".policy", "expected \"olum\" or \"oracle\"");
        }
      }
      auto budget = r.positive(*sim, p, "budget");
      auto trials = r.count(*sim, p, "trials", true);
      if (trials && *trials < 2) r.fail(p + ".trials", "must be >= 2");
      if (budget && trials) {
        spec.budget = *budget;
        spec.trials = static_cast<std::size_t>(*trials);
        cfg.simulate = spec;
      }
    }
    if (const json* reg = r.object(*exp, "experiment", "regret", false)) {
      const std::string p = "experiment.regret";
      r.only_keys(*reg, p, {"budgets", "trials"});
      auto budgets = r.numbers(*reg, p, "budgets", true);
      auto trials = r.count(*reg, p, "trials", true);
      bool ok = budgets && trials;
      if (trials && *trials < 2) {
        r.fail(p + ".trials", "must be >= 2");
        ok = false;
      }
      if (budgets) {
        if (budgets->size() < 4) {
          r.fail(p + ".budgets", "needs at least 4 budgets");
          ok = false;
        }
        for (std::size_t i = 0; i < budgets->size(); ++i) {
          if (!((*budgets)[i] > 1.0) || (i > 0 && !((*budgets)[i] > (*budgets)[i - 1]))) {
            r.fail(fmt::format("{}.budgets[{}]", p, i), "budgets must exceed 1 and increase");
            ok = false;
          }
        }
        if (ok && std::log10(budgets->back() / budgets->front()) < 1.5 - 1e-12) {
          r.fail(p + ".budgets", "must span at least 1.5 decades");
          ok = false;
        }
      }
      if (ok) cfg.regret = RegretSpec{std::move(*budgets), static_cast<std::size_t>(*trials)};
    }
  }

  if (const json* flags = r.object(doc, "", "flags", false)) {
    r.only_keys(*flags, "flags", {"truncate_last", "trace"});
    if (auto b = r.boolean(*flags, "flags", "truncate_last")) cfg.truncate_last = *b;
    if (auto b = r.boolean(*flags, "flags", "trace")) cfg.trace = *b;
  }

  if (!r.issues.empty()) throw ConfigError(std::move(r.issues));
  return cfg;
}

}  // namespace

Environment ExperimentConfig::environment() const {
  std::vector<UtilitySpec> utilities;
  for (double w : weights) utilities.emplace_back(alpha, w);
  return Environment(groups, std::move(utilities), DeadlineSet(deadlines));
}

OlumParams ExperimentConfig::olum_params(double budget) const {
  OlumParams params;
  params.V = V.value_or(default_v(budget));
  params.tau = tau;
  params.cap = gamma_cap;
  return params;
}

ExperimentConfig parse_config_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", fmt::format("invalid JSON: {}", e.what()));
  }
  return read_document(doc);
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", fmt::format("cannot open config file '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

}  // namespace fairalloc
