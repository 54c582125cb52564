#include "varhist/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "varhist/errors.hpp"
#include "varhist/text.hpp"

namespace varhist {

namespace {

const std::vector<std::string> kMetrics = {"distinctFeatureCount", "totalFeatureCount", "totalLoc",
                                           "repositoryCount"};
const std::vector<std::string> kComparisons = {">=", "<=", "==", "!=", ">", "<"};

long long metricValue(const MetricRow& m, const std::string& metric) {
  if (metric == "distinctFeatureCount") return static_cast<long long>(m.distinctFeatures);
  if (metric == "totalFeatureCount") return static_cast<long long>(m.totalFeatures);
  if (metric == "totalLoc") return static_cast<long long>(m.totalLoc);
  return static_cast<long long>(m.repositoryCount);
}

}  // namespace

Termination Termination::parse(std::string_view text) {
  auto t = trim(text);
  for (const auto& op : kComparisons) {
    auto pos = t.find(op);
    if (pos == std::string_view::npos) continue;
    Termination term;
    term.metric = std::string(trim(t.substr(0, pos)));
    term.op = op;
    auto number = std::string(trim(t.substr(pos + op.size())));
    if (std::find(kMetrics.begin(), kMetrics.end(), term.metric) == kMetrics.end()) {
      throw Error(Errc::BadConfig, "unknown termination metric '" + term.metric + "'");
    }
    try {
      std::size_t used = 0;
      term.value = std::stoll(number, &used);
      if (used != number.size()) throw std::invalid_argument(number);
    } catch (const std::exception&) {
      throw Error(Errc::BadConfig, "termination needs an integer bound, got '" + number + "'");
    }
    return term;
  }
  throw Error(Errc::BadConfig, "termination must read '<metric> <op> <integer>'");
}

std::string Termination::str() const { return metric + " " + op + " " + std::to_string(value); }

bool Termination::holds(const MetricRow& metrics) const {
  auto v = metricValue(metrics, metric);
  if (op == ">=") return v >= value;
  if (op == "<=") return v <= value;
  if (op == "==") return v == value;
  if (op == "!=") return v != value;
  if (op == ">") return v > value;
  return v < value;
}

RunConfig presetConfig(std::string_view name) {
  RunConfig c;
  c.preset = std::string(name);
  const double clone = 0.01;
  if (name == "uniform-generators") {
    for (const auto& id : kGeneratorIds) c.distribution[id] = 0.196;
  } else if (name == "uniform-operations") {
    const double op = (1.0 - 2 * clone) / 3.0;
    c.distribution = {{"transplant", op}, {"removeFeature", op}, {"mutAdd", op / 3},
                      {"mutReplace", op / 3}, {"mutDelete", op / 3}};
  } else if (name == "growing-system") {
    c.distribution = {{"mutAdd", 0.2}, {"mutReplace", 0.2}, {"mutDelete", 0.2}, {"transplant", 0.29},
                      {"removeFeature", 0.09}};
  } else {
    throw Error(Errc::BadConfig, "unknown preset '" + std::string(name) + "'");
  }
  c.distribution["cloneVariant"] = clone;
  c.distribution["cloneFeature"] = clone;
  return c;
}

RunConfig configFromJson(const json& j, RunConfig c) {
  if (!j.is_object()) throw Error(Errc::BadConfig, "config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "preset") {
        auto seed = c.seed;
        c = presetConfig(value.get<std::string>());
        c.seed = seed;
      }
    }
    for (const auto& [key, value] : j.items()) {
      if (key == "preset") continue;
      if (key == "max_iterations") {
        c.maxIterations = value.get<std::int64_t>();
      } else if (key == "termination") {
        if (value.is_null()) c.termination.reset();
        else c.termination = Termination::parse(value.get<std::string>());
      } else if (key == "generators") {
        c.generators = value.get<std::vector<std::string>>();
      } else if (key == "distribution") {
        c.distribution = value.get<std::map<std::string, double>>();
      } else if (key == "max_retries") {
        c.maxRetries = value.get<int>();
      } else if (key == "seed") {
        c.seed = value.get<std::uint64_t>();
      } else if (key == "sensibility_discard_prob") {
        c.sensibilityDiscardProb = value.get<double>();
      } else if (key == "checker") {
        if (value.contains("kind")) c.checker.kind = value.at("kind").get<std::string>();
        if (value.contains("cmd")) c.checker.cmd = value.at("cmd").get<std::string>();
        if (value.contains("timeout_s")) c.checker.timeoutSeconds = value.at("timeout_s").get<double>();
      } else if (key == "checker.kind") {
        c.checker.kind = value.get<std::string>();
      } else if (key == "checker.cmd") {
        c.checker.cmd = value.get<std::string>();
      } else if (key == "checker.timeout_s") {
        c.checker.timeoutSeconds = value.get<double>();
      } else {
        throw Error(Errc::BadConfig, "unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(Errc::BadConfig, std::string("config value has the wrong type: ") + e.what());
  }
  validateConfig(c);
  return c;
}

RunConfig loadConfig(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::BadConfig, "cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::BadConfig, "config " + path.string() + " is not valid JSON: " + e.what());
  }
  return configFromJson(j, std::move(base));
}

json toJson(const RunConfig& c) {
  json j;
  if (!c.preset.empty()) j["preset"] = c.preset;
  j["max_iterations"] = c.maxIterations;
  j["termination"] = c.termination ? json(c.termination->str()) : json(nullptr);
  j["generators"] = c.generators;
  json dist = json::object();
  for (const auto& [id, p] : effectiveDistribution(c)) dist[id] = p;
  j["distribution"] = dist;
  j["max_retries"] = c.maxRetries;
  j["checker"] = json{{"kind", c.checker.kind}, {"cmd", c.checker.cmd}, {"timeout_s", c.checker.timeoutSeconds}};
  j["seed"] = c.seed;
  j["sensibility_discard_prob"] = c.sensibilityDiscardProb;
  return j;
}

std::vector<std::pair<std::string, double>> effectiveDistribution(const RunConfig& c) {
  if (c.generators.empty()) throw Error(Errc::BadDistribution, "no generators listed");
  std::vector<std::pair<std::string, double>> out;
  for (const auto& id : c.generators) {
    if (std::find(kGeneratorIds.begin(), kGeneratorIds.end(), id) == kGeneratorIds.end()) {
      throw Error(Errc::BadDistribution, "unknown generator '" + id + "'");
    }
    if (std::any_of(out.begin(), out.end(), [&](const auto& e) { return e.first == id; })) {
      throw Error(Errc::BadDistribution, "generator '" + id + "' listed twice");
    }
    double p = 1.0 / static_cast<double>(c.generators.size());
    if (!c.distribution.empty()) {
      auto it = c.distribution.find(id);
      p = it == c.distribution.end() ? 0.0 : it->second;
    }
    out.emplace_back(id, p);
  }
  for (const auto& [id, p] : c.distribution) {
    if (std::find(c.generators.begin(), c.generators.end(), id) == c.generators.end()) {
      throw Error(Errc::BadDistribution, "distribution names unlisted generator '" + id + "'");
    }
  }
  double sum = 0;
  for (const auto& [id, p] : out) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw Error(Errc::BadDistribution, "probability of '" + id + "' outside [0,1]");
    }
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-9) {
    std::ostringstream s;
    s.precision(12);
    s << "probabilities sum to " << sum;
    throw Error(Errc::BadDistribution, s.str());
  }
  return out;
}

void validateConfig(const RunConfig& c) {
  if (c.maxIterations < 0) throw Error(Errc::BadConfig, "max_iterations must not be negative");
  if (c.maxRetries < 1) throw Error(Errc::BadConfig, "max_retries must be at least 1");
  if (!(c.sensibilityDiscardProb >= 0.0 && c.sensibilityDiscardProb <= 1.0)) {
    throw Error(Errc::BadConfig, "sensibility_discard_prob must lie in [0,1]");
  }
  if (c.checker.kind != "bundled" && c.checker.kind != "external") {
    throw Error(Errc::BadConfig, "checker.kind must be 'bundled' or 'external'");
  }
  if (c.checker.kind == "external" && c.checker.cmd.empty()) {
    throw Error(Errc::BadConfig, "external checker needs checker.cmd");
  }
  if (!(c.checker.timeoutSeconds > 0)) throw Error(Errc::BadConfig, "checker.timeout_s must be positive");
  effectiveDistribution(c);
}

std::string selectGenerator(const std::vector<std::pair<std::string, double>>& distribution, Rng& rng) {
  if (distribution.empty()) throw Error(Errc::BadDistribution, "empty distribution");
  double sum = 0;
  for (const auto& [id, p] : distribution) {
    if (!std::isfinite(p) || p < 0.0) throw Error(Errc::BadDistribution, "bad probability for '" + id + "'");
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-9) throw Error(Errc::BadDistribution, "probabilities do not sum to 1");
  double u = rng.unit();
  double acc = 0;
  for (const auto& [id, p] : distribution) {
    acc += p;
    if (u < acc) return id;
  }
  // rounding slack: last generator with positive weight
  for (auto it = distribution.rbegin(); it != distribution.rend(); ++it) {
    if (it->second > 0) return it->first;
  }
  return distribution.back().first;
}

}  // namespace varhist
