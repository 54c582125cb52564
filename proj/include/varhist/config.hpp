#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "varhist/metrics.hpp"
#include "varhist/rng.hpp"

namespace varhist {

using json = nlohmann::json;

inline const std::vector<std::string> kGeneratorIds = {"removeFeature", "mutAdd",       "mutReplace",  "mutDelete",
                                                       "transplant",    "cloneVariant", "cloneFeature"};

/// `<metric> <op> <value>`, e.g. `distinctFeatureCount >= 10`.
struct Termination {
  std::string metric;
  std::string op;
  long long value = 0;

  static Termination parse(std::string_view text);
  std::string str() const;
  bool holds(const MetricRow& metrics) const;
};

struct CheckerSpec {
  std::string kind = "bundled";  ///< bundled | external
  std::string cmd;
  double timeoutSeconds = 60.0;
};

struct RunConfig {
  std::string preset;
  std::int64_t maxIterations = 200;
  std::optional<Termination> termination;
  std::vector<std::string> generators = kGeneratorIds;
  /// Empty means uniform over `generators`.
  std::map<std::string, double> distribution;
  int maxRetries = 50;
  CheckerSpec checker;
  std::uint64_t seed = 0;
  double sensibilityDiscardProb = 0.5;
};

/// Shipped presets: uniform-generators, uniform-operations, growing-system.
RunConfig presetConfig(std::string_view name);
/// Overlays the keys present in `j` on `base`.  Nested `checker` objects and
/// flat `checker.kind` style keys are both accepted.
RunConfig configFromJson(const json& j, RunConfig base = {});
RunConfig loadConfig(const std::filesystem::path& path, RunConfig base = {});
json toJson(const RunConfig& config);

/// (generator, probability) in the order of `config.generators`.  Throws
/// BadDistribution for unknown ids, probabilities outside [0,1] or sums
/// away from 1.
std::vector<std::pair<std::string, double>> effectiveDistribution(const RunConfig& config);
/// Throws BadConfig / BadDistribution.
void validateConfig(const RunConfig& config);

std::string selectGenerator(const std::vector<std::pair<std::string, double>>& distribution, Rng& rng);

}  // namespace varhist
