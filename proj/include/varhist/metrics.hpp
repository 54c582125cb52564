#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "varhist/model.hpp"

namespace varhist {

struct MetricRow {
  Revision revision = 0;
  /// Non-root features over all repositories, counting features of the same
  /// lineage once.
  std::size_t distinctFeatures = 0;
  std::size_t totalFeatures = 0;
  std::size_t repositoryCount = 0;
  std::size_t totalLoc = 0;
  std::map<std::string, std::size_t> locPerVariant;

  bool operator==(const MetricRow&) const = default;
};

MetricRow computeMetrics(const AssetTree& tree);

/// One row per committed revision of a history directory.  Throws Error
/// (MalformedRecord / SnapshotIoError) when the layout is invalid.
std::vector<MetricRow> historyMetrics(const std::filesystem::path& outDir);

std::string metricsCsv(const std::vector<MetricRow>& rows);
/// revision,metric,key,value rows for plotting tools.
std::string metricsLong(const std::vector<MetricRow>& rows);

}  // namespace varhist
