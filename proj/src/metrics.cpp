#include "varhist/metrics.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "varhist/errors.hpp"
#include "varhist/history.hpp"
#include "varhist/snapshot.hpp"

namespace fs = std::filesystem;

namespace varhist {

MetricRow computeMetrics(const AssetTree& tree) {
  MetricRow row;
  row.revision = tree.revision();
  std::set<std::string> lineages;
  for (const auto* repo : tree.repositories()) {
    ++row.repositoryCount;
    auto loc = lineCount(*repo);
    row.locPerVariant[repo->name] = loc;
    row.totalLoc += loc;
    if (!repo->featureModel) continue;
    for (const auto* f : repo->featureModel->all()) {
      if (f->id == repo->featureModel->root().id) continue;
      ++row.totalFeatures;
      lineages.insert(f->lineage);
    }
  }
  row.distinctFeatures = lineages.size();
  return row;
}

namespace {

void countFeatures(const json& feature, std::set<std::string>& lineages, std::size_t& total) {
  for (const auto& c : feature.value("children", json::array())) {
    ++total;
    lineages.insert(c.value("lineage", std::string{}));
    countFeatures(c, lineages, total);
  }
}

}  // namespace

std::vector<MetricRow> historyMetrics(const fs::path& outDir) {
  std::error_code ec;
  if (!fs::is_directory(outDir / "revisions", ec) || !fs::is_directory(outDir / "features", ec)) {
    throw Error(Errc::MalformedRecord, outDir.string() + " is not a history directory");
  }
  std::vector<MetricRow> rows;
  for (Revision r = 0;; ++r) {
    auto name = revisionName(r);
    auto snapshotDir = outDir / "revisions" / name;
    auto featurePath = outDir / "features" / (name + ".json");
    bool hasSnapshot = fs::is_directory(snapshotDir, ec);
    bool hasFeatures = fs::exists(featurePath, ec);
    if (!hasSnapshot && !hasFeatures) break;
    if (hasSnapshot != hasFeatures) {
      throw Error(Errc::MalformedRecord, "revision " + name + " has a snapshot or a feature file but not both");
    }
    json features;
    {
      std::ifstream in(featurePath);
      if (!in) throw Error(Errc::SnapshotIoError, "cannot read " + featurePath.string());
      try {
        features = json::parse(in);
      } catch (const json::exception& e) {
        throw Error(Errc::MalformedRecord, featurePath.string() + ": " + e.what());
      }
    }
    auto files = repositoryFiles(readSnapshot(snapshotDir));
    MetricRow row;
    row.revision = r;
    std::set<std::string> lineages;
    try {
      for (const auto& repo : features.at("repositories")) {
        auto repoName = repo.at("name").get<std::string>();
        ++row.repositoryCount;
        std::size_t loc = 0;
        if (auto it = files.find(repoName); it != files.end()) {
          for (const auto& [path, lines] : it->second) loc += lines.size();
        }
        row.locPerVariant[repoName] = loc;
        row.totalLoc += loc;
        if (!repo.at("model").is_null()) countFeatures(repo.at("model"), lineages, row.totalFeatures);
      }
    } catch (const json::exception& e) {
      throw Error(Errc::MalformedRecord, featurePath.string() + ": " + e.what());
    }
    row.distinctFeatures = lineages.size();
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(Errc::MalformedRecord, outDir.string() + " holds no revision 0000");
  return rows;
}

std::string metricsCsv(const std::vector<MetricRow>& rows) {
  std::ostringstream out;
  out << "revision,distinctFeatures,totalFeatures,repositoryCount,totalLoc,loc\n";
  for (const auto& r : rows) {
    out << r.revision << ',' << r.distinctFeatures << ',' << r.totalFeatures << ',' << r.repositoryCount << ','
        << r.totalLoc << ',';
    bool first = true;
    for (const auto& [repo, loc] : r.locPerVariant) {
      out << (first ? "" : ";") << repo << ':' << loc;
      first = false;
    }
    out << '\n';
  }
  return out.str();
}

std::string metricsLong(const std::vector<MetricRow>& rows) {
  std::ostringstream out;
  out << "revision,metric,key,value\n";
  for (const auto& r : rows) {
    out << r.revision << ",distinctFeatures,," << r.distinctFeatures << '\n';
    out << r.revision << ",totalFeatures,," << r.totalFeatures << '\n';
    out << r.revision << ",repositoryCount,," << r.repositoryCount << '\n';
    out << r.revision << ",totalLoc,," << r.totalLoc << '\n';
    for (const auto& [repo, loc] : r.locPerVariant) out << r.revision << ",loc," << repo << ',' << loc << '\n';
  }
  return out.str();
}

}  // namespace varhist
