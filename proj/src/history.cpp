#include "varhist/history.hpp"

#include <fstream>
#include <sstream>

#include "varhist/addressing.hpp"
#include "varhist/errors.hpp"
#include "varhist/operations.hpp"
#include "varhist/snapshot.hpp"
#include "varhist/text.hpp"

namespace fs = std::filesystem;

namespace varhist {

std::string revisionName(Revision revision) { return zeroPad(revision, 4); }

namespace {

json featureToJson(const Feature& f) {
  auto children = json::array();
  for (const auto& c : f.children) children.push_back(featureToJson(c));
  return json{{"name", f.name}, {"lineage", f.lineage}, {"children", children}};
}

Feature featureFromJson(AssetTree& tree, const json& j) {
  Feature f;
  f.id = tree.newFeatureId();
  f.name = j.at("name").get<std::string>();
  f.lineage = j.value("lineage", std::string{});
  for (const auto& c : j.value("children", json::array())) f.children.push_back(featureFromJson(tree, c));
  return f;
}

std::vector<std::string> sortedRefs(const AssetNode& repo, const std::set<FeatureId>& ids) {
  std::vector<std::string> out;
  for (auto id : ids) out.push_back(makeFeatureLPQ(repo, id).str());
  std::sort(out.begin(), out.end());
  return out;
}

std::string readText(const fs::path& path, Errc code) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(code, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

json readJsonFile(const fs::path& path) {
  auto text = readText(path, Errc::SnapshotIoError);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedRecord, path.string() + ": " + e.what());
  }
}

void writeText(const fs::path& path, const std::string& text, Errc code) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error(code, "cannot write " + path.string());
}

}  // namespace

json featuresToJson(const AssetTree& tree) {
  auto repos = json::array();
  for (const auto* repo : tree.repositories()) {
    json r;
    r["name"] = repo->name;
    r["model"] = repo->featureModel ? featureToJson(repo->featureModel->root()) : json(nullptr);
    auto mappings = json::array();
    forEachNode(*repo, [&](const AssetNode& n) {
      if (n.mappedFeatures.empty()) return;
      mappings.push_back(json{{"asset", makeAssetRef(tree, n).str()}, {"features", sortedRefs(*repo, n.mappedFeatures)}});
    });
    r["mappings"] = std::move(mappings);
    repos.push_back(std::move(r));
  }
  json donors = json::object();
  for (const auto& [id, state] : tree.donors) {
    json inc = json::object();
    for (const auto& [repo, files] : state.includedIn) {
      if (!files.empty()) inc[repo] = files;
    }
    if (!inc.empty()) donors[id] = std::move(inc);
  }
  return json{{"schema", kSchemaVersion}, {"revision", tree.revision()}, {"repositories", repos}, {"donors", donors}};
}

void applyFeaturesJson(AssetTree& tree, const json& features) {
  try {
    for (const auto& r : features.at("repositories")) {
      auto name = r.at("name").get<std::string>();
      auto* repo = tree.repository(name);
      if (!repo) throw Error(Errc::MalformedRecord, "feature file names unknown repository '" + name + "'");
      if (!r.at("model").is_null()) repo->featureModel = FeatureModel(featureFromJson(tree, r.at("model")));
      forEachNode(*repo, [](AssetNode& n) { n.mappedFeatures.clear(); });
      for (const auto& m : r.at("mappings")) {
        auto& node = resolveAssetRef(tree, AssetRef::parse(m.at("asset").get<std::string>()));
        for (const auto& f : m.at("features")) {
          auto resolved = resolveFeatureRef(tree, FeatureRef::parse(f.get<std::string>()));
          node.mappedFeatures.insert(resolved.feature);
        }
      }
    }
    tree.donors.clear();
    const auto donors = features.value("donors", json::object());
    for (const auto& [id, inc] : donors.items()) {
      for (const auto& [repo, files] : inc.items()) {
        auto& set = tree.donors[id].includedIn[repo];
        for (const auto& f : files) set.insert(f.get<std::string>());
      }
    }
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedRecord, std::string("bad feature file: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Structural serialization

namespace {

json nodeToJson(const AssetNode& node, const AssetNode* repo) {
  auto features = repo ? sortedRefs(*repo, node.mappedFeatures) : std::vector<std::string>{};
  if (node.kind == AssetKind::Line && features.empty()) return node.text;
  json j;
  j["kind"] = std::string(to_string(node.kind));
  if (node.kind == AssetKind::Line) {
    j["text"] = node.text;
  } else {
    j["name"] = node.name;
    auto children = json::array();
    for (const auto& c : node.children) children.push_back(nodeToJson(*c, repo));
    j["children"] = std::move(children);
  }
  if (!features.empty()) j["features"] = features;
  return j;
}

using PendingMappings = std::vector<std::pair<AssetNode*, std::vector<std::string>>>;

std::unique_ptr<AssetNode> nodeFromJson(const json& j, PendingMappings& pending) {
  if (j.is_string()) return AssetNode::makeLine(j.get<std::string>());
  auto kind = assetKindFromString(j.at("kind").get<std::string>());
  std::unique_ptr<AssetNode> node;
  if (kind == AssetKind::Line) {
    node = AssetNode::makeLine(j.at("text").get<std::string>());
  } else {
    node = std::make_unique<AssetNode>(kind, j.at("name").get<std::string>());
    for (const auto& c : j.at("children")) {
      auto child = nodeFromJson(c, pending);
      child->parent = node.get();
      node->children.push_back(std::move(child));
    }
  }
  if (j.contains("features")) pending.emplace_back(node.get(), j.at("features").get<std::vector<std::string>>());
  return node;
}

bool sameMappings(const AssetNode& a, const AssetNode& ra, const AssetNode& b, const AssetNode& rb) {
  if (sortedRefs(ra, a.mappedFeatures) != sortedRefs(rb, b.mappedFeatures)) return false;
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!sameMappings(*a.children[i], ra, *b.children[i], rb)) return false;
  }
  return true;
}

}  // namespace

json treeToJson(const AssetTree& tree) {
  auto repos = json::array();
  for (const auto* repo : tree.repositories()) {
    auto j = nodeToJson(*repo, repo);
    j["model"] = repo->featureModel ? featureToJson(repo->featureModel->root()) : json(nullptr);
    repos.push_back(std::move(j));
  }
  return json{{"schema", kSchemaVersion}, {"revision", tree.revision()}, {"repositories", repos}};
}

AssetTree treeFromJson(const json& j) {
  AssetTree tree;
  try {
    tree.setRevision(j.at("revision").get<Revision>());
    for (const auto& r : j.at("repositories")) {
      PendingMappings pending;
      auto repo = nodeFromJson(r, pending);
      if (repo->kind != AssetKind::Repository) throw Error(Errc::MalformedRecord, "top-level node is not a repository");
      if (!r.at("model").is_null()) repo->featureModel = FeatureModel(featureFromJson(tree, r.at("model")));
      auto& inserted = tree.insert(tree.root(), tree.root().children.size(), std::move(repo));
      for (auto& [node, refs] : pending) {
        for (const auto& ref : refs) node->mappedFeatures.insert(resolveFeatureRef(tree, FeatureRef::parse(ref)).feature);
      }
      (void)inserted;
    }
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedRecord, std::string("bad tree document: ") + e.what());
  }
  return tree;
}

bool sameStructure(const AssetTree& a, const AssetTree& b) {
  auto ra = a.repositories();
  auto rb = b.repositories();
  if (ra.size() != rb.size()) return false;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    if (!structurallyEqual(*ra[i], *rb[i])) return false;
    if (ra[i]->featureModel.has_value() != rb[i]->featureModel.has_value()) return false;
    if (ra[i]->featureModel && !structurallyEqual(ra[i]->featureModel->root(), rb[i]->featureModel->root())) {
      return false;
    }
    if (!sameMappings(*ra[i], *ra[i], *rb[i], *rb[i])) return false;
  }
  return true;
}

json traceToJson(const CloneTrace& trace) {
  return json{{"schema", kSchemaVersion},
              {"source", trace.source.str()},
              {"target", trace.target.str()},
              {"originOp", trace.originOp}};
}

// ---------------------------------------------------------------------------
// DirectorySink

DirectorySink::DirectorySink(fs::path outDir) : out_(std::move(outDir)) {}

void DirectorySink::begin(const AssetTree& initial, const RunConfig& config, const json& inputs) {
  std::error_code ec;
  fs::create_directories(out_, ec);
  if (ec) throw Error(Errc::SnapshotIoError, "cannot create " + out_.string() + ": " + ec.message());
  for (const char* entry : {"revisions", "features", "ledger.ndjson", "traces.ndjson", "attempts.ndjson",
                            "run.json", "validation.json", "metrics.csv"}) {
    fs::remove_all(out_ / entry, ec);
  }
  fs::create_directories(out_ / "revisions", ec);
  fs::create_directories(out_ / "features", ec);
  if (ec) throw Error(Errc::SnapshotIoError, "cannot create history layout in " + out_.string());
  for (const char* file : {"ledger.ndjson", "traces.ndjson", "attempts.ndjson"}) {
    writeText(out_ / file, "", Errc::LedgerIoError);
  }
  config_ = toJson(config);
  inputs_ = inputs;
  ledger_.clear();
  writeRevision(initial);
}

void DirectorySink::writeRevision(const AssetTree& tree) {
  auto name = revisionName(tree.revision());
  writeSnapshot(tree, out_ / "revisions" / name);
  writeText(out_ / "features" / (name + ".json"), featuresToJson(tree).dump(1) + "\n", Errc::SnapshotIoError);
}

void DirectorySink::append(const fs::path& file, const std::string& line, Errc code) {
  std::ofstream out(file, std::ios::binary | std::ios::app);
  out << line << '\n';
  if (!out) throw Error(code, "cannot append to " + file.string());
}

void DirectorySink::commit(const OperationRecord& record, const AssetTree& tree) {
  writeRevision(tree);
  auto ledgerPath = out_ / "ledger.ndjson";
  // the ledger is append-only: whatever is on disk must be what we wrote
  if (readText(ledgerPath, Errc::LedgerIoError) != ledger_) {
    throw Error(Errc::LedgerIoError, "ledger.ndjson was modified during the run");
  }
  auto j = toJson(record);
  j["schema"] = kSchemaVersion;
  auto line = j.dump();
  append(ledgerPath, line, Errc::LedgerIoError);
  ledger_ += line + "\n";
  std::string traces;
  for (const auto* t : tree.traces.byOp(record.opId)) traces += traceToJson(*t).dump() + "\n";
  if (!traces.empty()) {
    traces.pop_back();
    append(out_ / "traces.ndjson", traces, Errc::LedgerIoError);
  }
}

void DirectorySink::attempt(const Attempt& a) {
  json j{{"iteration", a.iteration}, {"attempt", a.attempt}, {"generator", a.generator}, {"outcome", a.outcome}};
  if (!a.kind.empty()) j["kind"] = a.kind;
  if (!a.reason.empty()) j["reason"] = a.reason;
  append(out_ / "attempts.ndjson", j.dump(), Errc::LedgerIoError);
}

void DirectorySink::finish(const RunSummary& summary) {
  json run{{"schema", kSchemaVersion}, {"config", config_}, {"inputs", inputs_}, {"summary", toJson(summary)}};
  writeText(out_ / "run.json", run.dump(1) + "\n", Errc::LedgerIoError);
}

void DirectorySink::markTruncated(const std::string& reason) noexcept {
  try {
    append(out_ / "ledger.ndjson", json{{"schema", kSchemaVersion}, {"truncated", true}, {"reason", reason}}.dump(),
           Errc::LedgerIoError);
  } catch (...) {
  }
}

// ---------------------------------------------------------------------------
// Replay

namespace {

struct LedgerRead {
  std::vector<OperationRecord> records;
  std::optional<Error> error;
  bool truncated = false;
};

LedgerRead parseLedger(const std::string& text) {
  LedgerRead out;
  std::size_t k = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    bool complete = end != std::string::npos;
    auto line = text.substr(start, complete ? end - start : std::string::npos);
    start = complete ? end + 1 : text.size();
    if (trim(line).empty()) continue;
    ++k;
    try {
      auto j = json::parse(line);
      if (j.is_object() && j.value("truncated", false)) {
        out.truncated = true;
        break;
      }
      if (!complete) throw Error(Errc::MalformedRecord, "line is not terminated");
      out.records.push_back(recordFromJson(j));
    } catch (const json::exception& e) {
      out.error = Error(Errc::ReplayDivergence, "record " + std::to_string(k) + ": malformed line (" + e.what() + ")");
      break;
    } catch (const Error& e) {
      out.error = Error(Errc::ReplayDivergence, "record " + std::to_string(k) + ": " + e.what());
      break;
    }
  }
  return out;
}

}  // namespace

std::vector<OperationRecord> readLedger(const fs::path& path) {
  auto read = parseLedger(readText(path, Errc::LedgerIoError));
  if (read.error) throw *read.error;
  return std::move(read.records);
}

AssetTree replayHistory(const fs::path& revision0Dir, const fs::path& features0,
                        const std::vector<OperationRecord>& ledger,
                        const std::function<void(const OperationRecord&, const AssetTree&)>& onRecord) {
  auto tree = parseSnapshot(revision0Dir);
  applyFeaturesJson(tree, readJsonFile(features0));
  std::size_t k = 0;
  for (const auto& record : ledger) {
    ++k;
    try {
      replayRecord(tree, record);
    } catch (const Error& e) {
      throw Error(Errc::ReplayDivergence, "record " + std::to_string(k) + " (" + record.opId + "): " + e.what());
    } catch (const json::exception& e) {
      throw Error(Errc::ReplayDivergence, "record " + std::to_string(k) + " (" + record.opId + "): " + e.what());
    }
    if (onRecord) onRecord(record, tree);
  }
  return tree;
}

AssetTree replay(const fs::path& outDir, const std::function<void(const OperationRecord&, const AssetTree&)>& onRecord) {
  return replayHistory(outDir / "revisions" / revisionName(0), outDir / "features" / (revisionName(0) + ".json"),
                       readLedger(outDir / "ledger.ndjson"), onRecord);
}

// ---------------------------------------------------------------------------
// Validation

json ValidationReport::toJson() const {
  auto rows = json::array();
  for (const auto& v : violations) {
    rows.push_back(json{{"kind", v.kind}, {"revision", v.revision}, {"opId", v.opId}, {"detail", v.detail}});
  }
  return json{{"schema", kSchemaVersion}, {"ok", ok()}, {"revisionsChecked", revisionsChecked}, {"violations", rows}};
}

namespace {

std::string firstDifference(const SnapshotContent& expected, const SnapshotContent& actual) {
  for (const auto& [path, text] : expected.files) {
    auto it = actual.files.find(path);
    if (it == actual.files.end()) return "missing file " + path;
    if (it->second != text) return "content differs in " + path;
  }
  for (const auto& [path, text] : actual.files) {
    if (!expected.files.count(path)) return "unexpected file " + path;
  }
  for (const auto& d : expected.directories) {
    if (!actual.directories.count(d)) return "missing directory " + d;
  }
  for (const auto& d : actual.directories) {
    if (!expected.directories.count(d)) return "unexpected directory " + d;
  }
  return "identical";
}

std::set<std::string> listEntries(const fs::path& dir, bool directories, const std::string& suffix) {
  std::set<std::string> out;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return out;
  for (const auto& e : fs::directory_iterator(dir, ec)) {
    if (directories != e.is_directory()) continue;
    auto name = e.path().filename().string();
    if (!suffix.empty()) {
      if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) {
        continue;
      }
      name = name.substr(0, name.size() - suffix.size());
    }
    out.insert(name);
  }
  return out;
}

}  // namespace

ValidationReport validateHistory(const fs::path& outDir, const CompilabilityChecker& checker) {
  ValidationReport report;
  auto violate = [&](std::string kind, Revision rev, std::string op, std::string detail) {
    report.violations.push_back({std::move(kind), rev, std::move(op), std::move(detail)});
  };

  std::int64_t committed = -1;
  try {
    committed = readJsonFile(outDir / "run.json").at("summary").at("committed").get<std::int64_t>();
  } catch (const std::exception& e) {
    violate("layout", -1, "", std::string("run.json unusable: ") + e.what());
  }

  LedgerRead ledger;
  try {
    ledger = parseLedger(readText(outDir / "ledger.ndjson", Errc::LedgerIoError));
  } catch (const Error& e) {
    violate("layout", -1, "", e.what());
  }
  if (ledger.error) violate("ledger", -1, "", ledger.error->what());
  if (ledger.truncated) violate("ledger", -1, "", "ledger ends with a truncation marker");
  if (committed >= 0 && !ledger.error && committed != static_cast<std::int64_t>(ledger.records.size())) {
    violate("ledger-count", -1, "",
            "run.json reports " + std::to_string(committed) + " commits, ledger has " +
                std::to_string(ledger.records.size()));
  }

  auto expectedLast = static_cast<Revision>(ledger.records.size());
  auto revDirs = listEntries(outDir / "revisions", true, "");
  auto featureFiles = listEntries(outDir / "features", false, ".json");
  for (Revision r = 0; r <= expectedLast; ++r) {
    if (!revDirs.count(revisionName(r))) violate("layout", r, "", "snapshot directory missing");
    if (!featureFiles.count(revisionName(r))) violate("layout", r, "", "feature file missing");
    revDirs.erase(revisionName(r));
    featureFiles.erase(revisionName(r));
  }
  for (const auto& extra : revDirs) violate("layout", -1, "", "unexpected snapshot directory " + extra);
  for (const auto& extra : featureFiles) violate("layout", -1, "", "unexpected feature file " + extra);

  // recorded traces grouped by operation
  std::map<std::string, std::vector<std::string>> recordedTraces;
  try {
    auto text = readText(outDir / "traces.ndjson", Errc::LedgerIoError);
    for (const auto& line : splitLines(text)) {
      if (trim(line).empty()) continue;
      try {
        auto j = json::parse(line);
        recordedTraces[j.at("originOp").get<std::string>()].push_back(j.dump());
      } catch (const json::exception& e) {
        violate("trace-consistency", -1, "", std::string("malformed trace line: ") + e.what());
      }
    }
  } catch (const Error& e) {
    violate("layout", -1, "", e.what());
  }

  auto compareRevision = [&](const AssetTree& tree, const std::string& opId) {
    auto name = revisionName(tree.revision());
    auto dir = outDir / "revisions" / name;
    std::error_code ec;
    if (fs::is_directory(dir, ec)) {
      auto expected = materialize(tree);
      auto actual = readSnapshot(dir);
      if (!(expected == actual)) violate("replay-fidelity", tree.revision(), opId, firstDifference(expected, actual));
    }
    auto featurePath = outDir / "features" / (name + ".json");
    if (fs::exists(featurePath, ec)) {
      try {
        if (readJsonFile(featurePath) != featuresToJson(tree)) {
          violate("feature-consistency", tree.revision(), opId, "feature file differs from the replayed mappings");
        }
      } catch (const Error& e) {
        violate("feature-consistency", tree.revision(), opId, e.what());
      }
    }
  };

  try {
    auto tree = parseSnapshot(outDir / "revisions" / revisionName(0));
    applyFeaturesJson(tree, readJsonFile(outDir / "features" / (revisionName(0) + ".json")));
    compareRevision(tree, "");
    std::size_t k = 0;
    for (const auto& record : ledger.records) {
      ++k;
      try {
        replayRecord(tree, record);
      } catch (const std::exception& e) {
        violate("replay-divergence", record.revisionAfter, record.opId,
                "record " + std::to_string(k) + ": " + e.what());
        break;
      }
      compareRevision(tree, record.opId);
      std::vector<std::string> expected;
      for (const auto* t : tree.traces.byOp(record.opId)) expected.push_back(traceToJson(*t).dump());
      auto it = recordedTraces.find(record.opId);
      std::vector<std::string> actual = it == recordedTraces.end() ? std::vector<std::string>{} : it->second;
      if (it != recordedTraces.end()) recordedTraces.erase(it);
      if (expected != actual) {
        violate("trace-consistency", record.revisionAfter, record.opId,
                "expected " + std::to_string(expected.size()) + " traces, found " + std::to_string(actual.size()) +
                    " (or different content)");
      }
    }
  } catch (const Error& e) {
    violate("replay-divergence", 0, "", e.what());
  }
  for (const auto& [op, lines] : recordedTraces) {
    violate("trace-consistency", -1, op, std::to_string(lines.size()) + " traces of an unknown operation");
  }

  for (Revision r = 0; r <= expectedLast; ++r) {
    auto dir = outDir / "revisions" / revisionName(r);
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) continue;
    ++report.revisionsChecked;
    auto verdict = checkCompilable(dir, checker);
    if (!verdict.ok) violate("checker", r, "", verdict.reason);
  }
  return report;
}

}  // namespace varhist
