// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "testkit.hpp"
#include "varhist/generators.hpp"
#include "varhist/history.hpp"
#include "varhist/metrics.hpp"
#include "varhist/runner.hpp"
#include "varhist/snapshot.hpp"
#include "varhist/transplant.hpp"

using namespace testkit;

namespace {

const std::vector<std::string> kPresets = {"uniform-generators", "uniform-operations", "growing-system"};

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
  if (!ok) ++failures;
}

struct MetricsSink : HistorySink {
  std::vector<MetricRow> rows;
  void begin(const AssetTree& initial, const RunConfig&, const json&) override { rows = {computeMetrics(initial)}; }
  void commit(const OperationRecord&, const AssetTree& tree) override { rows.push_back(computeMetrics(tree)); }
};

/// Forwards to a DirectorySink and keeps per-commit metrics.
struct TeeSink : HistorySink {
  DirectorySink dir;
  MetricsSink metrics;
  explicit TeeSink(fs::path out) : dir(std::move(out)) {}
  void begin(const AssetTree& t, const RunConfig& c, const json& i) override {
    dir.begin(t, c, i);
    metrics.begin(t, c, i);
  }
  void commit(const OperationRecord& r, const AssetTree& t) override {
    dir.commit(r, t);
    metrics.commit(r, t);
  }
  void attempt(const Attempt& a) override { dir.attempt(a); }
  void finish(const RunSummary& s) override { dir.finish(s); }
};

MinilangAdapter& adapter() {
  static MinilangAdapter a;
  return a;
}

std::unique_ptr<Simulation> makeSimulation(const std::string& preset, std::uint64_t seed, std::int64_t iterations) {
  auto config = presetConfig(preset);
  config.seed = seed;
  config.maxIterations = iterations;
  auto donors = loadDonors({dataDir() / "geomlib", dataDir() / "strkit"}, adapter());
  return std::make_unique<Simulation>(config, loadInitialSystem(dataDir() / "calc"), std::move(donors), adapter(),
                                      makeChecker(config.checker, adapter()));
}

std::size_t modularCount(const Simulation& sim) {
  std::size_t n = 0;
  for (const auto& [id, d] : sim.donors()) {
    for (const auto& t : d.testCandidates) n += t.modular ? 1 : 0;
  }
  return n;
}

std::set<NodeId> mappedTo(const AssetNode& repo, FeatureId feature) {
  std::set<NodeId> out;
  forEachNode(repo, [&](const AssetNode& n) {
    if (n.mappedFeatures.count(feature)) out.insert(n.id);
  });
  return out;
}

/// Ground-truth oracle for one commit; returns a description of the first
/// violation or "".
std::string groundTruth(const OperationRecord& record, const AssetTree& before, const AssetTree& after) {
  if (record.kind == "TransplantFeature") {
    auto point = AssetRef::parse(record.params.at("insertionPoint").get<std::string>());
    auto repoName = repositoryOf(resolveAssetRef(before, point))->name;
    const auto* repo = after.repository(repoName);
    auto test = record.params.at("test").get<std::string>();
    const auto* feature = repo->featureModel->findByLineage(test);
    if (!feature) return record.opId + ": no feature with lineage " + test;
    std::set<NodeId> expected;
    forEachNode(*repo, [&](const AssetNode& n) {
      if (n.kind == AssetKind::Block && !before.find(n.id)) expected.insert(n.id);
    });
    auto donor = record.params.at("donor").get<std::string>();
    for (const auto& file : record.params.at("organ").at("sliceFiles")) {
      auto* node = findByPath(after, repoName + "/" + slicePath(donor, file.at("name").get<std::string>()));
      if (!node) return record.opId + ": slice file missing";
      expected.insert(node->id);
    }
    if (mappedTo(*repo, feature->id) != expected) {
      return record.opId + ": mapped assets differ from inserted blocks and slice files";
    }
  }
  if (record.kind == "RemoveFeature") {
    for (const auto* repo : after.repositories()) {
      std::string bad;
      forEachNode(*repo, [&](const AssetNode& n) {
        for (auto id : n.mappedFeatures) {
          if (!repo->featureModel->contains(id)) bad = record.opId + ": asset maps to a removed feature";
        }
      });
      if (!bad.empty()) return bad;
    }
    auto ref = FeatureRef::parse(record.params.at("feature").get<std::string>());
    auto gone = resolveFeatureRef(before, ref);
    if (after.repository(gone.repository->name)->featureModel->contains(gone.feature)) {
      return record.opId + ": feature still present";
    }
  }
  return "";
}

double seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

// ---------------------------------------------------------------------------

struct PresetRun {
  fs::path out;
  double seconds = 0;
  std::vector<MetricRow> rows;
  std::vector<std::string> groundTruthViolations;
  std::size_t transplants = 0;
  std::size_t removals = 0;
  std::size_t exhaustionViolations = 0;
  bool exhausted = false;
};

PresetRun runPreset(const std::string& preset, std::uint64_t seed, std::int64_t iterations, const fs::path& out) {
  PresetRun run;
  run.out = out;
  auto sim = makeSimulation(preset, seed, iterations);
  auto total = modularCount(*sim);
  bool exhaustedBefore = false;
  sim->onCommit = [&](const OperationRecord& r, const AssetTree& before, const AssetTree& after) {
    auto v = groundTruth(r, before, after);
    if (!v.empty()) run.groundTruthViolations.push_back(v);
    run.transplants += r.kind == "TransplantFeature";
    run.removals += r.kind == "RemoveFeature";
    bool exhaustedNow = sim->consumedTests().size() == total;
    if ((exhaustedBefore || (exhaustedNow && r.kind != "TransplantFeature")) &&
        computeMetrics(after).distinctFeatures > computeMetrics(before).distinctFeatures) {
      ++run.exhaustionViolations;
    }
    exhaustedBefore = exhaustedNow;
  };
  TeeSink sink(out);
  auto start = std::chrono::steady_clock::now();
  sim->run(sink);
  run.seconds = seconds(start);
  run.rows = sink.metrics.rows;
  run.exhausted = exhaustedBefore;
  return run;
}

void compilabilityGate(const std::map<std::string, PresetRun>& runs) {
  BundledChecker checker(adapter());
  bool ok = true;
  std::ostringstream detail;
  for (const auto& [preset, run] : runs) {
    std::size_t checked = 0, passed = 0;
    for (const auto& e : fs::directory_iterator(run.out / "revisions")) {
      ++checked;
      passed += checkCompilable(e.path(), checker).ok ? 1 : 0;
    }
    ok = ok && checked == passed && checked == run.rows.size() && run.seconds < 120.0;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s %zu/%zu in %.1fs; ", preset.c_str(), passed, checked, run.seconds);
    detail << buf;
  }
  report(ok, "compilability-gate", detail.str());
}

void determinism(const fs::path& work) {
  auto a = work / "det-a";
  auto b = work / "det-b";
  for (const auto& out : {a, b}) {
    auto sim = makeSimulation("growing-system", 4242, 200);
    DirectorySink sink(out);
    sim->run(sink);
  }
  auto ca = dirContents(a);
  auto cb = dirContents(b);
  std::size_t differing = 0;
  for (const auto& [path, bytes] : ca) differing += (!cb.count(path) || cb.at(path) != bytes) ? 1 : 0;
  for (const auto& [path, bytes] : cb) differing += ca.count(path) ? 0 : 1;
  report(differing == 0 && !ca.empty(), "determinism",
         std::to_string(ca.size()) + " entries compared, " + std::to_string(differing) + " differ");
}

void replayFidelity(const std::map<std::string, PresetRun>& runs) {
  bool ok = true;
  std::ostringstream detail;
  for (const auto& [preset, run] : runs) {
    std::size_t compared = 0, mismatched = 0;
    try {
      replay(run.out, [&](const OperationRecord&, const AssetTree& tree) {
        ++compared;
        auto dir = run.out / "revisions" / revisionName(tree.revision());
        if (!(materialize(tree) == readSnapshot(dir))) ++mismatched;
      });
    } catch (const Error& e) {
      ok = false;
      detail << preset << " replay failed: " << e.what() << "; ";
      continue;
    }
    ok = ok && mismatched == 0 && compared + 1 == run.rows.size();
    detail << preset << " " << compared - mismatched << "/" << compared << "; ";
  }
  report(ok, "replay-fidelity", detail.str());
}

void groundTruthExactness(const std::map<std::string, PresetRun>& runs) {
  std::size_t violations = 0, transplants = 0, removals = 0;
  std::string first;
  for (const auto& [preset, run] : runs) {
    violations += run.groundTruthViolations.size();
    transplants += run.transplants;
    removals += run.removals;
    if (first.empty() && !run.groundTruthViolations.empty()) first = " first: " + run.groundTruthViolations.front();
  }
  report(violations == 0 && transplants > 0 && removals > 0, "ground-truth-exactness",
         std::to_string(transplants) + " transplants, " + std::to_string(removals) + " removals, " +
             std::to_string(violations) + " violations" + first);
}

void trendReproduction() {
  const int seeds = 10;
  int growthOk = 0;
  std::map<std::string, int> decreasesOk;
  std::size_t modular = modularCount(*makeSimulation("growing-system", 1, 1));
  for (int s = 1; s <= seeds; ++s) {
    std::map<std::string, std::vector<MetricRow>> rows;
    for (const auto& preset : kPresets) {
      auto sim = makeSimulation(preset, static_cast<std::uint64_t>(s), 200);
      MetricsSink sink;
      sim->run(sink);
      rows[preset] = sink.rows;
    }
    const auto& g = rows["growing-system"];
    auto initial = g.front().distinctFeatures;
    auto final = g.back().distinctFeatures;
    bool grows = final >= 5 * initial && final > rows["uniform-generators"].back().distinctFeatures &&
                 final > rows["uniform-operations"].back().distinctFeatures;
    growthOk += grows ? 1 : 0;
    for (const auto& preset : {"uniform-generators", "uniform-operations"}) {
      const auto& r = rows[preset];
      int decreases = 0;
      for (std::size_t i = 1; i < r.size(); ++i) decreases += r[i].totalFeatures < r[i - 1].totalFeatures ? 1 : 0;
      decreasesOk[preset] += decreases >= 3 ? 1 : 0;
    }
  }
  bool ok = modular >= 40 && growthOk >= 9 && decreasesOk["uniform-generators"] >= 9 &&
            decreasesOk["uniform-operations"] >= 9;
  report(ok, "trend-reproduction",
         std::to_string(modular) + " modular tests; growth in " + std::to_string(growthOk) +
             "/10 seeds; decreases>=3 in " + std::to_string(decreasesOk["uniform-generators"]) + "/10 (uniform-generators), " +
             std::to_string(decreasesOk["uniform-operations"]) + "/10 (uniform-operations)");
}

void donorExhaustion(const fs::path& work, const std::map<std::string, PresetRun>& runs) {
  std::size_t violations = 0, exhaustedRuns = 0, total = 0;
  auto account = [&](const PresetRun& run) {
    ++total;
    violations += run.exhaustionViolations;
    exhaustedRuns += run.exhausted ? 1 : 0;
  };
  for (const auto& [preset, run] : runs) account(run);
  // long growing runs so that the donor pool actually runs dry
  for (std::uint64_t s = 1; s <= 3; ++s) account(runPreset("growing-system", s, 600, work / ("long-" + std::to_string(s))));
  report(violations == 0 && exhaustedRuns > 0, "donor-exhaustion",
         std::to_string(exhaustedRuns) + "/" + std::to_string(total) + " runs exhausted the donors, " +
             std::to_string(violations) + " increases afterwards");
}

void distributionSanity() {
  const int draws = 100000;
  const double critical = 16.812;  // chi-square, df = 6, p = 0.01
  bool ok = true;
  std::ostringstream detail;
  for (const auto& preset : kPresets) {
    auto dist = effectiveDistribution(presetConfig(preset));
    std::map<std::string, int> counts;
    Rng rng(20240601);
    for (int i = 0; i < draws; ++i) ++counts[selectGenerator(dist, rng)];
    double chi = 0;
    bool within = true;
    for (const auto& [id, p] : dist) {
      double expected = p * draws;
      double sigma = std::sqrt(draws * p * (1 - p));
      double observed = counts[id];
      if (std::fabs(observed - expected) > 3 * sigma) within = false;
      if (expected > 0) chi += (observed - expected) * (observed - expected) / expected;
    }
    ok = ok && within && chi < critical;
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s chi2=%.2f%s; ", preset.c_str(), chi, within ? "" : " (3 sigma exceeded)");
    detail << buf;
  }
  report(ok, "distribution-sanity", detail.str());
}

void cloneCorrectness() {
  const int cases = 1000;
  int bad = 0;
  std::string first;
  for (int c = 0; c < cases; ++c) {
    Rng rng(static_cast<std::uint64_t>(c) * 7919 + 1);
    AssetTree tree;
    auto& src = addRandomRepository(tree, rng, "base");
    if (rng.chance(0.5)) addRandomRepository(tree, rng, "other");
    auto record = applyCloneVariant(tree, makeAssetRef(tree, src), "copy");
    commitRecord(tree, record);
    const auto* a = tree.repository("base");
    const auto* b = tree.repository("copy");
    bool same = b && a->children.size() == b->children.size();
    for (std::size_t i = 0; same && i < a->children.size(); ++i) {
      same = structurallyEqual(*a->children[i], *b->children[i]);
    }
    same = same && structurallyEqual(a->featureModel->root(), b->featureModel->root());
    auto traces = tree.traces.byOp(record.opId).size();
    bool counted = b && traces == countDescendants(*a) + 1;
    if (!(same && counted)) {
      ++bad;
      if (first.empty()) {
        first = " first at case " + std::to_string(c) + ": traces " + std::to_string(traces) + " vs " +
                std::to_string(countDescendants(*a) + 1);
      }
    }
  }
  report(bad == 0, "clone-correctness", std::to_string(cases) + " random trees, " + std::to_string(bad) + " failures" + first);
}

// -- oracle equivalence ------------------------------------------------------

int exclusiveAssetsOracle(int cases) {
  int bad = 0;
  for (int c = 0; c < cases; ++c) {
    Rng rng(static_cast<std::uint64_t>(c) + 100000);
    AssetTree tree;
    const auto& repo = addRandomRepository(tree, rng, "r");
    for (const auto* f : repo.featureModel->all()) {
      auto ref = makeFeatureLPQ(repo, f->id);
      if (featureExclusiveAssets(tree, ref) != bruteExclusiveAssets(tree, repo, f->id)) ++bad;
    }
  }
  return bad;
}

int sliceClosureOracle(int cases) {
  int bad = 0;
  for (int c = 0; c < cases; ++c) {
    Rng rng(static_cast<std::uint64_t>(c) + 200000);
    auto n = 2 + rng.below(8);
    std::map<std::string, std::vector<std::string>> sources;
    std::map<std::string, std::set<std::string>> edges;
    std::map<std::string, std::set<std::string>> externals;
    for (std::uint64_t i = 0; i < n; ++i) {
      auto file = "m" + std::to_string(i) + ".mini";
      std::vector<std::string> lines;
      for (std::uint64_t j = 0; j < n; ++j) {
        if (rng.chance(0.25)) {
          lines.push_back("import m" + std::to_string(j));
          edges[file].insert("m" + std::to_string(j) + ".mini");
        }
      }
      if (rng.chance(0.3)) {
        lines.push_back("import ext.lib");
        externals[file].insert("ext.lib");
      }
      lines.push_back("fn f" + std::to_string(i) + "() {");
      lines.push_back("}");
      sources["m" + std::to_string(i) + ".mini"] = lines;
    }
    ManifestModel manifest;
    manifest.name = "d";
    manifest.deps = {"ext"};
    auto donor = makeDonor("d", "", manifest, sources, {}, adapter());
    std::set<std::string> start{"m" + std::to_string(rng.below(n)) + ".mini"};
    if (rng.chance(0.5)) start.insert("m" + std::to_string(rng.below(n)) + ".mini");
    std::set<std::string> ext;
    auto got = sliceClosure(donor, start, &ext);
    auto want = bruteClosure(edges, start);
    std::set<std::string> wantExt;
    for (const auto& f : want) {
      if (externals.count(f)) wantExt.insert(externals[f].begin(), externals[f].end());
    }
    if (got != want || ext != wantExt) ++bad;
  }
  return bad;
}

using CandidateKey = std::tuple<std::string, std::string, FeatureId>;

std::set<CandidateKey> bruteCandidates(const AssetTree& tree) {
  std::map<NodeId, std::set<NodeId>> edges;
  for (const auto& t : tree.traces.all()) {
    auto* s = tree.find(t.sourceNode);
    auto* d = tree.find(t.targetNode);
    if (s && d && s->kind == AssetKind::Repository && d->kind == AssetKind::Repository) edges[s->id].insert(d->id);
  }
  std::set<CandidateKey> out;
  for (const auto* s : tree.repositories()) {
    std::set<NodeId> reach;
    std::deque<NodeId> queue(edges[s->id].begin(), edges[s->id].end());
    while (!queue.empty()) {
      auto n = queue.front();
      queue.pop_front();
      if (!reach.insert(n).second) continue;
      for (auto m : edges[n]) queue.push_back(m);
    }
    for (const auto* t : tree.repositories()) {
      if (t == s || !reach.count(t->id)) continue;
      std::set<std::string> targetLineages;
      for (const auto* f : t->featureModel->all()) targetLineages.insert(f->lineage);
      for (const auto* f : s->featureModel->all()) {
        if (f->id == s->featureModel->root().id) continue;
        bool fresh = true;
        for (const auto* g : s->featureModel->all()) {
          if (featureWithin(*s->featureModel, g->id, f->id) && targetLineages.count(g->lineage)) fresh = false;
        }
        if (fresh) out.insert({s->name, t->name, f->id});
      }
    }
  }
  return out;
}

int cloneCandidatesOracle(int cases, std::size_t& compared) {
  int bad = 0;
  for (int c = 0; c < cases; ++c) {
    Rng rng(static_cast<std::uint64_t>(c) + 300000);
    AssetTree tree;
    addRandomRepository(tree, rng, "r0");
    if (rng.chance(0.3)) addRandomRepository(tree, rng, "s0");
    auto clones = 1 + rng.below(4);
    for (std::uint64_t i = 0; i < clones; ++i) {
      auto repos = tree.repositories();
      const auto* src = repos[rng.below(repos.size())];
      auto rec = applyCloneVariant(tree, makeAssetRef(tree, *src), "c" + std::to_string(i));
      commitRecord(tree, rec);
    }
    // diverge the variants
    for (auto* repo : tree.repositories()) {
      auto features = repo->featureModel->all();
      if (features.size() > 1 && rng.chance(0.5)) {
        auto id = features[1 + rng.below(features.size() - 1)]->id;
        deleteFeature(tree, *repo, id);
      }
      if (rng.chance(0.4)) {
        Feature f{tree.newFeatureId(), "N" + std::to_string(c), repo->name + "!new", {}};
        repo->featureModel->addChild(repo->featureModel->root().id, std::move(f));
      }
    }
    std::set<CandidateKey> got;
    for (const auto& cand : cloneFeatureCandidates(tree)) got.insert({cand.source->name, cand.target->name, cand.feature});
    compared += got.size();
    if (got != bruteCandidates(tree)) ++bad;
  }
  return bad;
}

void oracleEquivalence() {
  const int cases = 500;
  auto a = exclusiveAssetsOracle(cases);
  auto b = sliceClosureOracle(cases);
  std::size_t candidates = 0;
  auto c = cloneCandidatesOracle(cases, candidates);
  report(a + b + c == 0 && candidates > 0, "oracle-equivalence",
         std::to_string(cases) + " instances each; mismatches: exclusive-assets " + std::to_string(a) +
             ", slice-closure " + std::to_string(b) + ", clone-candidates " + std::to_string(c) + " (" +
             std::to_string(candidates) + " candidates)");
}

}  // namespace

int main() {
  TempDir work("acceptance");
  std::map<std::string, PresetRun> runs;
  try {
    for (const auto& preset : kPresets) runs[preset] = runPreset(preset, 1, 200, work.path / preset);
  } catch (const std::exception& e) {
    std::cout << "FAIL setup: " << e.what() << std::endl;
    return 1;
  }
  auto guarded = [](const std::string& name, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(false, name, std::string("threw ") + e.what());
    }
  };
  guarded("compilability-gate", [&] { compilabilityGate(runs); });
  guarded("determinism", [&] { determinism(work.path); });
  guarded("replay-fidelity", [&] { replayFidelity(runs); });
  guarded("ground-truth-exactness", [&] { groundTruthExactness(runs); });
  guarded("trend-reproduction", [&] { trendReproduction(); });
  guarded("donor-exhaustion", [&] { donorExhaustion(work.path, runs); });
  guarded("distribution-sanity", [&] { distributionSanity(); });
  guarded("clone-correctness", [&] { cloneCorrectness(); });
  guarded("oracle-equivalence", [&] { oracleEquivalence(); });
  std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
