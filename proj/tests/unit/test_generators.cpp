#include <doctest.h>

#include "testkit.hpp"
#include "varhist/errors.hpp"
#include "varhist/generators.hpp"
#include "varhist/metrics.hpp"
#include "varhist/runner.hpp"

using namespace testkit;

namespace {

const MinilangAdapter& adapter() {
  static MinilangAdapter a;
  return a;
}

AssetTree calc() { return loadInitialSystem(dataDir() / "calc"); }

AssetRef refOf(const AssetTree& tree, const std::string& path) { return makeAssetRef(tree, *findByPath(tree, path)); }

}  // namespace

TEST_CASE("remove feature candidates") {
  auto tree = calc();
  CHECK(removableFeatures(tree).size() == 2);
  Rng rng(3);
  auto op = genRemoveFeature(tree, rng);
  REQUIRE(op);
  REQUIRE(std::holds_alternative<RemoveFeatureOp>(*op));
  auto lineage = std::get<RemoveFeatureOp>(*op).feature.str();
  CHECK((lineage == "calc!Logging" || lineage == "calc!Formatting"));

  for (auto [repo, f] : removableFeatures(tree)) {
    auto& model = *tree.find(repo->id)->featureModel;
    model.remove(f);
  }
  CHECK_FALSE(genRemoveFeature(tree, rng));
}

TEST_CASE("mutation candidates") {
  auto tree = calc();
  for (const auto* f : mutableFiles(tree)) CHECK(f->name != "project.manifest");
  Rng rng(11);
  int seen = 0;
  for (int i = 0; i < 50; ++i) {
    // a discard probability of 1 drops every ineffective candidate
    auto op = genMutate(Mutation::Kind::ReplaceLine, tree, rng, 1.0);
    if (!op) continue;
    ++seen;
    const auto& m = std::get<MutateOp>(*op);
    CHECK(m.mutation.kind == Mutation::Kind::ReplaceLine);
    const auto& file = resolveAssetRef(tree, m.target);
    auto lines = materializeLines(file);
    REQUIRE(m.mutation.targetLine < lines.size());
    CHECK_FALSE(ineffectiveMutation(m.mutation, lines[m.mutation.targetLine]));
    // replacement text is drawn from the same folder
    auto pool = folderLinePool(file);
    CHECK(std::find(pool.begin(), pool.end(), m.mutation.donorLine) != pool.end());
  }
  CHECK(seen > 0);

  CHECK(ineffectiveMutation(Mutation{Mutation::Kind::ReplaceLine, 0, "a"}, "a"));
  CHECK_FALSE(ineffectiveMutation(Mutation{Mutation::Kind::DeleteLine, 0, ""}, "a"));

  // a file with no lines offers nothing to delete or replace
  TempDir dir("emptyfile");
  writeFile(dir.path / "sys" / "empty.mini", "");
  auto bare = loadInitialSystem(dir.path / "sys");
  CHECK_FALSE(genMutate(Mutation::Kind::DeleteLine, bare, rng, 0.0));
  CHECK_FALSE(genMutate(Mutation::Kind::ReplaceLine, bare, rng, 0.0));
}

TEST_CASE("transplant candidates consume tests") {
  auto tree = calc();
  auto donors = loadDonors({dataDir() / "geomlib", dataDir() / "strkit"}, adapter());
  std::set<std::string> consumed;
  GeneratorContext ctx{&adapter(), &donors, &consumed, 0.5};
  auto total = availableTests(donors, consumed).size();
  CHECK(total == 50);
  Rng rng(21);
  auto op = genTransplant(tree, ctx, rng);
  REQUIRE(op);
  const auto& t = std::get<TransplantOp>(*op);
  CHECK(consumed == std::set<std::string>{t.testId});
  CHECK(availableTests(donors, consumed).size() == total - 1);
  CHECK(donors.at(t.donorId).findTest(t.testId));
  auto& point = resolveAssetRef(tree, t.insertionPoint);
  CHECK(filesystemPath(point).rfind("calc/", 0) == 0);

  SUBCASE("no insertion points") {
    TempDir dir("nopoints");
    writeFile(dir.path / "sys" / "data.mini", "");
    auto bare = loadInitialSystem(dir.path / "sys");
    auto before = consumed;
    CHECK_FALSE(genTransplant(bare, ctx, rng));
    CHECK(consumed == before);
  }
  SUBCASE("exhausted donors") {
    for (const auto* c : availableTests(donors, consumed)) consumed.insert(c->id);
    CHECK_FALSE(genTransplant(tree, ctx, rng));
  }
}

TEST_CASE("variant names and clone feature candidates") {
  auto tree = calc();
  CHECK(nextVariantName(tree, "calc") == "calc_v1");
  Rng rng(2);
  auto op = genCloneVariant(tree, rng);
  REQUIRE(op);
  CHECK(std::get<CloneVariantOp>(*op).newName == "calc_v1");
  CHECK(cloneFeatureCandidates(tree).empty());
  CHECK_FALSE(genCloneFeature(tree, rng));

  auto rec = applyCloneVariant(tree, refOf(tree, "calc"), "calc_v1");
  commitRecord(tree, rec);
  CHECK(nextVariantName(tree, "calc") == "calc_v2");
  // every feature already exists by lineage in the clone
  CHECK(cloneFeatureCandidates(tree).empty());

  auto& v1 = *tree.repository("calc_v1");
  auto del = applyRemoveFeature(tree, makeFeatureLPQ(v1, v1.featureModel->findByLineage("calc!Logging")->id));
  commitRecord(tree, del);
  auto cands = cloneFeatureCandidates(tree);
  REQUIRE(cands.size() == 1);
  CHECK(cands[0].source == tree.repository("calc"));
  CHECK(cands[0].target == tree.repository("calc_v1"));
  CHECK(cands[0].feature == tree.repository("calc")->featureModel->findByLineage("calc!Logging")->id);
  auto cf = genCloneFeature(tree, rng);
  REQUIRE(cf);
  CHECK(std::get<CloneFeatureOp>(*cf).targetRepo == "calc_v1");
}

TEST_CASE("dispatch rejects unknown generators") {
  auto tree = calc();
  GeneratorContext ctx{&adapter(), nullptr, nullptr, 0.5};
  Rng rng(1);
  CHECK_THROWS_AS(generate("teleport", tree, ctx, rng), Error);
  bool any = false;
  for (int i = 0; i < 20 && !any; ++i) any = generate("mutAdd", tree, ctx, rng).has_value();
  CHECK(any);
}

TEST_CASE("simulation stops on its termination condition") {
  auto config = presetConfig("growing-system");
  config.seed = 17;
  config.maxIterations = 400;
  config.termination = Termination::parse("repositoryCount >= 2");
  auto donors = loadDonors({dataDir() / "geomlib"}, adapter());
  Simulation sim(config, calc(), std::move(donors), adapter(), makeChecker(config.checker, adapter()));
  HistorySink sink;
  auto summary = sim.run(sink);
  CHECK(computeMetrics(sim.tree()).repositoryCount >= 2);
  if (summary.stoppedBy == "termination") CHECK(summary.iterations < 400);
  CHECK(summary.finalRevision == sim.tree().revision());
  CHECK(summary.committed == summary.finalRevision);
  std::int64_t committed = 0;
  for (const auto& [id, s] : summary.perGenerator) committed += s.committed;
  CHECK(committed == summary.committed);

  // already satisfied before the first iteration
  config.termination = Termination::parse("repositoryCount >= 1");
  Simulation idle(config, calc(), {}, adapter(), makeChecker(config.checker, adapter()));
  auto s2 = idle.run(sink);
  CHECK(s2.iterations == 0);
  CHECK(s2.stoppedBy == "termination");
}

TEST_CASE("a broken initial system is rejected") {
  TempDir dir("broken");
  writeFile(dir.path / "sys" / "a.mini", "fn a() {\n");
  auto config = presetConfig("uniform-operations");
  Simulation sim(config, loadInitialSystem(dir.path / "sys"), {}, adapter(), makeChecker(config.checker, adapter()));
  HistorySink sink;
  try {
    sim.run(sink);
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InvalidInitialSystem);
  }
}
