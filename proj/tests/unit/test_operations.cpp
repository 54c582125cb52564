#include <doctest.h>

#include "testkit.hpp"
#include "varhist/errors.hpp"
#include "varhist/operations.hpp"
#include "varhist/runner.hpp"

using namespace testkit;

namespace {

AssetTree calc() { return loadInitialSystem(dataDir() / "calc"); }

std::vector<std::string> linesOf(const AssetTree& tree, const std::string& path) {
  return materializeLines(*findByPath(tree, path));
}

AssetRef refOf(const AssetTree& tree, const std::string& path) { return makeAssetRef(tree, *findByPath(tree, path)); }

}  // namespace

TEST_CASE("initial system loading") {
  auto tree = calc();
  const auto* repo = tree.repository("calc");
  REQUIRE(repo);
  CHECK(tree.repositories().size() == 1);
  CHECK_FALSE(findByPath(tree, "calc/.features"));
  const auto& model = *repo->featureModel;
  CHECK(model.root().name == "calc");
  CHECK(model.size() == 3);
  const auto* logging = model.findByLineage("calc!Logging");
  REQUIRE(logging);
  CHECK(findByPath(tree, "calc/src/util/log.mini")->mappedFeatures == std::set<FeatureId>{logging->id});
  CHECK_THROWS_AS(loadInitialSystem(dataDir() / "does-not-exist"), Error);

  TempDir dir("badfeatures");
  writeFile(dir.path / "sys" / "a.mini", "fn a() {\n}\n");
  writeFile(dir.path / "sys" / ".features", "Core: missing.mini\n");
  try {
    loadInitialSystem(dir.path / "sys");
    FAIL("expected InvalidInitialSystem");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InvalidInitialSystem);
  }
}

TEST_CASE("line mutations") {
  auto tree = calc();
  const std::string file = "calc/src/util/fmt.mini";
  REQUIRE(linesOf(tree, file).size() == 6);

  SUBCASE("add inserts before the target line") {
    applyMutateAsset(tree, refOf(tree, file), Mutation{Mutation::Kind::AddLine, 1, "  // note"});
    auto lines = linesOf(tree, file);
    CHECK(lines.size() == 7);
    CHECK(lines[0] == "fn pad(text, width) {");
    CHECK(lines[1] == "  // note");
  }
  SUBCASE("replace") {
    applyMutateAsset(tree, refOf(tree, file), Mutation{Mutation::Kind::ReplaceLine, 4, "  return width"});
    CHECK(linesOf(tree, file)[4] == "  return width");
  }
  SUBCASE("delete") {
    auto record = applyMutateAsset(tree, refOf(tree, file), Mutation{Mutation::Kind::DeleteLine, 0, ""});
    CHECK(linesOf(tree, file).size() == 5);
    CHECK(record.kind == "MutateAsset");
    CHECK_FALSE(record.params.contains("text"));
  }
  SUBCASE("bad index and manifests") {
    CHECK_THROWS_AS(applyMutateAsset(tree, refOf(tree, file), Mutation{Mutation::Kind::DeleteLine, 6, ""}), Error);
    try {
      applyMutateAsset(tree, refOf(tree, "calc/project.manifest"), Mutation{Mutation::Kind::DeleteLine, 0, ""});
      FAIL("manifest mutated");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::NotMutable);
    }
  }
}

TEST_CASE("remove feature deletes exclusive assets and the feature") {
  auto tree = calc();
  auto& repo = *tree.repository("calc");
  auto logging = repo.featureModel->findByLineage("calc!Logging")->id;
  auto record = applyRemoveFeature(tree, makeFeatureLPQ(repo, logging));
  CHECK(record.kind == "RemoveFeature");
  REQUIRE(record.subOps.size() == 1);
  CHECK(record.subOps[0].kind == "RemoveAsset");
  CHECK(record.subOps[0].params.at("target") == "0:calc/src/util/log.mini#");
  CHECK_FALSE(findByPath(tree, "calc/src/util/log.mini"));
  CHECK(findByPath(tree, "calc/src/util/fmt.mini"));
  CHECK_FALSE(repo.featureModel->contains(logging));

  try {
    applyRemoveFeature(tree, makeFeatureLPQ(repo, repo.featureModel->root().id));
    FAIL("root removed");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::CannotRemoveRoot);
  }
}

TEST_CASE("removal keeps assets shared with surviving features") {
  auto tree = calc();
  auto& repo = *tree.repository("calc");
  auto logging = repo.featureModel->findByLineage("calc!Logging")->id;
  auto formatting = repo.featureModel->findByLineage("calc!Formatting")->id;
  findByPath(tree, "calc/src/util/log.mini")->mappedFeatures.insert(formatting);
  applyRemoveFeature(tree, makeFeatureLPQ(repo, logging));
  auto* log = findByPath(tree, "calc/src/util/log.mini");
  REQUIRE(log);
  CHECK(log->mappedFeatures == std::set<FeatureId>{formatting});
}

TEST_CASE("clone variant") {
  auto tree = calc();
  auto record = applyCloneVariant(tree, refOf(tree, "calc"), "calc_v1");
  commitRecord(tree, record);
  const auto* a = tree.repository("calc");
  const auto* b = tree.repository("calc_v1");
  REQUIRE(b);
  CHECK(record.opId == "op-0001");
  CHECK(record.revisionBefore == 0);
  CHECK(record.revisionAfter == 1);
  CHECK(tree.revision() == 1);
  REQUIRE(a->children.size() == b->children.size());
  for (std::size_t i = 0; i < a->children.size(); ++i) CHECK(structurallyEqual(*a->children[i], *b->children[i]));
  // clones keep the root feature name and get fresh feature ids
  CHECK(b->featureModel->root().name == "calc");
  CHECK(b->featureModel->findByLineage("calc!Logging")->id != a->featureModel->findByLineage("calc!Logging")->id);
  auto traces = tree.traces.byOp(record.opId);
  CHECK(traces.size() == countDescendants(*a) + 1);
  for (const auto* t : traces) CHECK(t->finalized());
  CHECK(originatedFrom(tree, *a, *b));
  CHECK_FALSE(originatedFrom(tree, *b, *a));
  CHECK(correspondingNode(tree, *findByPath(tree, "calc/src/main.mini"), *b) ==
        findByPath(tree, "calc_v1/src/main.mini"));

  try {
    applyCloneVariant(tree, refOf(tree, "calc"), "calc_v1");
    FAIL("duplicate repository");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DuplicateRepository);
  }
}

TEST_CASE("clone feature copies assets into a related variant") {
  auto tree = calc();
  auto rec = applyCloneVariant(tree, refOf(tree, "calc"), "calc_v1");
  commitRecord(tree, rec);
  auto& v1 = *tree.repository("calc_v1");
  auto fmt = v1.featureModel->findByLineage("calc!Formatting")->id;
  auto del = applyRemoveFeature(tree, makeFeatureLPQ(v1, fmt));
  commitRecord(tree, del);
  REQUIRE_FALSE(findByPath(tree, "calc_v1/src/util/fmt.mini"));

  const auto& source = *tree.repository("calc");
  CloneFeatureOp op;
  op.feature = makeFeatureLPQ(source, source.featureModel->findByLineage("calc!Formatting")->id);
  op.targetRepo = "calc_v1";
  op.targetParent = makeFeatureLPQ(v1, v1.featureModel->root().id);
  auto record = applyCloneFeature(tree, op);
  commitRecord(tree, record);
  CHECK(record.kind == "CloneFeature");
  auto* copy = findByPath(tree, "calc_v1/src/util/fmt.mini");
  REQUIRE(copy);
  CHECK(structurallyEqual(*copy, *findByPath(tree, "calc/src/util/fmt.mini")));
  const auto* cloned = v1.featureModel->findByLineage("calc!Formatting");
  REQUIRE(cloned);
  CHECK(copy->mappedFeatures == std::set<FeatureId>{cloned->id});
  CHECK(tree.traces.byOp(record.opId).size() == countDescendants(*copy) + 1);
}

TEST_CASE("clone feature honours an integration plan and avoids name clashes") {
  auto tree = calc();
  auto rec = applyCloneVariant(tree, refOf(tree, "calc"), "calc_v1");
  commitRecord(tree, rec);
  auto& v1 = *tree.repository("calc_v1");
  auto del = applyRemoveFeature(tree, makeFeatureLPQ(v1, v1.featureModel->findByLineage("calc!Formatting")->id));
  commitRecord(tree, del);
  // an unrelated file of the same name, not connected by any trace
  auto* util = findByPath(tree, "calc_v1/src/util");
  auto stranger = std::make_unique<AssetNode>(AssetKind::File, "fmt.mini");
  tree.insert(*util, util->children.size(), std::move(stranger));

  const auto& source = *tree.repository("calc");
  auto fmtRef = makeAssetRef(tree, *findByPath(tree, "calc/src/util/fmt.mini"));
  CloneFeatureOp op;
  op.feature = makeFeatureLPQ(source, source.featureModel->findByLineage("calc!Formatting")->id);
  op.targetRepo = "calc_v1";
  op.targetParent = makeFeatureLPQ(v1, v1.featureModel->root().id);
  op.plan.indices[fmtRef.str()] = 0;
  applyCloneFeature(tree, op);
  CHECK(util->children[0]->name == "fmt_clone1.mini");
  CHECK(util->children.back()->name == "fmt.mini");
  CHECK(uniqueCloneName(*util, "fmt.mini") == "fmt_clone2.mini");
  CHECK(uniqueCloneName(*util, "new.mini") == "new.mini");
  CHECK(uniqueCloneName(*util, "Makefile") == "Makefile");
}

TEST_CASE("transactions roll back on checker failure") {
  auto tree = calc();
  MinilangAdapter adapter;
  BundledChecker checker(adapter);
  OperationEnv env{&adapter, nullptr};
  auto before = materialize(tree);
  // deleting the opening line of pad() unbalances the braces
  auto result = runInTransaction(tree, MutateOp{refOf(tree, "calc/src/util/fmt.mini"), {Mutation::Kind::DeleteLine, 0, ""}},
                                 env, checker, 1);
  REQUIRE(std::holds_alternative<RolledBack>(result));
  CHECK(std::get<RolledBack>(result).reason.find("fmt.mini") != std::string::npos);
  CHECK(materialize(tree) == before);
  CHECK(tree.revision() == 0);

  auto ok = runInTransaction(tree, MutateOp{refOf(tree, "calc/src/util/fmt.mini"), {Mutation::Kind::DeleteLine, 2, ""}},
                             env, checker, 1);
  REQUIRE(std::holds_alternative<Committed>(ok));
  CHECK(std::get<Committed>(ok).record.iteration == 1);
  CHECK(tree.revision() == 1);

  // failures raised by the operation itself also roll back
  auto bad = runInTransaction(tree, MutateOp{refOf(tree, "calc/src/util/fmt.mini"), {Mutation::Kind::DeleteLine, 99, ""}},
                              env, checker, 2);
  CHECK(std::holds_alternative<RolledBack>(bad));
  CHECK(tree.revision() == 1);
}

TEST_CASE("replaying a record reproduces the change") {
  auto tree = calc();
  auto copy = tree;
  auto record = applyCloneVariant(tree, refOf(tree, "calc"), "calc_v1");
  commitRecord(tree, record);
  auto json = toJson(record);
  replayRecord(copy, recordFromJson(json));
  CHECK(materialize(copy) == materialize(tree));
  CHECK(copy.revision() == 1);
  CHECK(copy.traces.size() == tree.traces.size());
  // a record for another revision diverges
  CHECK_THROWS_AS(replayRecord(copy, record), Error);
}
