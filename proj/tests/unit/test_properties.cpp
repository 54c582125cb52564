#include <doctest.h>

#include "testkit.hpp"
#include "varhist/errors.hpp"
#include "varhist/history.hpp"
#include "varhist/operations.hpp"

using namespace testkit;

namespace {

constexpr int kCases = 200;

AssetTree randomWorld(std::uint64_t seed) {
  Rng rng(seed);
  AssetTree tree;
  auto repos = 1 + rng.below(3);
  for (std::uint64_t i = 0; i < repos; ++i) addRandomRepository(tree, rng, "r" + std::to_string(i));
  return tree;
}

// sibling names from a small pool so that deeper names repeat across branches
void collidingFeatures(Rng& rng, AssetTree& tree, Feature& parent, int depth) {
  std::vector<std::string> pool = {"A", "B", "C", "D"};
  auto n = depth == 0 ? 1 + rng.below(4) : rng.below(3);
  for (std::uint64_t i = 0; i < n && !pool.empty(); ++i) {
    auto pick = rng.below(pool.size());
    Feature f;
    f.id = tree.newFeatureId();
    f.name = pool[pick];
    f.lineage = "m!" + std::to_string(f.id);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
    if (depth < 3) collidingFeatures(rng, tree, f, depth + 1);
    parent.children.push_back(std::move(f));
  }
}

}  // namespace

TEST_CASE("property: every node's asset ref resolves back to it") {
  for (int c = 0; c < kCases; ++c) {
    auto tree = randomWorld(1000 + c);
    forEachNode(tree.root(), [&](const AssetNode& n) {
      if (n.kind == AssetKind::Root) return;
      auto ref = makeAssetRef(tree, n);
      auto text = ref.str();
      CHECK(AssetRef::parse(text) == ref);
      CHECK(&resolveAssetRef(tree, AssetRef::parse(text)) == &n);
    });
  }
}

TEST_CASE("property: least partially qualified names are unique and minimal") {
  for (int c = 0; c < kCases; ++c) {
    Rng rng(2000 + c);
    AssetTree tree;
    Feature root;
    root.id = tree.newFeatureId();
    root.name = "m";
    collidingFeatures(rng, tree, root, 0);
    FeatureModel model(std::move(root));
    for (const auto* f : model.all()) {
      auto lpq = leastPartiallyQualified(model, f->id);
      CHECK(resolveLPQ(model, lpq) == f->id);
      if (lpq.size() > 1 && f->id != model.root().id) {
        std::vector<std::string> shorter(lpq.begin() + 1, lpq.end());
        bool ambiguous = false;
        try {
          ambiguous = resolveLPQ(model, shorter) != f->id;
        } catch (const Error&) {
          ambiguous = true;
        }
        CHECK(ambiguous);
      }
    }
  }
}

TEST_CASE("property: structural serialization round trips") {
  for (int c = 0; c < kCases; ++c) {
    auto tree = randomWorld(3000 + c);
    auto j = treeToJson(tree);
    auto back = treeFromJson(j);
    CHECK(sameStructure(tree, back));
    CHECK(treeToJson(back) == j);
    CHECK(materialize(back) == materialize(tree));
  }
}

TEST_CASE("property: snapshots written to disk read back unchanged") {
  TempDir dir("snapprop");
  for (int c = 0; c < 60; ++c) {
    auto tree = randomWorld(4000 + c);
    auto target = dir.path / std::to_string(c);
    writeSnapshot(tree, target);
    CHECK(readSnapshot(target) == materialize(tree));
    CHECK(materialize(parseSnapshot(target)) == materialize(tree));
  }
}

TEST_CASE("property: deep copies are structurally equal and independent") {
  for (int c = 0; c < kCases; ++c) {
    auto tree = randomWorld(5000 + c);
    auto copy = tree;
    CHECK(sameStructure(tree, copy));
    for (std::size_t i = 0; i < tree.root().children.size(); ++i) {
      auto dup = tree.root().children[i]->deepCopy();
      CHECK(structurallyEqual(*dup, *tree.root().children[i]));
    }
    if (!copy.repositories().empty()) {
      auto& repo = *copy.root().children[0];
      copy.detach(*repo.children[0]);
      CHECK_FALSE(sameStructure(tree, copy));
    }
  }
}

TEST_CASE("property: random mutation sequences replay identically") {
  for (int c = 0; c < 100; ++c) {
    auto tree = randomWorld(6000 + c);
    auto initial = tree;
    Rng rng(7000 + c);
    std::vector<json> ledger;
    for (int step = 0; step < 15; ++step) {
      std::vector<const AssetNode*> files;
      forEachNode(tree.root(), [&](const AssetNode& n) {
        if (n.kind == AssetKind::File && lineCount(n) > 0) files.push_back(&n);
      });
      if (files.empty()) break;
      const auto* file = files[rng.below(files.size())];
      auto count = lineCount(*file);
      Mutation m;
      auto pick = rng.below(3);
      if (pick == 0) {
        m.kind = Mutation::Kind::AddLine;
        m.targetLine = rng.below(count);
        m.donorLine = "n" + std::to_string(rng.below(5));
      } else {
        m.kind = pick == 1 ? Mutation::Kind::ReplaceLine : Mutation::Kind::DeleteLine;
        m.targetLine = rng.below(count);
        if (pick == 1) m.donorLine = "r" + std::to_string(rng.below(5));
      }
      auto record = applyMutateAsset(tree, makeAssetRef(tree, *file), m);
      commitRecord(tree, record);
      ledger.push_back(toJson(record));
    }
    for (const auto& j : ledger) replayRecord(initial, recordFromJson(json::parse(j.dump())));
    CHECK(initial.revision() == tree.revision());
    CHECK(materialize(initial) == materialize(tree));
    CHECK(sameStructure(initial, tree));
  }
}

TEST_CASE("property: bounded draws stay in range") {
  Rng rng(99);
  for (int c = 0; c < 5000; ++c) {
    auto n = 1 + rng.below(1000);
    CHECK(rng.below(n) < n);
  }
}
