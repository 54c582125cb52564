#pragma once

#include <algorithm>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "varhist/addressing.hpp"
#include "varhist/model.hpp"
#include "varhist/rng.hpp"

namespace testkit {

using namespace varhist;
namespace fs = std::filesystem;

inline fs::path dataDir() { return fs::path(VARHIST_DATA); }

/// Fresh scratch directory, removed by the destructor.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("varhist-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

inline void writeFile(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

inline std::string readFile(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

/// Relative path -> bytes for every regular file below `dir`.
inline std::map<std::string, std::string> dirContents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    auto rel = fs::relative(e.path(), dir).generic_string();
    out[rel] = e.is_regular_file() ? readFile(e.path()) : std::string("<dir>");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random worlds

inline std::unique_ptr<AssetNode> randomLines(Rng& rng, AssetKind kind, const std::string& name, int depth) {
  auto node = std::make_unique<AssetNode>(kind, name);
  auto n = rng.below(5);
  for (std::uint64_t i = 0; i < n; ++i) {
    if (depth < 2 && rng.chance(0.2)) {
      auto block = randomLines(rng, AssetKind::Block, "", depth + 1);
      block->parent = node.get();
      node->children.push_back(std::move(block));
    } else {
      auto line = AssetNode::makeLine("l" + std::to_string(rng.below(7)));
      line->parent = node.get();
      node->children.push_back(std::move(line));
    }
  }
  return node;
}

inline void randomFolder(Rng& rng, AssetNode& folder, int depth) {
  auto n = 1 + rng.below(4);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::unique_ptr<AssetNode> child;
    if (depth < 2 && rng.chance(0.3)) {
      child = std::make_unique<AssetNode>(AssetKind::Folder, "d" + std::to_string(i));
      randomFolder(rng, *child, depth + 1);
    } else {
      child = randomLines(rng, AssetKind::File, "f" + std::to_string(i) + ".txt", 0);
    }
    child->parent = &folder;
    folder.children.push_back(std::move(child));
  }
}

inline void randomFeatures(Rng& rng, AssetTree& tree, Feature& parent, const std::string& prefix, int depth,
                           int& counter) {
  auto n = depth == 0 ? 1 + rng.below(4) : rng.below(3);
  for (std::uint64_t i = 0; i < n; ++i) {
    Feature f;
    f.id = tree.newFeatureId();
    f.name = "F" + std::to_string(counter++);
    f.lineage = prefix + "!" + f.name;
    if (depth < 2) randomFeatures(rng, tree, f, prefix, depth + 1, counter);
    parent.children.push_back(std::move(f));
  }
}

/// Adds a random repository with a random feature model and mappings.
inline AssetNode& addRandomRepository(AssetTree& tree, Rng& rng, const std::string& name) {
  auto repo = std::make_unique<AssetNode>(AssetKind::Repository, name);
  randomFolder(rng, *repo, 0);
  Feature root;
  root.id = tree.newFeatureId();
  root.name = name;
  int counter = 0;
  randomFeatures(rng, tree, root, name, 0, counter);
  repo->featureModel = FeatureModel(std::move(root));
  auto& inserted = tree.insert(tree.root(), tree.root().children.size(), std::move(repo));
  auto features = inserted.featureModel->all();
  forEachNode(inserted, [&](AssetNode& n) {
    if (&n == &inserted || !rng.chance(0.3)) return;
    auto k = 1 + rng.below(2);
    for (std::uint64_t i = 0; i < k; ++i) n.mappedFeatures.insert(features[rng.below(features.size())]->id);
  });
  return inserted;
}

// ---------------------------------------------------------------------------
// Brute-force oracles

inline bool featureWithin(const FeatureModel& model, FeatureId f, FeatureId ancestor) {
  for (auto cur = f;;) {
    if (cur == ancestor) return true;
    const auto* parent = model.parentOf(cur);
    if (!parent) return false;
    cur = parent->id;
  }
}

inline std::set<AssetRef> bruteExclusiveAssets(const AssetTree& tree, const AssetNode& repo, FeatureId feature) {
  std::set<AssetRef> out;
  forEachNode(repo, [&](const AssetNode& n) {
    if (n.mappedFeatures.empty()) return;
    bool all = std::all_of(n.mappedFeatures.begin(), n.mappedFeatures.end(),
                           [&](FeatureId id) { return featureWithin(*repo.featureModel, id, feature); });
    if (all) out.insert(makeAssetRef(tree, n));
  });
  return out;
}

/// Fixed-point reachability over an adjacency map.
inline std::set<std::string> bruteClosure(const std::map<std::string, std::set<std::string>>& edges,
                                          const std::set<std::string>& start) {
  auto reached = start;
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto& from : std::vector<std::string>(reached.begin(), reached.end())) {
      auto it = edges.find(from);
      if (it == edges.end()) continue;
      for (const auto& to : it->second) grew = reached.insert(to).second || grew;
    }
  }
  return reached;
}

}  // namespace testkit
