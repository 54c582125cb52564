#include "varhist/addressing.hpp"

#include <algorithm>

#include "varhist/errors.hpp"

namespace varhist {

namespace {

std::vector<std::string> splitPath(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= path.size()) {
    auto pos = path.find('/', start);
    auto part = path.substr(start, pos == std::string_view::npos ? pos : pos - start);
    if (!part.empty()) parts.emplace_back(part);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

bool endsWith(const std::vector<std::string>& path, const std::vector<std::string>& suffix) {
  if (suffix.size() > path.size()) return false;
  return std::equal(suffix.rbegin(), suffix.rend(), path.rbegin());
}

}  // namespace

AssetNode* findByPath(const AssetTree& tree, std::string_view path) {
  auto* node = const_cast<AssetNode*>(&tree.root());
  if (path == "/") return node;
  for (const auto& part : splitPath(path)) {
    node = node->childNamed(part);
    if (!node) return nullptr;
  }
  return node;
}

AssetRef makeAssetRef(const AssetTree& tree, const AssetNode& node) {
  if (!tree.contains(node)) throw Error(Errc::NotInTree, "node is not part of the tree");
  const AssetNode* top = &node;
  while (top->parent) top = top->parent;
  if (top != &tree.root()) throw Error(Errc::NotInTree, "node is detached from the root");

  AssetRef ref;
  ref.revision = tree.revision();
  ref.path = filesystemPath(node);
  const AssetNode* anchor = filesystemAnchor(node);
  for (const AssetNode* cur = &node; cur != anchor; cur = cur->parent) {
    ref.indexPath.push_back(cur->indexInParent());
  }
  std::reverse(ref.indexPath.begin(), ref.indexPath.end());
  return ref;
}

AssetNode& resolveAssetRef(const AssetTree& tree, const AssetRef& ref) {
  if (ref.revision != tree.revision()) {
    throw Error(Errc::StaleRef, ref.str() + " resolved against revision " +
                                    std::to_string(tree.revision()));
  }
  auto* node = findByPath(tree, ref.path);
  if (!node) throw Error(Errc::DanglingRef, "no filesystem asset at '" + ref.path + "'");
  for (auto index : ref.indexPath) {
    if (index >= node->children.size() || isFilesystemKind(node->children[index]->kind)) {
      throw Error(Errc::DanglingRef, "index path of " + ref.str() + " leaves the tree");
    }
    node = node->children[index].get();
  }
  return *node;
}

FeatureId resolveLPQ(const FeatureModel& model, const std::vector<std::string>& lpq) {
  if (lpq.empty()) throw Error(Errc::UnknownFeature, "empty feature path");
  std::vector<FeatureId> matches;
  std::vector<FeatureId> exact;
  for (const auto* feature : model.all()) {
    auto path = model.namePath(feature->id);
    if (endsWith(path, lpq)) {
      matches.push_back(feature->id);
      if (path.size() == lpq.size()) exact.push_back(feature->id);
    }
  }
  if (matches.size() == 1) return matches.front();
  if (exact.size() == 1) return exact.front();
  std::string joined;
  for (const auto& s : lpq) joined += (joined.empty() ? "" : "/") + s;
  throw Error(Errc::UnknownFeature, (matches.empty() ? "no feature matches '" : "ambiguous feature '") +
                                        joined + "'");
}

std::vector<std::string> leastPartiallyQualified(const FeatureModel& model, FeatureId feature) {
  auto path = model.namePath(feature);
  if (path.empty()) throw Error(Errc::UnknownFeature, "feature not in model");
  for (std::size_t k = 1; k <= path.size(); ++k) {
    std::vector<std::string> suffix(path.end() - static_cast<std::ptrdiff_t>(k), path.end());
    try {
      if (resolveLPQ(model, suffix) == feature) return suffix;
    } catch (const Error&) {
      // ambiguous at this length
    }
  }
  return path;
}

FeatureRef makeFeatureLPQ(const AssetNode& repository, FeatureId feature) {
  if (!repository.featureModel) throw Error(Errc::UnknownFeature, "repository has no feature model");
  return FeatureRef{filesystemPath(repository),
                    leastPartiallyQualified(*repository.featureModel, feature)};
}

ResolvedFeature resolveFeatureRef(const AssetTree& tree, const FeatureRef& ref) {
  auto* repo = findByPath(tree, ref.repoPath);
  if (!repo || repo->kind != AssetKind::Repository || !repo->featureModel) {
    throw Error(Errc::UnknownFeature, "no feature model at '" + ref.repoPath + "'");
  }
  return ResolvedFeature{repo, resolveLPQ(*repo->featureModel, ref.lpq)};
}

}  // namespace varhist
