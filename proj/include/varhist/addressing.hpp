#pragma once

#include <string>
#include <utility>
#include <vector>

#include "varhist/model.hpp"
#include "varhist/refs.hpp"

namespace varhist {

/// Mints the revision-bound address of `node`.  Throws NotInTree for nodes
/// that are not reachable from the tree's root.
AssetRef makeAssetRef(const AssetTree& tree, const AssetNode& node);

/// Throws StaleRef when `ref` was minted in another revision and DanglingRef
/// when its path or an index does not exist.
AssetNode& resolveAssetRef(const AssetTree& tree, const AssetRef& ref);

/// Shortest suffix of the feature's name path that matches exactly one
/// feature of the model.
std::vector<std::string> leastPartiallyQualified(const FeatureModel& model, FeatureId feature);
FeatureRef makeFeatureLPQ(const AssetNode& repository, FeatureId feature);

/// Unique feature whose name path ends with `lpq`; UnknownFeature when none
/// or several match.
FeatureId resolveLPQ(const FeatureModel& model, const std::vector<std::string>& lpq);

struct ResolvedFeature {
  AssetNode* repository = nullptr;
  FeatureId feature = 0;
};

ResolvedFeature resolveFeatureRef(const AssetTree& tree, const FeatureRef& ref);

/// Path of a filesystem asset below the root, split on '/'.
AssetNode* findByPath(const AssetTree& tree, std::string_view path);

}  // namespace varhist
