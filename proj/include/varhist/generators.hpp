#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "varhist/adapter.hpp"
#include "varhist/donor.hpp"
#include "varhist/operations.hpp"
#include "varhist/rng.hpp"

namespace varhist {

struct GeneratorContext {
  const LanguageAdapter* adapter = nullptr;
  const std::map<std::string, DonorProject>* donors = nullptr;
  /// Tests already selected once; they are never offered again.
  std::set<std::string>* consumed = nullptr;
  double sensibilityDiscardProb = 0.5;
};

std::optional<CandidateOperation> genRemoveFeature(const AssetTree& tree, Rng& rng);
std::optional<CandidateOperation> genMutate(Mutation::Kind kind, const AssetTree& tree, Rng& rng,
                                            double discardProb);
std::optional<CandidateOperation> genTransplant(const AssetTree& tree, const GeneratorContext& ctx, Rng& rng);
std::optional<CandidateOperation> genCloneVariant(const AssetTree& tree, Rng& rng);
std::optional<CandidateOperation> genCloneFeature(const AssetTree& tree, Rng& rng);

/// Dispatch by generator id (removeFeature, mutAdd, mutReplace, mutDelete,
/// transplant, cloneVariant, cloneFeature).
std::optional<CandidateOperation> generate(std::string_view id, const AssetTree& tree, const GeneratorContext& ctx,
                                           Rng& rng);

/// Non-root features of every repository, repository order then pre-order.
std::vector<std::pair<const AssetNode*, FeatureId>> removableFeatures(const AssetTree& tree);
/// Files that mutations may target (manifests excluded), in tree order.
std::vector<const AssetNode*> mutableFiles(const AssetTree& tree);
/// Lines of the mutable files in the same folder as `file`, `file` included.
std::vector<std::string> folderLinePool(const AssetNode& file);
/// True when the mutation would not change anything worth recording.
bool ineffectiveMutation(const Mutation& m, const std::string& currentLine);

/// Unconsumed modular tests, donor id order then scan order.
std::vector<const TestCandidate*> availableTests(const std::map<std::string, DonorProject>& donors,
                                                 const std::set<std::string>& consumed);

/// `<source>_vN` with the smallest free N >= 1.
std::string nextVariantName(const AssetTree& tree, const std::string& source);

struct CloneFeatureCandidate {
  const AssetNode* source = nullptr;
  const AssetNode* target = nullptr;
  FeatureId feature = 0;

  bool operator==(const CloneFeatureCandidate&) const = default;
};

/// Triples where `target` originated from `source` through clone traces and
/// no feature of the subtree exists (by lineage) in `target`.
std::vector<CloneFeatureCandidate> cloneFeatureCandidates(const AssetTree& tree);

}  // namespace varhist
