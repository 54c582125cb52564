#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "varhist/checker.hpp"
#include "varhist/donor.hpp"
#include "varhist/model.hpp"
#include "varhist/record.hpp"

namespace varhist {

struct RemoveFeatureOp {
  FeatureRef feature;
};

struct MutateOp {
  AssetRef target;
  Mutation mutation;
};

struct TransplantOp {
  std::string donorId;
  std::string testId;
  /// Closing line of the method-level block that receives the organ.
  AssetRef insertionPoint;
};

struct CloneVariantOp {
  AssetRef source;
  std::string newName;
};

/// Explicit child index per novel asset, keyed by the source asset's ref.
/// Assets without an entry go after the last traced predecessor sibling,
/// else last.
struct IntegrationPlan {
  std::map<std::string, std::size_t> indices;
};

struct CloneFeatureOp {
  FeatureRef feature;
  std::string targetRepo;
  FeatureRef targetParent;
  IntegrationPlan plan;
};

using CandidateOperation = std::variant<RemoveFeatureOp, MutateOp, TransplantOp, CloneVariantOp, CloneFeatureOp>;

std::string_view operationKind(const CandidateOperation& op);

/// What operations may consult besides the tree.
struct OperationEnv {
  const LanguageAdapter* adapter = nullptr;
  const std::map<std::string, DonorProject>* donors = nullptr;
};

/// Id of the operation that would produce the next revision.
std::string nextOpId(const AssetTree& tree);

// Each apply* mutates `tree` in place and returns the record; the revision is
// left untouched (see commitRecord).
OperationRecord applyRemoveFeature(AssetTree& tree, const FeatureRef& feature);
OperationRecord applyMutateAsset(AssetTree& tree, const AssetRef& target, const Mutation& m);
OperationRecord applyTransplant(AssetTree& tree, const TransplantOp& op, const OperationEnv& env);
OperationRecord applyCloneVariant(AssetTree& tree, const AssetRef& source, const std::string& newName);
/// `adapter` reads and writes manifests; the bundled one when null.
OperationRecord applyCloneFeature(AssetTree& tree, const CloneFeatureOp& op,
                                  const LanguageAdapter* adapter = nullptr);
OperationRecord applyOperation(AssetTree& tree, const CandidateOperation& op, const OperationEnv& env);

/// Advances the revision, mints pending trace targets and stamps the record.
void commitRecord(AssetTree& tree, OperationRecord& record);

/// Replays one committed record on the tree at its revisionBefore.
void replayRecord(AssetTree& tree, const OperationRecord& record);

struct Committed {
  OperationRecord record;
};
struct RolledBack {
  std::string reason;
};
using TransactionResult = std::variant<Committed, RolledBack>;

/// Applies `op` to a copy of `tree` and swaps the copy in only if the
/// checker accepts it.  On rollback `tree` is untouched.
TransactionResult runInTransaction(AssetTree& tree, const CandidateOperation& op, const OperationEnv& env,
                                   const CompilabilityChecker& checker, std::int64_t iteration = -1);

/// Nodes removed by RemoveFeature: exclusive nodes none of whose
/// descendants maps to a surviving feature, topmost only, in pre-order.
std::vector<AssetNode*> removalSet(const AssetNode& repo, FeatureId feature);

/// `name`, or `stem_cloneN.ext` with the smallest free N >= 1.
std::string uniqueCloneName(const AssetNode& parent, const std::string& name);

}  // namespace varhist
