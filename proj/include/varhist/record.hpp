#pragma once

#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "varhist/model.hpp"

namespace varhist {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Fully parameterized description of one applied change.  Group records
/// (high-level operations and their steps) carry sub-operations; primitive
/// records are directly executable.
struct OperationRecord {
  std::string opId;
  std::string kind;
  json params = json::object();
  std::vector<OperationRecord> subOps;
  Revision revisionBefore = -1;
  Revision revisionAfter = -1;
  std::int64_t iteration = -1;

  /// Number of records in this subtree, itself included.
  std::size_t size() const;
};

json toJson(const OperationRecord& record);
OperationRecord recordFromJson(const json& j);

/// Hierarchical dump of an element introduced from outside the tree.  Line
/// nodes are plain strings; every other node is {kind, name, children}.
json dumpNode(const AssetNode& node);
std::unique_ptr<AssetNode> nodeFromDump(const json& dump);

/// Line-level change of a file or block.
struct Mutation {
  enum class Kind { AddLine, ReplaceLine, DeleteLine };
  Kind kind = Kind::DeleteLine;
  std::size_t targetLine = 0;
  std::string donorLine;
};

std::string_view to_string(Mutation::Kind kind);
/// Applies `m` to the flattened lines of a file or block.  Manifests and
/// assets without lines raise NotMutable; a bad line index BadIndex.
void applyMutation(AssetTree& tree, AssetNode& target, const Mutation& m);
Mutation::Kind mutationKindFromString(std::string_view text);

namespace primitive {
inline constexpr std::string_view AddAsset = "AddAsset";
inline constexpr std::string_view RemoveAsset = "RemoveAsset";
inline constexpr std::string_view CloneAsset = "CloneAsset";
inline constexpr std::string_view MutateAsset = "MutateAsset";
inline constexpr std::string_view AddFeature = "AddFeature";
inline constexpr std::string_view MapAsset = "MapAsset";
inline constexpr std::string_view SetFileContent = "SetFileContent";
inline constexpr std::string_view IncludeSlice = "IncludeSlice";
}  // namespace primitive

bool isPrimitiveKind(std::string_view kind);

struct PrimitiveResult {
  AssetNode* node = nullptr;
  FeatureId feature = 0;
};

/// Removes `feature` with its descendants from the repository's model and
/// erases every mapping to them.
void deleteFeature(AssetTree& tree, AssetNode& repo, FeatureId feature);

/// Executes one primitive against the working tree.  Clone traces are
/// attributed to `originOp`.
PrimitiveResult executePrimitive(AssetTree& tree, const OperationRecord& record,
                                 const std::string& originOp);
/// Executes a record: primitives directly, groups by their sub-operations.
void executeRecord(AssetTree& tree, const OperationRecord& record, const std::string& originOp);

/// Records primitives while applying them, so that what is recorded is
/// exactly what ran.
class OpContext {
 public:
  OpContext(AssetTree& tree, std::string opId);

  AssetTree& tree() { return tree_; }
  const std::string& opId() const { return opId_; }

  AssetNode& addAsset(AssetNode& parent, std::size_t index, const AssetNode& prototype);
  void removeAsset(AssetNode& node);
  /// Copies `source` below `parent`.  Repository clones carry their feature
  /// model and mappings; other clones start unmapped.  `shallow` copies the
  /// node without children.
  AssetNode& cloneAsset(const AssetNode& source, AssetNode& parent, std::size_t index,
                        const std::string& name, bool shallow = false);
  void mutate(AssetNode& target, const Mutation& mutation);
  FeatureId addFeature(AssetNode& repo, FeatureId parent, const std::string& name,
                       const std::string& lineage);
  void mapAsset(AssetNode& asset, FeatureId feature);
  void setFileContent(AssetNode& file, const std::vector<std::string>& lines);
  void includeSlice(const std::string& donor, const std::string& repo,
                    const std::set<std::string>& files);

  void beginGroup(std::string kind, json params = json::object());
  void endGroup();

  std::vector<OperationRecord> takeSubOps();

 private:
  PrimitiveResult emit(std::string_view kind, json params);

  AssetTree& tree_;
  std::string opId_;
  std::vector<OperationRecord> stack_;
};

}  // namespace varhist
