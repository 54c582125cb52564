#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "varhist/refs.hpp"

namespace varhist {

using NodeId = std::uint64_t;
using FeatureId = std::uint64_t;

enum class AssetKind { Root, Repository, Folder, File, Block, Line };

std::string_view to_string(AssetKind kind);
AssetKind assetKindFromString(std::string_view text);

/// Repositories, folders and files are addressed by path; blocks and lines by
/// index path below their enclosing filesystem asset.
constexpr bool isFilesystemKind(AssetKind kind) {
  return kind == AssetKind::Root || kind == AssetKind::Repository || kind == AssetKind::Folder ||
         kind == AssetKind::File;
}

// ---------------------------------------------------------------------------
// Feature models
// ---------------------------------------------------------------------------

struct Feature {
  FeatureId id = 0;
  std::string name;
  /// Identity of the feature across repositories.  Copies made by cloning
  /// keep the lineage of their original.
  std::string lineage;
  std::vector<Feature> children;
};

bool structurallyEqual(const Feature& a, const Feature& b);

class FeatureModel {
 public:
  FeatureModel() = default;
  explicit FeatureModel(Feature root) : root_(std::move(root)) {}

  Feature& root() { return root_; }
  const Feature& root() const { return root_; }

  const Feature* find(FeatureId id) const;
  Feature* find(FeatureId id);
  const Feature* parentOf(FeatureId id) const;
  const Feature* findByLineage(std::string_view lineage) const;

  /// Names from the root feature down to `id`.
  std::vector<std::string> namePath(FeatureId id) const;
  /// `id` and all of its descendants, pre-order.
  std::vector<FeatureId> subtree(FeatureId id) const;
  /// Every feature including the root, pre-order.
  std::vector<const Feature*> all() const;
  std::size_t size() const { return all().size(); }
  bool contains(FeatureId id) const { return find(id) != nullptr; }

  /// Sibling names must stay unique; a clash raises AlreadyPresent.
  Feature& addChild(FeatureId parent, Feature child);
  void remove(FeatureId id);

 private:
  Feature root_;
};

// ---------------------------------------------------------------------------
// Asset tree
// ---------------------------------------------------------------------------

/// One node of the asset tree.  Structural edits go through AssetTree so
/// that the id index and parent links stay consistent.
struct AssetNode {
  AssetNode(AssetKind k, std::string n) : kind(k), name(std::move(n)) {}

  static std::unique_ptr<AssetNode> makeLine(std::string text);

  AssetKind kind;
  std::string name;
  /// Content of a Line node; unused for other kinds.
  std::string text;
  std::vector<std::unique_ptr<AssetNode>> children;
  AssetNode* parent = nullptr;
  NodeId id = 0;
  std::optional<FeatureModel> featureModel;
  std::set<FeatureId> mappedFeatures;

  /// Copies kind, name, text, model, mappings and children; ids are kept.
  std::unique_ptr<AssetNode> deepCopy() const;
  std::size_t indexInParent() const;
  AssetNode* childNamed(std::string_view childName) const;
};

void forEachNode(const AssetNode& node, const std::function<void(const AssetNode&)>& fn);
void forEachNode(AssetNode& node, const std::function<void(AssetNode&)>& fn);

std::size_t countDescendants(const AssetNode& node);
/// Content lines of a file or block, flattening nested blocks in child order.
std::vector<std::string> materializeLines(const AssetNode& node);
std::vector<AssetNode*> lineNodes(AssetNode& node);
std::size_t lineCount(const AssetNode& node);
/// Compares kind, name, line text and child order, recursively.
bool structurallyEqual(const AssetNode& a, const AssetNode& b);

AssetNode* repositoryOf(const AssetNode& node);
/// The node itself when it is a filesystem asset, else its closest
/// filesystem ancestor.
const AssetNode* filesystemAnchor(const AssetNode& node);
/// Slash-joined names below the root; "/" for the root.
std::string filesystemPath(const AssetNode& node);
/// Path relative to the enclosing repository ("" for the repository).
std::string repositoryRelativePath(const AssetNode& node);

// ---------------------------------------------------------------------------
// Clone traces
// ---------------------------------------------------------------------------

struct CloneTrace {
  NodeId sourceNode = 0;
  NodeId targetNode = 0;
  AssetRef source;
  /// Left empty while the producing operation runs and minted against the
  /// committed post-state.
  AssetRef target;
  std::string originOp;

  bool finalized() const { return !target.path.empty(); }
};

class TraceDb {
 public:
  const CloneTrace& add(CloneTrace trace);

  const std::vector<CloneTrace>& all() const { return traces_; }
  std::size_t size() const { return traces_.size(); }

  std::vector<const CloneTrace*> fromNode(NodeId node) const;
  std::vector<const CloneTrace*> toNode(NodeId node) const;
  std::vector<const CloneTrace*> bySource(const AssetRef& ref) const;
  std::vector<const CloneTrace*> byTarget(const AssetRef& ref) const;
  std::vector<const CloneTrace*> byOp(std::string_view opId) const;

  /// Records the revision from which `node` no longer exists.
  void markVanished(NodeId node, Revision revision);
  std::optional<Revision> vanishedAt(NodeId node) const;
  bool hasTraces(NodeId node) const;
  /// Traces leaving `node` whose both endpoints exist at `revision`.
  std::vector<const CloneTrace*> tracesFrom(NodeId node, Revision revision) const;

  std::vector<CloneTrace>& mutableTraces() { return traces_; }

 private:
  bool aliveAt(NodeId node, Revision created, Revision revision) const;

  std::vector<CloneTrace> traces_;
  std::multimap<NodeId, std::size_t> bySource_;
  std::multimap<NodeId, std::size_t> byTarget_;
  std::map<NodeId, Revision> vanished_;
};

/// Per-donor inclusion state kept inside the world so that transactions roll
/// it back together with the tree.
struct DonorState {
  /// repository name -> donor files (relative to the donor source root)
  std::map<std::string, std::set<std::string>> includedIn;
};

/// The mutable world of a generation run: the asset tree below a synthetic
/// root, clone traces and donor inclusion state.
class AssetTree {
 public:
  AssetTree();
  AssetTree(const AssetTree& other);
  AssetTree& operator=(const AssetTree& other);
  AssetTree(AssetTree&&) noexcept = default;
  AssetTree& operator=(AssetTree&&) noexcept = default;

  AssetNode& root() { return *root_; }
  const AssetNode& root() const { return *root_; }

  Revision revision() const { return revision_; }
  void setRevision(Revision revision) { revision_ = revision; }

  /// Inserts `subtree` as child `index` of `parent`, assigning fresh ids to
  /// every node of the subtree.
  AssetNode& insert(AssetNode& parent, std::size_t index, std::unique_ptr<AssetNode> subtree);
  std::unique_ptr<AssetNode> detach(AssetNode& node);

  AssetNode* find(NodeId id) const;
  bool contains(const AssetNode& node) const;

  std::vector<AssetNode*> repositories() const;
  AssetNode* repository(std::string_view name) const;

  FeatureId newFeatureId() { return nextFeatureId_++; }
  /// Gives fresh ids to every feature of `feature`'s subtree.
  void renumberFeatures(Feature& feature);

  /// Mints target refs of traces recorded by the operation that just
  /// committed (revision must already be advanced).
  void finalizeTraces();

  TraceDb traces;
  std::map<std::string, DonorState> donors;

 private:
  void indexSubtree(AssetNode& node, bool assignIds);
  void unindexSubtree(const AssetNode& node);
  void rebuildIndex();

  std::unique_ptr<AssetNode> root_;
  std::unordered_map<NodeId, AssetNode*> index_;
  Revision revision_ = 0;
  NodeId nextNodeId_ = 1;
  FeatureId nextFeatureId_ = 1;
};

// ---------------------------------------------------------------------------
// Queries over the world
// ---------------------------------------------------------------------------

/// Nodes of `repo` whose mapped features are non-empty and all lie in the
/// subtree of `feature`.
std::vector<AssetNode*> exclusiveAssetNodes(const AssetNode& repo, FeatureId feature);
std::set<AssetRef> featureExclusiveAssets(const AssetTree& tree, const FeatureRef& feature);

/// Resolves both refs in the current revision and appends a trace.
const CloneTrace& recordCloneTrace(AssetTree& tree, const AssetRef& source, const AssetRef& target,
                                   const std::string& opId);
/// Appends a pending trace between two live nodes (target ref minted on
/// commit).
void recordPendingTrace(AssetTree& tree, const AssetNode& source, const AssetNode& target,
                        const std::string& opId);

/// True when a chain of repository-level traces leads from `source` to
/// `target`.
bool originatedFrom(const AssetTree& tree, const AssetNode& source, const AssetNode& target);
bool repositoriesRelated(const AssetTree& tree, const AssetNode& a, const AssetNode& b);

/// The live node in `targetRepo` connected to `asset` by a trace chain.
AssetNode* correspondingNode(const AssetTree& tree, const AssetNode& asset,
                             const AssetNode& targetRepo);
std::optional<AssetRef> correspondingAsset(const AssetTree& tree, const AssetRef& asset,
                                           std::string_view targetRepo);

}  // namespace varhist
