#include "varhist/model.hpp"

#include <algorithm>
#include <deque>

#include "varhist/addressing.hpp"
#include "varhist/errors.hpp"

namespace varhist {

std::string_view to_string(AssetKind kind) {
  switch (kind) {
    case AssetKind::Root: return "root";
    case AssetKind::Repository: return "repository";
    case AssetKind::Folder: return "folder";
    case AssetKind::File: return "file";
    case AssetKind::Block: return "block";
    case AssetKind::Line: return "line";
  }
  return "unknown";
}

AssetKind assetKindFromString(std::string_view text) {
  for (auto kind : {AssetKind::Root, AssetKind::Repository, AssetKind::Folder, AssetKind::File,
                    AssetKind::Block, AssetKind::Line}) {
    if (to_string(kind) == text) return kind;
  }
  throw Error(Errc::MalformedRecord, "unknown asset kind '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// FeatureModel

namespace {

template <typename F>
F* findFeature(F& feature, FeatureId id) {
  if (feature.id == id) return &feature;
  for (auto& child : feature.children) {
    if (auto* hit = findFeature(child, id)) return hit;
  }
  return nullptr;
}

const Feature* findParent(const Feature& feature, FeatureId id) {
  for (const auto& child : feature.children) {
    if (child.id == id) return &feature;
    if (auto* hit = findParent(child, id)) return hit;
  }
  return nullptr;
}

bool pathTo(const Feature& feature, FeatureId id, std::vector<std::string>& path) {
  path.push_back(feature.name);
  if (feature.id == id) return true;
  for (const auto& child : feature.children) {
    if (pathTo(child, id, path)) return true;
  }
  path.pop_back();
  return false;
}

void collect(const Feature& feature, std::vector<const Feature*>& out) {
  out.push_back(&feature);
  for (const auto& child : feature.children) collect(child, out);
}

}  // namespace

bool structurallyEqual(const Feature& a, const Feature& b) {
  if (a.name != b.name || a.lineage != b.lineage || a.children.size() != b.children.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!structurallyEqual(a.children[i], b.children[i])) return false;
  }
  return true;
}

const Feature* FeatureModel::find(FeatureId id) const { return findFeature(root_, id); }
Feature* FeatureModel::find(FeatureId id) { return findFeature(root_, id); }
const Feature* FeatureModel::parentOf(FeatureId id) const { return findParent(root_, id); }

const Feature* FeatureModel::findByLineage(std::string_view lineage) const {
  for (const auto* feature : all()) {
    if (feature->lineage == lineage) return feature;
  }
  return nullptr;
}

std::vector<std::string> FeatureModel::namePath(FeatureId id) const {
  std::vector<std::string> path;
  if (!pathTo(root_, id, path)) return {};
  return path;
}

std::vector<FeatureId> FeatureModel::subtree(FeatureId id) const {
  std::vector<FeatureId> ids;
  if (const auto* feature = find(id)) {
    std::vector<const Feature*> nodes;
    collect(*feature, nodes);
    for (const auto* node : nodes) ids.push_back(node->id);
  }
  return ids;
}

std::vector<const Feature*> FeatureModel::all() const {
  std::vector<const Feature*> out;
  collect(root_, out);
  return out;
}

Feature& FeatureModel::addChild(FeatureId parent, Feature child) {
  auto* owner = find(parent);
  if (!owner) throw Error(Errc::UnknownFeature, "parent feature not in model");
  for (const auto& sibling : owner->children) {
    if (sibling.name == child.name) {
      throw Error(Errc::AlreadyPresent, "feature '" + child.name + "' already exists here");
    }
  }
  owner->children.push_back(std::move(child));
  return owner->children.back();
}

void FeatureModel::remove(FeatureId id) {
  if (id == root_.id) throw Error(Errc::CannotRemoveRoot, "the root feature cannot be removed");
  auto* parent = const_cast<Feature*>(parentOf(id));
  if (!parent) throw Error(Errc::UnknownFeature, "feature not in model");
  std::erase_if(parent->children, [id](const Feature& f) { return f.id == id; });
}

// ---------------------------------------------------------------------------
// AssetNode helpers

std::unique_ptr<AssetNode> AssetNode::makeLine(std::string text) {
  auto node = std::make_unique<AssetNode>(AssetKind::Line, "");
  node->text = std::move(text);
  return node;
}

std::unique_ptr<AssetNode> AssetNode::deepCopy() const {
  auto copy = std::make_unique<AssetNode>(kind, name);
  copy->text = text;
  copy->id = id;
  copy->featureModel = featureModel;
  copy->mappedFeatures = mappedFeatures;
  copy->children.reserve(children.size());
  for (const auto& child : children) {
    auto c = child->deepCopy();
    c->parent = copy.get();
    copy->children.push_back(std::move(c));
  }
  return copy;
}

std::size_t AssetNode::indexInParent() const {
  if (!parent) return 0;
  for (std::size_t i = 0; i < parent->children.size(); ++i) {
    if (parent->children[i].get() == this) return i;
  }
  return 0;
}

AssetNode* AssetNode::childNamed(std::string_view childName) const {
  for (const auto& child : children) {
    if (isFilesystemKind(child->kind) && child->name == childName) return child.get();
  }
  return nullptr;
}

void forEachNode(const AssetNode& node, const std::function<void(const AssetNode&)>& fn) {
  fn(node);
  for (const auto& child : node.children) forEachNode(static_cast<const AssetNode&>(*child), fn);
}

void forEachNode(AssetNode& node, const std::function<void(AssetNode&)>& fn) {
  fn(node);
  for (auto& child : node.children) forEachNode(*child, fn);
}

std::size_t countDescendants(const AssetNode& node) {
  std::size_t n = 0;
  for (const auto& child : node.children) n += 1 + countDescendants(*child);
  return n;
}

namespace {

void appendLines(const AssetNode& node, std::vector<std::string>& out) {
  for (const auto& child : node.children) {
    if (child->kind == AssetKind::Line) {
      out.push_back(child->text);
    } else {
      appendLines(*child, out);
    }
  }
}

void appendLineNodes(AssetNode& node, std::vector<AssetNode*>& out) {
  for (auto& child : node.children) {
    if (child->kind == AssetKind::Line) {
      out.push_back(child.get());
    } else {
      appendLineNodes(*child, out);
    }
  }
}

}  // namespace

std::vector<std::string> materializeLines(const AssetNode& node) {
  std::vector<std::string> out;
  appendLines(node, out);
  return out;
}

std::vector<AssetNode*> lineNodes(AssetNode& node) {
  std::vector<AssetNode*> out;
  appendLineNodes(node, out);
  return out;
}

std::size_t lineCount(const AssetNode& node) {
  std::size_t n = 0;
  for (const auto& child : node.children) {
    n += child->kind == AssetKind::Line ? 1 : lineCount(*child);
  }
  return n;
}

bool structurallyEqual(const AssetNode& a, const AssetNode& b) {
  if (a.kind != b.kind || a.name != b.name || a.text != b.text ||
      a.children.size() != b.children.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!structurallyEqual(*a.children[i], *b.children[i])) return false;
  }
  return true;
}

AssetNode* repositoryOf(const AssetNode& node) {
  const AssetNode* cur = &node;
  while (cur && cur->kind != AssetKind::Repository) cur = cur->parent;
  return const_cast<AssetNode*>(cur);
}

const AssetNode* filesystemAnchor(const AssetNode& node) {
  const AssetNode* cur = &node;
  while (cur && !isFilesystemKind(cur->kind)) cur = cur->parent;
  return cur;
}

std::string filesystemPath(const AssetNode& node) {
  const AssetNode* anchor = filesystemAnchor(node);
  if (!anchor || anchor->kind == AssetKind::Root) return "/";
  std::vector<const AssetNode*> chain;
  for (const AssetNode* cur = anchor; cur && cur->kind != AssetKind::Root; cur = cur->parent) {
    chain.push_back(cur);
  }
  std::string path;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    if (!path.empty()) path += '/';
    path += (*it)->name;
  }
  return path;
}

std::string repositoryRelativePath(const AssetNode& node) {
  std::vector<const AssetNode*> chain;
  for (const AssetNode* cur = &node; cur && cur->kind != AssetKind::Repository;
       cur = cur->parent) {
    if (cur->kind == AssetKind::Root) return {};
    chain.push_back(cur);
  }
  std::string path;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    if (!path.empty()) path += '/';
    path += (*it)->name;
  }
  return path;
}

// ---------------------------------------------------------------------------
// TraceDb

const CloneTrace& TraceDb::add(CloneTrace trace) {
  auto index = traces_.size();
  bySource_.emplace(trace.sourceNode, index);
  byTarget_.emplace(trace.targetNode, index);
  traces_.push_back(std::move(trace));
  return traces_.back();
}

std::vector<const CloneTrace*> TraceDb::fromNode(NodeId node) const {
  std::vector<const CloneTrace*> out;
  auto [lo, hi] = bySource_.equal_range(node);
  for (auto it = lo; it != hi; ++it) out.push_back(&traces_[it->second]);
  return out;
}

std::vector<const CloneTrace*> TraceDb::toNode(NodeId node) const {
  std::vector<const CloneTrace*> out;
  auto [lo, hi] = byTarget_.equal_range(node);
  for (auto it = lo; it != hi; ++it) out.push_back(&traces_[it->second]);
  return out;
}

std::vector<const CloneTrace*> TraceDb::bySource(const AssetRef& ref) const {
  std::vector<const CloneTrace*> out;
  for (const auto& t : traces_) {
    if (t.source == ref) out.push_back(&t);
  }
  return out;
}

std::vector<const CloneTrace*> TraceDb::byTarget(const AssetRef& ref) const {
  std::vector<const CloneTrace*> out;
  for (const auto& t : traces_) {
    if (t.target == ref) out.push_back(&t);
  }
  return out;
}

std::vector<const CloneTrace*> TraceDb::byOp(std::string_view opId) const {
  std::vector<const CloneTrace*> out;
  for (const auto& t : traces_) {
    if (t.originOp == opId) out.push_back(&t);
  }
  return out;
}

void TraceDb::markVanished(NodeId node, Revision revision) { vanished_.emplace(node, revision); }

std::optional<Revision> TraceDb::vanishedAt(NodeId node) const {
  auto it = vanished_.find(node);
  if (it == vanished_.end()) return std::nullopt;
  return it->second;
}

bool TraceDb::hasTraces(NodeId node) const {
  return bySource_.count(node) > 0 || byTarget_.count(node) > 0;
}

bool TraceDb::aliveAt(NodeId node, Revision created, Revision revision) const {
  if (revision < created) return false;
  auto gone = vanishedAt(node);
  return !gone || revision < *gone;
}

std::vector<const CloneTrace*> TraceDb::tracesFrom(NodeId node, Revision revision) const {
  std::vector<const CloneTrace*> out;
  for (const auto* t : fromNode(node)) {
    if (aliveAt(t->sourceNode, t->source.revision, revision) &&
        aliveAt(t->targetNode, t->target.revision, revision)) {
      out.push_back(t);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// AssetTree

AssetTree::AssetTree() : root_(std::make_unique<AssetNode>(AssetKind::Root, "")) {
  indexSubtree(*root_, true);
}

AssetTree::AssetTree(const AssetTree& other)
    : traces(other.traces),
      donors(other.donors),
      root_(other.root_->deepCopy()),
      revision_(other.revision_),
      nextNodeId_(other.nextNodeId_),
      nextFeatureId_(other.nextFeatureId_) {
  rebuildIndex();
}

AssetTree& AssetTree::operator=(const AssetTree& other) {
  if (this != &other) {
    AssetTree copy(other);
    *this = std::move(copy);
  }
  return *this;
}

void AssetTree::indexSubtree(AssetNode& node, bool assignIds) {
  if (assignIds) node.id = nextNodeId_++;
  index_[node.id] = &node;
  for (auto& child : node.children) {
    child->parent = &node;
    indexSubtree(*child, assignIds);
  }
}

void AssetTree::unindexSubtree(const AssetNode& node) {
  index_.erase(node.id);
  for (const auto& child : node.children) unindexSubtree(*child);
}

void AssetTree::rebuildIndex() {
  index_.clear();
  indexSubtree(*root_, false);
}

AssetNode& AssetTree::insert(AssetNode& parent, std::size_t index,
                             std::unique_ptr<AssetNode> subtree) {
  if (!contains(parent)) throw Error(Errc::NotInTree, "insertion parent is not in the tree");
  if (index > parent.children.size()) {
    throw Error(Errc::BadIndex, "child index " + std::to_string(index) + " out of range");
  }
  if ((parent.kind == AssetKind::Root) != (subtree->kind == AssetKind::Repository)) {
    throw Error(Errc::NotInTree, "repositories live exactly below the root");
  }
  if (parent.kind == AssetKind::Line) {
    throw Error(Errc::BadIndex, "line assets have no children");
  }
  if (isFilesystemKind(subtree->kind) && parent.childNamed(subtree->name)) {
    if (subtree->kind == AssetKind::Repository) {
      throw Error(Errc::DuplicateRepository, "repository '" + subtree->name + "' exists");
    }
    throw Error(Errc::AlreadyPresent,
                "'" + subtree->name + "' already exists in " + filesystemPath(parent));
  }
  subtree->parent = &parent;
  auto* raw = subtree.get();
  parent.children.insert(parent.children.begin() + static_cast<std::ptrdiff_t>(index),
                         std::move(subtree));
  indexSubtree(*raw, true);
  return *raw;
}

std::unique_ptr<AssetNode> AssetTree::detach(AssetNode& node) {
  if (&node == root_.get()) throw Error(Errc::NotInTree, "the root cannot be detached");
  if (!contains(node) || !node.parent) throw Error(Errc::NotInTree, "node is not in the tree");
  auto& siblings = node.parent->children;
  auto it = std::find_if(siblings.begin(), siblings.end(),
                         [&](const auto& c) { return c.get() == &node; });
  auto owned = std::move(*it);
  siblings.erase(it);
  unindexSubtree(*owned);
  owned->parent = nullptr;
  return owned;
}

AssetNode* AssetTree::find(NodeId id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : it->second;
}

bool AssetTree::contains(const AssetNode& node) const { return find(node.id) == &node; }

std::vector<AssetNode*> AssetTree::repositories() const {
  std::vector<AssetNode*> out;
  for (const auto& child : root_->children) out.push_back(child.get());
  return out;
}

AssetNode* AssetTree::repository(std::string_view name) const { return root_->childNamed(name); }

void AssetTree::renumberFeatures(Feature& feature) {
  feature.id = newFeatureId();
  for (auto& child : feature.children) renumberFeatures(child);
}

void AssetTree::finalizeTraces() {
  for (auto& trace : traces.mutableTraces()) {
    if (trace.finalized()) continue;
    auto* node = find(trace.targetNode);
    if (!node) {
      throw Error(Errc::NotInTree, "trace target vanished before commit");
    }
    trace.target = makeAssetRef(*this, *node);
  }
}

// ---------------------------------------------------------------------------
// Queries

std::vector<AssetNode*> exclusiveAssetNodes(const AssetNode& repo, FeatureId feature) {
  std::vector<AssetNode*> out;
  if (!repo.featureModel) return out;
  auto ids = repo.featureModel->subtree(feature);
  std::set<FeatureId> scope(ids.begin(), ids.end());
  forEachNode(const_cast<AssetNode&>(repo), [&](AssetNode& node) {
    if (node.mappedFeatures.empty()) return;
    bool inside = std::all_of(node.mappedFeatures.begin(), node.mappedFeatures.end(),
                              [&](FeatureId f) { return scope.count(f) > 0; });
    if (inside) out.push_back(&node);
  });
  return out;
}

std::set<AssetRef> featureExclusiveAssets(const AssetTree& tree, const FeatureRef& feature) {
  auto resolved = resolveFeatureRef(tree, feature);
  std::set<AssetRef> refs;
  for (auto* node : exclusiveAssetNodes(*resolved.repository, resolved.feature)) {
    refs.insert(makeAssetRef(tree, *node));
  }
  return refs;
}

const CloneTrace& recordCloneTrace(AssetTree& tree, const AssetRef& source,
                                   const AssetRef& target, const std::string& opId) {
  if (source == target) throw Error(Errc::SelfTrace, "trace source equals target");
  auto& src = resolveAssetRef(tree, source);
  auto& tgt = resolveAssetRef(tree, target);
  if (&src == &tgt) throw Error(Errc::SelfTrace, "trace source equals target");
  return tree.traces.add(CloneTrace{src.id, tgt.id, source, target, opId});
}

void recordPendingTrace(AssetTree& tree, const AssetNode& source, const AssetNode& target,
                        const std::string& opId) {
  if (&source == &target) throw Error(Errc::SelfTrace, "trace source equals target");
  tree.traces.add(CloneTrace{source.id, target.id, makeAssetRef(tree, source), {}, opId});
}

namespace {

/// Breadth-first walk over trace edges starting at `start`; `forward`
/// follows source->target, otherwise target->source.  Stops when `accept`
/// returns true for a reached node id.
template <typename Accept>
std::optional<NodeId> walkTraces(const TraceDb& db, NodeId start, bool forward, Accept accept) {
  std::deque<NodeId> queue{start};
  std::set<NodeId> seen{start};
  while (!queue.empty()) {
    auto cur = queue.front();
    queue.pop_front();
    auto edges = forward ? db.fromNode(cur) : db.toNode(cur);
    for (const auto* t : edges) {
      auto next = forward ? t->targetNode : t->sourceNode;
      if (!seen.insert(next).second) continue;
      if (accept(next)) return next;
      queue.push_back(next);
    }
  }
  return std::nullopt;
}

}  // namespace

bool originatedFrom(const AssetTree& tree, const AssetNode& source, const AssetNode& target) {
  if (&source == &target) return false;
  return walkTraces(tree.traces, source.id, true,
                    [&](NodeId id) { return id == target.id; })
      .has_value();
}

bool repositoriesRelated(const AssetTree& tree, const AssetNode& a, const AssetNode& b) {
  return originatedFrom(tree, a, b) || originatedFrom(tree, b, a);
}

AssetNode* correspondingNode(const AssetTree& tree, const AssetNode& asset,
                             const AssetNode& targetRepo) {
  auto* sourceRepo = repositoryOf(asset);
  if (!sourceRepo || !repositoriesRelated(tree, *sourceRepo, targetRepo)) {
    throw Error(Errc::UnrelatedRepositories,
                "no clone-trace chain between '" + (sourceRepo ? sourceRepo->name : "?") +
                    "' and '" + targetRepo.name + "'");
  }
  auto inTarget = [&](NodeId id) {
    auto* node = tree.find(id);
    return node && repositoryOf(*node) == &targetRepo;
  };
  for (bool forward : {true, false}) {
    if (auto hit = walkTraces(tree.traces, asset.id, forward, inTarget)) return tree.find(*hit);
  }
  return nullptr;
}

std::optional<AssetRef> correspondingAsset(const AssetTree& tree, const AssetRef& asset,
                                           std::string_view targetRepo) {
  auto& node = resolveAssetRef(tree, asset);
  auto* repo = tree.repository(targetRepo);
  if (!repo) throw Error(Errc::UnrelatedRepositories, "unknown repository '" + std::string(targetRepo) + "'");
  auto* hit = correspondingNode(tree, node, *repo);
  if (!hit) return std::nullopt;
  return makeAssetRef(tree, *hit);
}

}  // namespace varhist
