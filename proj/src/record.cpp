#include "varhist/record.hpp"

#include <algorithm>

#include "varhist/adapter.hpp"
#include "varhist/addressing.hpp"
#include "varhist/errors.hpp"
#include "varhist/transplant.hpp"

namespace varhist {

std::size_t OperationRecord::size() const {
  std::size_t n = 1;
  for (const auto& sub : subOps) n += sub.size();
  return n;
}

json toJson(const OperationRecord& record) {
  json j;
  j["opId"] = record.opId;
  j["kind"] = record.kind;
  j["params"] = record.params;
  auto subs = json::array();
  for (const auto& sub : record.subOps) subs.push_back(toJson(sub));
  j["subOps"] = std::move(subs);
  if (record.revisionBefore >= 0) j["revisionBefore"] = record.revisionBefore;
  if (record.revisionAfter >= 0) j["revisionAfter"] = record.revisionAfter;
  if (record.iteration >= 0) j["iteration"] = record.iteration;
  return j;
}

OperationRecord recordFromJson(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.contains("opId")) {
    throw Error(Errc::MalformedRecord, "record lacks opId or kind");
  }
  OperationRecord r;
  r.opId = j.at("opId").get<std::string>();
  r.kind = j.at("kind").get<std::string>();
  r.params = j.value("params", json::object());
  if (j.contains("subOps")) {
    for (const auto& sub : j.at("subOps")) r.subOps.push_back(recordFromJson(sub));
  }
  r.revisionBefore = j.value("revisionBefore", Revision{-1});
  r.revisionAfter = j.value("revisionAfter", Revision{-1});
  r.iteration = j.value("iteration", std::int64_t{-1});
  return r;
}

json dumpNode(const AssetNode& node) {
  if (node.kind == AssetKind::Line) return node.text;
  json j;
  j["kind"] = std::string(to_string(node.kind));
  j["name"] = node.name;
  auto children = json::array();
  for (const auto& child : node.children) children.push_back(dumpNode(*child));
  j["children"] = std::move(children);
  return j;
}

std::unique_ptr<AssetNode> nodeFromDump(const json& dump) {
  if (dump.is_string()) return AssetNode::makeLine(dump.get<std::string>());
  if (!dump.is_object()) throw Error(Errc::MalformedRecord, "element dump must be a string or object");
  auto kind = assetKindFromString(dump.at("kind").get<std::string>());
  if (kind == AssetKind::Root) throw Error(Errc::MalformedRecord, "cannot materialize a root dump");
  auto node = std::make_unique<AssetNode>(kind, dump.value("name", std::string{}));
  for (const auto& child : dump.value("children", json::array())) {
    auto c = nodeFromDump(child);
    if (isFilesystemKind(kind) == false && isFilesystemKind(c->kind)) {
      throw Error(Errc::MalformedRecord, "filesystem asset below a code asset");
    }
    c->parent = node.get();
    node->children.push_back(std::move(c));
  }
  return node;
}

std::string_view to_string(Mutation::Kind kind) {
  switch (kind) {
    case Mutation::Kind::AddLine: return "addLine";
    case Mutation::Kind::ReplaceLine: return "replaceLine";
    case Mutation::Kind::DeleteLine: return "deleteLine";
  }
  return "deleteLine";
}

Mutation::Kind mutationKindFromString(std::string_view text) {
  if (text == "addLine") return Mutation::Kind::AddLine;
  if (text == "replaceLine") return Mutation::Kind::ReplaceLine;
  if (text == "deleteLine") return Mutation::Kind::DeleteLine;
  throw Error(Errc::MalformedRecord, "unknown mutation '" + std::string(text) + "'");
}

bool isPrimitiveKind(std::string_view kind) {
  using namespace primitive;
  return kind == AddAsset || kind == RemoveAsset || kind == CloneAsset || kind == MutateAsset ||
         kind == AddFeature || kind == MapAsset || kind == SetFileContent || kind == IncludeSlice;
}

// ---------------------------------------------------------------------------
// Primitive execution

namespace {

AssetRef refParam(const json& params, const char* key) {
  if (!params.contains(key)) throw Error(Errc::MalformedRecord, std::string("missing parameter '") + key + "'");
  return AssetRef::parse(params.at(key).get<std::string>());
}

FeatureRef featureParam(const json& params, const char* key) {
  if (!params.contains(key)) throw Error(Errc::MalformedRecord, std::string("missing parameter '") + key + "'");
  return FeatureRef::parse(params.at(key).get<std::string>());
}

void markSubtreeVanished(AssetTree& tree, const AssetNode& node) {
  forEachNode(node, [&](const AssetNode& n) {
    if (tree.traces.hasTraces(n.id)) tree.traces.markVanished(n.id, tree.revision() + 1);
  });
}

void removeNode(AssetTree& tree, AssetNode& node) {
  markSubtreeVanished(tree, node);
  if (auto* repo = repositoryOf(node)) {
    forEachNode(node, [&](const AssetNode& n) {
      if (n.kind != AssetKind::File) return;
      if (auto member = sliceFileOf(repositoryRelativePath(n))) {
        auto donor = tree.donors.find(member->first);
        if (donor == tree.donors.end()) return;
        auto included = donor->second.includedIn.find(repo->name);
        if (included != donor->second.includedIn.end()) included->second.erase(member->second);
      }
    });
  }
  tree.detach(node);
}

void translateMappings(AssetNode& node, const std::map<FeatureId, FeatureId>& ids) {
  forEachNode(node, [&](AssetNode& n) {
    std::set<FeatureId> mapped;
    for (auto f : n.mappedFeatures) {
      if (auto it = ids.find(f); it != ids.end()) mapped.insert(it->second);
    }
    n.mappedFeatures = std::move(mapped);
  });
}

void collectFeatureIds(const Feature& before, const Feature& after, std::map<FeatureId, FeatureId>& out) {
  out[before.id] = after.id;
  for (std::size_t i = 0; i < before.children.size(); ++i) {
    collectFeatureIds(before.children[i], after.children[i], out);
  }
}

void traceCopies(AssetTree& tree, const AssetNode& source, const AssetNode& copy, bool deep,
                 const std::string& originOp) {
  recordPendingTrace(tree, source, copy, originOp);
  if (!deep) return;
  for (std::size_t i = 0; i < source.children.size(); ++i) {
    traceCopies(tree, *source.children[i], *copy.children[i], true, originOp);
  }
}

}  // namespace

void applyMutation(AssetTree& tree, AssetNode& target, const Mutation& m) {
  if (target.kind != AssetKind::File && target.kind != AssetKind::Block) {
    throw Error(Errc::NotMutable, "only files and blocks carry lines");
  }
  if (target.kind == AssetKind::File && target.name == kManifestFileName) {
    throw Error(Errc::NotMutable, "manifests are not mutated");
  }
  auto lines = lineNodes(target);
  if (m.targetLine >= lines.size()) {
    throw Error(Errc::BadIndex, "line " + std::to_string(m.targetLine) + " of " +
                                    std::to_string(lines.size()));
  }
  auto& line = *lines[m.targetLine];
  switch (m.kind) {
    case Mutation::Kind::AddLine:
      tree.insert(*line.parent, line.indexInParent(), AssetNode::makeLine(m.donorLine));
      break;
    case Mutation::Kind::ReplaceLine:
      line.text = m.donorLine;
      break;
    case Mutation::Kind::DeleteLine:
      markSubtreeVanished(tree, line);
      tree.detach(line);
      break;
  }
}

void deleteFeature(AssetTree& tree, AssetNode& repo, FeatureId feature) {
  if (!repo.featureModel) throw Error(Errc::UnknownFeature, "repository has no feature model");
  auto ids = repo.featureModel->subtree(feature);
  if (ids.empty()) throw Error(Errc::UnknownFeature, "feature not in model");
  repo.featureModel->remove(feature);
  std::set<FeatureId> gone(ids.begin(), ids.end());
  forEachNode(repo, [&](AssetNode& n) {
    std::erase_if(n.mappedFeatures, [&](FeatureId f) { return gone.count(f) > 0; });
  });
  (void)tree;
}

PrimitiveResult executePrimitive(AssetTree& tree, const OperationRecord& record,
                                 const std::string& originOp) {
  const auto& p = record.params;
  const auto& kind = record.kind;
  if (kind == primitive::AddAsset) {
    auto& parent = resolveAssetRef(tree, refParam(p, "parent"));
    auto node = nodeFromDump(p.at("element"));
    return {&tree.insert(parent, p.at("index").get<std::size_t>(), std::move(node)), 0};
  }
  if (kind == primitive::RemoveAsset) {
    auto& node = resolveAssetRef(tree, refParam(p, "target"));
    if (node.kind == AssetKind::Root) throw Error(Errc::NotInTree, "cannot remove the root");
    removeNode(tree, node);
    return {};
  }
  if (kind == primitive::CloneAsset) {
    auto& source = resolveAssetRef(tree, refParam(p, "source"));
    auto& parent = resolveAssetRef(tree, refParam(p, "parent"));
    bool shallow = p.value("shallow", false);
    std::unique_ptr<AssetNode> copy;
    if (shallow) {
      copy = std::make_unique<AssetNode>(source.kind, source.name);
      copy->text = source.text;
    } else {
      copy = source.deepCopy();
    }
    if (isFilesystemKind(copy->kind)) copy->name = p.at("name").get<std::string>();
    if (copy->kind == AssetKind::Repository) {
      if (!copy->featureModel) copy->featureModel = FeatureModel(Feature{0, copy->name, "", {}});
      auto& model = *copy->featureModel;
      auto before = model.root();
      tree.renumberFeatures(model.root());
      std::map<FeatureId, FeatureId> ids;
      collectFeatureIds(before, model.root(), ids);
      translateMappings(*copy, ids);
    } else {
      forEachNode(*copy, [](AssetNode& n) {
        n.mappedFeatures.clear();
        n.featureModel.reset();
      });
    }
    auto& inserted = tree.insert(parent, p.at("index").get<std::size_t>(), std::move(copy));
    traceCopies(tree, source, inserted, !shallow, originOp);
    return {&inserted, 0};
  }
  if (kind == primitive::MutateAsset) {
    auto& target = resolveAssetRef(tree, refParam(p, "target"));
    Mutation m{mutationKindFromString(p.at("mutation").get<std::string>()),
               p.at("line").get<std::size_t>(), p.value("text", std::string{})};
    applyMutation(tree, target, m);
    return {&target, 0};
  }
  if (kind == primitive::AddFeature) {
    auto parent = resolveFeatureRef(tree, featureParam(p, "parent"));
    Feature f;
    f.id = tree.newFeatureId();
    f.name = p.at("name").get<std::string>();
    f.lineage = p.value("lineage", std::string{});
    if (f.name.empty() || f.name.find_first_of("/!") != std::string::npos) {
      throw Error(Errc::MalformedRecord, "invalid feature name '" + f.name + "'");
    }
    auto id = f.id;
    parent.repository->featureModel->addChild(parent.feature, std::move(f));
    return {parent.repository, id};
  }
  if (kind == primitive::MapAsset) {
    auto& asset = resolveAssetRef(tree, refParam(p, "asset"));
    auto feature = resolveFeatureRef(tree, featureParam(p, "feature"));
    if (repositoryOf(asset) != feature.repository) {
      throw Error(Errc::UnknownFeature, "feature belongs to another repository than the asset");
    }
    asset.mappedFeatures.insert(feature.feature);
    return {&asset, feature.feature};
  }
  if (kind == primitive::SetFileContent) {
    auto& file = resolveAssetRef(tree, refParam(p, "target"));
    if (file.kind != AssetKind::File) throw Error(Errc::NotMutable, "content can only be set on files");
    while (!file.children.empty()) {
      auto& child = *file.children.back();
      markSubtreeVanished(tree, child);
      tree.detach(child);
    }
    std::size_t i = 0;
    for (const auto& line : p.at("lines")) {
      tree.insert(file, i++, AssetNode::makeLine(line.get<std::string>()));
    }
    return {&file, 0};
  }
  if (kind == primitive::IncludeSlice) {
    auto& files = tree.donors[p.at("donor").get<std::string>()].includedIn[p.at("repository").get<std::string>()];
    for (const auto& f : p.at("files")) files.insert(f.get<std::string>());
    return {};
  }
  throw Error(Errc::MalformedRecord, "'" + kind + "' is not a primitive operation");
}

void executeRecord(AssetTree& tree, const OperationRecord& record, const std::string& originOp) {
  if (isPrimitiveKind(record.kind)) {
    executePrimitive(tree, record, originOp);
    return;
  }
  for (const auto& sub : record.subOps) executeRecord(tree, sub, originOp);
  // The feature removal itself is the operation's own effect; its asset
  // removals are the recorded sub-operations.
  if (record.kind == "RemoveFeature") {
    auto resolved = resolveFeatureRef(tree, featureParam(record.params, "feature"));
    deleteFeature(tree, *resolved.repository, resolved.feature);
  }
}

// ---------------------------------------------------------------------------
// OpContext

OpContext::OpContext(AssetTree& tree, std::string opId) : tree_(tree), opId_(std::move(opId)) {
  OperationRecord top;
  top.opId = opId_;
  stack_.push_back(std::move(top));
}

PrimitiveResult OpContext::emit(std::string_view kind, json params) {
  OperationRecord rec;
  auto& parent = stack_.back();
  rec.opId = parent.opId + "." + std::to_string(parent.subOps.size() + 1);
  rec.kind = std::string(kind);
  rec.params = std::move(params);
  auto result = executePrimitive(tree_, rec, opId_);
  parent.subOps.push_back(std::move(rec));
  return result;
}

AssetNode& OpContext::addAsset(AssetNode& parent, std::size_t index, const AssetNode& prototype) {
  json p;
  p["parent"] = makeAssetRef(tree_, parent).str();
  p["index"] = index;
  p["element"] = dumpNode(prototype);
  return *emit(primitive::AddAsset, std::move(p)).node;
}

void OpContext::removeAsset(AssetNode& node) {
  json p;
  p["target"] = makeAssetRef(tree_, node).str();
  emit(primitive::RemoveAsset, std::move(p));
}

AssetNode& OpContext::cloneAsset(const AssetNode& source, AssetNode& parent, std::size_t index,
                                 const std::string& name, bool shallow) {
  json p;
  p["source"] = makeAssetRef(tree_, source).str();
  p["parent"] = makeAssetRef(tree_, parent).str();
  p["index"] = index;
  p["name"] = name;
  if (shallow) p["shallow"] = true;
  return *emit(primitive::CloneAsset, std::move(p)).node;
}

void OpContext::mutate(AssetNode& target, const Mutation& mutation) {
  json p;
  p["target"] = makeAssetRef(tree_, target).str();
  p["mutation"] = std::string(to_string(mutation.kind));
  p["line"] = mutation.targetLine;
  if (mutation.kind != Mutation::Kind::DeleteLine) p["text"] = mutation.donorLine;
  emit(primitive::MutateAsset, std::move(p));
}

FeatureId OpContext::addFeature(AssetNode& repo, FeatureId parent, const std::string& name,
                                const std::string& lineage) {
  json p;
  p["parent"] = makeFeatureLPQ(repo, parent).str();
  p["name"] = name;
  p["lineage"] = lineage;
  return emit(primitive::AddFeature, std::move(p)).feature;
}

void OpContext::mapAsset(AssetNode& asset, FeatureId feature) {
  auto* repo = repositoryOf(asset);
  if (!repo) throw Error(Errc::NotInTree, "asset outside any repository");
  json p;
  p["asset"] = makeAssetRef(tree_, asset).str();
  p["feature"] = makeFeatureLPQ(*repo, feature).str();
  emit(primitive::MapAsset, std::move(p));
}

void OpContext::setFileContent(AssetNode& file, const std::vector<std::string>& lines) {
  json p;
  p["target"] = makeAssetRef(tree_, file).str();
  p["lines"] = lines;
  emit(primitive::SetFileContent, std::move(p));
}

void OpContext::includeSlice(const std::string& donor, const std::string& repo,
                             const std::set<std::string>& files) {
  json p;
  p["donor"] = donor;
  p["repository"] = repo;
  p["files"] = files;
  emit(primitive::IncludeSlice, std::move(p));
}

void OpContext::beginGroup(std::string kind, json params) {
  OperationRecord group;
  auto& parent = stack_.back();
  group.opId = parent.opId + "." + std::to_string(parent.subOps.size() + 1);
  group.kind = std::move(kind);
  group.params = std::move(params);
  stack_.push_back(std::move(group));
}

void OpContext::endGroup() {
  if (stack_.size() < 2) throw Error(Errc::MalformedRecord, "endGroup without beginGroup");
  auto group = std::move(stack_.back());
  stack_.pop_back();
  stack_.back().subOps.push_back(std::move(group));
}

std::vector<OperationRecord> OpContext::takeSubOps() {
  while (stack_.size() > 1) endGroup();
  return std::move(stack_.front().subOps);
}

}  // namespace varhist
