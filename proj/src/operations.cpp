#include "varhist/operations.hpp"

#include <algorithm>

#include "varhist/addressing.hpp"
#include "varhist/errors.hpp"
#include "varhist/text.hpp"
#include "varhist/transplant.hpp"

namespace varhist {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

OperationRecord finish(OpContext& ctx, std::string kind, json params) {
  OperationRecord record;
  record.opId = ctx.opId();
  record.kind = std::move(kind);
  record.params = std::move(params);
  record.subOps = ctx.takeSubOps();
  return record;
}

}  // namespace

std::string_view operationKind(const CandidateOperation& op) {
  return std::visit(Overloaded{
                        [](const RemoveFeatureOp&) { return std::string_view("RemoveFeature"); },
                        [](const MutateOp&) { return std::string_view("MutateAsset"); },
                        [](const TransplantOp&) { return std::string_view("TransplantFeature"); },
                        [](const CloneVariantOp&) { return std::string_view("CloneVariant"); },
                        [](const CloneFeatureOp&) { return std::string_view("CloneFeature"); },
                    },
                    op);
}

std::string nextOpId(const AssetTree& tree) { return "op-" + zeroPad(tree.revision() + 1, 4); }

std::string uniqueCloneName(const AssetNode& parent, const std::string& name) {
  if (!parent.childNamed(name)) return name;
  auto dot = name.rfind('.');
  std::string stem = name, ext;
  if (dot != std::string::npos && dot > 0) {
    stem = name.substr(0, dot);
    ext = name.substr(dot);
  }
  for (int n = 1;; ++n) {
    auto candidate = stem + "_clone" + std::to_string(n) + ext;
    if (!parent.childNamed(candidate)) return candidate;
  }
}

// ---------------------------------------------------------------------------
// RemoveFeature

std::vector<AssetNode*> removalSet(const AssetNode& repo, FeatureId feature) {
  std::vector<AssetNode*> out;
  if (!repo.featureModel) return out;
  auto ids = repo.featureModel->subtree(feature);
  std::set<FeatureId> scope(ids.begin(), ids.end());
  auto survivingBelow = [&](const AssetNode& node) {
    bool hit = false;
    forEachNode(node, [&](const AssetNode& n) {
      for (auto f : n.mappedFeatures) hit = hit || !scope.count(f);
    });
    return hit;
  };
  std::function<void(AssetNode&)> walk = [&](AssetNode& node) {
    bool exclusive = !node.mappedFeatures.empty() &&
                     std::all_of(node.mappedFeatures.begin(), node.mappedFeatures.end(),
                                 [&](FeatureId f) { return scope.count(f) > 0; });
    if (exclusive && !survivingBelow(node)) {
      out.push_back(&node);
      return;
    }
    for (auto& child : node.children) walk(*child);
  };
  for (auto& child : repo.children) walk(*child);
  return out;
}

OperationRecord applyRemoveFeature(AssetTree& tree, const FeatureRef& feature) {
  auto resolved = resolveFeatureRef(tree, feature);
  auto& repo = *resolved.repository;
  if (resolved.feature == repo.featureModel->root().id) {
    throw Error(Errc::CannotRemoveRoot, "the root feature of " + repo.name + " cannot be removed");
  }
  OpContext ctx(tree, nextOpId(tree));
  auto doomed = removalSet(repo, resolved.feature);
  for (auto it = doomed.rbegin(); it != doomed.rend(); ++it) ctx.removeAsset(**it);
  deleteFeature(tree, repo, resolved.feature);
  return finish(ctx, "RemoveFeature", json{{"feature", feature.str()}});
}

// ---------------------------------------------------------------------------
// MutateAsset

OperationRecord applyMutateAsset(AssetTree& tree, const AssetRef& target, const Mutation& m) {
  OperationRecord record;
  record.opId = nextOpId(tree);
  record.kind = std::string(primitive::MutateAsset);
  record.params = json{{"target", target.str()}, {"mutation", std::string(to_string(m.kind))}, {"line", m.targetLine}};
  if (m.kind != Mutation::Kind::DeleteLine) record.params["text"] = m.donorLine;
  executePrimitive(tree, record, record.opId);
  return record;
}

// ---------------------------------------------------------------------------
// TransplantFeature

OperationRecord applyTransplant(AssetTree& tree, const TransplantOp& op, const OperationEnv& env) {
  if (!env.adapter || !env.donors) throw Error(Errc::DonorIoError, "no donors configured");
  auto donor = env.donors->find(op.donorId);
  if (donor == env.donors->end()) throw Error(Errc::DonorIoError, "unknown donor '" + op.donorId + "'");
  auto organ = extractOrgan(donor->second, op.testId, *env.adapter);
  auto& line = resolveAssetRef(tree, op.insertionPoint);
  auto* repo = repositoryOf(line);
  if (!repo) throw Error(Errc::ForbiddenInsertionPoint, "insertion point outside any repository");

  OpContext ctx(tree, nextOpId(tree));
  integrateOrgan(ctx, *repo, line, organ, *env.adapter);
  json params{{"donor", op.donorId},
              {"test", op.testId},
              {"insertionPoint", op.insertionPoint.str()},
              {"organ", organToJson(organ)}};
  return finish(ctx, "TransplantFeature", std::move(params));
}

// ---------------------------------------------------------------------------
// CloneVariant

OperationRecord applyCloneVariant(AssetTree& tree, const AssetRef& source, const std::string& newName) {
  auto& repo = resolveAssetRef(tree, source);
  if (repo.kind != AssetKind::Repository) throw Error(Errc::NotInTree, source.str() + " is not a repository");
  if (tree.repository(newName)) throw Error(Errc::DuplicateRepository, "repository '" + newName + "' exists");
  OpContext ctx(tree, nextOpId(tree));
  ctx.cloneAsset(repo, tree.root(), tree.root().children.size(), newName);
  // the clone contains every slice its source contained
  std::vector<std::pair<std::string, std::set<std::string>>> inherited;
  for (const auto& [donorId, state] : tree.donors) {
    auto it = state.includedIn.find(repo.name);
    if (it != state.includedIn.end() && !it->second.empty()) inherited.emplace_back(donorId, it->second);
  }
  for (const auto& [donorId, files] : inherited) ctx.includeSlice(donorId, newName, files);
  return finish(ctx, "CloneVariant", json{{"source", source.str()}, {"name", newName}});
}

// ---------------------------------------------------------------------------
// CloneFeature

namespace {

class FeatureCloner {
 public:
  FeatureCloner(OpContext& ctx, AssetNode& source, AssetNode& target, const IntegrationPlan& plan)
      : ctx_(ctx), tree_(ctx.tree()), source_(source), target_(target), plan_(plan) {}

  void cloneFeatures(const Feature& feature, FeatureId parent) {
    auto name = uniqueFeatureName(*target_.featureModel, parent, feature.name);
    auto id = ctx_.addFeature(target_, parent, name, feature.lineage);
    ids_[feature.id] = id;
    for (const auto& child : feature.children) cloneFeatures(child, id);
  }

  void cloneAssets() {
    std::vector<AssetNode*> mapped;
    forEachNode(source_, [&](AssetNode& n) {
      for (auto f : n.mappedFeatures) {
        if (ids_.count(f)) {
          mapped.push_back(&n);
          break;
        }
      }
    });
    for (auto* node : mapped) {
      auto* counterpart = existingCounterpart(*node);
      if (!counterpart) counterpart = &cloneInto(*node, false);
      for (auto f : node->mappedFeatures) {
        auto it = ids_.find(f);
        if (it != ids_.end() && !counterpart->mappedFeatures.count(it->second)) {
          ctx_.mapAsset(*counterpart, it->second);
        }
      }
      noteSliceFiles(*node);
    }
  }

  void finishSlices(const LanguageAdapter& adapter) {
    for (const auto& [donorId, files] : sliceFiles_) {
      std::set<std::string> missing;
      auto& state = tree_.donors[donorId];
      const auto& have = state.includedIn[target_.name];
      for (const auto& f : files) {
        if (!have.count(f)) missing.insert(f);
      }
      if (missing.empty()) continue;
      ctx_.beginGroup("UpdateHostManifest", json{{"donor", donorId}});
      declareLocalSlice(ctx_, target_, donorId, adapter);
      ctx_.endGroup();
      ctx_.beginGroup("AddSliceManifest", json{{"donor", donorId}});
      auto* sourceManifest = findByPath(tree_, filesystemPath(source_) + "/" + std::string(kSliceDirectory) + "/" +
                                                   donorId + "/" + std::string(kManifestFileName));
      ManifestModel fragment;
      fragment.name = donorId;
      if (sourceManifest) fragment = adapter.parseManifest(joinLines(materializeLines(*sourceManifest)));
      mergeSliceManifest(ctx_, target_, donorId, fragment, adapter);
      ctx_.endGroup();
      ctx_.includeSlice(donorId, target_.name, missing);
    }
  }

 private:
  AssetNode* correspondingIn(const AssetNode& node) {
    auto* hit = correspondingNode(tree_, node, target_);
    return hit;
  }

  /// Filesystem asset at the same repository-relative path and of the same
  /// kind.  Used for folders and for files inside slice directories.
  AssetNode* samePath(const AssetNode& node) {
    auto* hit = findByPath(tree_, filesystemPath(target_) + "/" + repositoryRelativePath(node));
    if (hit && hit->kind == node.kind) return hit;
    return nullptr;
  }

  AssetNode* existingCounterpart(const AssetNode& node) {
    if (auto* hit = correspondingIn(node)) return hit;
    if (node.kind == AssetKind::File && insideSlice(node)) return samePath(node);
    return nullptr;
  }

  std::size_t defaultIndex(const AssetNode& node, const AssetNode& targetParent) {
    auto key = makeAssetRef(tree_, node).str();
    if (auto it = plan_.indices.find(key); it != plan_.indices.end()) {
      if (it->second > targetParent.children.size()) {
        throw Error(Errc::BadIndex, "planned index out of range for " + key);
      }
      return it->second;
    }
    auto index = node.indexInParent();
    for (std::size_t i = index; i-- > 0;) {
      auto* c = correspondingIn(*node.parent->children[i]);
      if (c && c->parent == &targetParent) return c->indexInParent() + 1;
    }
    return targetParent.children.size();
  }

  AssetNode& counterpartParent(const AssetNode& node) {
    const auto& parent = *node.parent;
    if (&parent == &source_) return target_;
    if (auto* hit = correspondingIn(parent)) return *hit;
    if (parent.kind == AssetKind::Folder) {
      if (auto* hit = samePath(parent)) return *hit;
    }
    return cloneInto(parent, true);
  }

  AssetNode& cloneInto(const AssetNode& node, bool shallow) {
    auto& parent = counterpartParent(node);
    auto index = defaultIndex(node, parent);
    auto name = isFilesystemKind(node.kind) ? uniqueCloneName(parent, node.name) : node.name;
    return ctx_.cloneAsset(node, parent, index, name, shallow);
  }

  void noteSliceFiles(const AssetNode& node) {
    forEachNode(node, [&](const AssetNode& n) {
      if (n.kind != AssetKind::File) return;
      if (auto member = sliceFileOf(repositoryRelativePath(n))) sliceFiles_[member->first].insert(member->second);
    });
  }

  OpContext& ctx_;
  AssetTree& tree_;
  AssetNode& source_;
  AssetNode& target_;
  const IntegrationPlan& plan_;
  std::map<FeatureId, FeatureId> ids_;
  std::map<std::string, std::set<std::string>> sliceFiles_;
};

}  // namespace

OperationRecord applyCloneFeature(AssetTree& tree, const CloneFeatureOp& op, const LanguageAdapter* adapter) {
  static const MinilangAdapter fallbackAdapter;
  if (!adapter) adapter = &fallbackAdapter;
  auto source = resolveFeatureRef(tree, op.feature);
  auto* target = tree.repository(op.targetRepo);
  if (!target || target == source.repository || !repositoriesRelated(tree, *source.repository, *target)) {
    throw Error(Errc::UnrelatedRepositories,
                "'" + source.repository->name + "' and '" + op.targetRepo + "' did not originate from each other");
  }
  auto parent = resolveFeatureRef(tree, op.targetParent);
  if (parent.repository != target) throw Error(Errc::UnknownFeature, "target parent lies outside " + op.targetRepo);
  const auto& srcModel = *source.repository->featureModel;
  if (source.feature == srcModel.root().id) throw Error(Errc::CannotRemoveRoot, "root features are not cloned");
  for (auto id : srcModel.subtree(source.feature)) {
    const auto* f = srcModel.find(id);
    if (target->featureModel->findByLineage(f->lineage)) {
      throw Error(Errc::AlreadyPresent, "feature '" + f->name + "' already exists in " + op.targetRepo);
    }
  }

  OpContext ctx(tree, nextOpId(tree));
  FeatureCloner cloner(ctx, *source.repository, *target, op.plan);
  cloner.cloneFeatures(*srcModel.find(source.feature), parent.feature);
  cloner.cloneAssets();
  cloner.finishSlices(*adapter);

  json plan = json::object();
  for (const auto& [k, v] : op.plan.indices) plan[k] = v;
  json params{{"feature", op.feature.str()},
              {"sourceRepo", source.repository->name},
              {"targetRepo", op.targetRepo},
              {"targetParent", op.targetParent.str()},
              {"plan", plan}};
  return finish(ctx, "CloneFeature", std::move(params));
}

// ---------------------------------------------------------------------------

OperationRecord applyOperation(AssetTree& tree, const CandidateOperation& op, const OperationEnv& env) {
  return std::visit(Overloaded{
                        [&](const RemoveFeatureOp& o) { return applyRemoveFeature(tree, o.feature); },
                        [&](const MutateOp& o) { return applyMutateAsset(tree, o.target, o.mutation); },
                        [&](const TransplantOp& o) { return applyTransplant(tree, o, env); },
                        [&](const CloneVariantOp& o) { return applyCloneVariant(tree, o.source, o.newName); },
                        [&](const CloneFeatureOp& o) { return applyCloneFeature(tree, o, env.adapter); },
                    },
                    op);
}

void commitRecord(AssetTree& tree, OperationRecord& record) {
  record.revisionBefore = tree.revision();
  record.revisionAfter = tree.revision() + 1;
  tree.setRevision(record.revisionAfter);
  tree.finalizeTraces();
}

void replayRecord(AssetTree& tree, const OperationRecord& record) {
  if (record.revisionBefore != tree.revision()) {
    throw Error(Errc::ReplayDivergence, record.opId + " expects revision " + std::to_string(record.revisionBefore) +
                                            ", tree is at " + std::to_string(tree.revision()));
  }
  executeRecord(tree, record, record.opId);
  tree.setRevision(record.revisionAfter);
  tree.finalizeTraces();
}

TransactionResult runInTransaction(AssetTree& tree, const CandidateOperation& op, const OperationEnv& env,
                                   const CompilabilityChecker& checker, std::int64_t iteration) {
  AssetTree work(tree);
  OperationRecord record;
  try {
    record = applyOperation(work, op, env);
  } catch (const Error& e) {
    return RolledBack{e.what()};
  }
  auto verdict = checker.check(work);
  if (!verdict.ok) return RolledBack{"not compilable: " + verdict.reason};
  commitRecord(work, record);
  record.iteration = iteration;
  tree = std::move(work);
  return Committed{std::move(record)};
}

}  // namespace varhist
