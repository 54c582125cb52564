#include "varhist/generators.hpp"

#include "varhist/addressing.hpp"
#include "varhist/errors.hpp"
#include "varhist/text.hpp"
#include "varhist/transplant.hpp"

namespace varhist {

std::vector<std::pair<const AssetNode*, FeatureId>> removableFeatures(const AssetTree& tree) {
  std::vector<std::pair<const AssetNode*, FeatureId>> out;
  for (const auto* repo : tree.repositories()) {
    if (!repo->featureModel) continue;
    for (const auto* f : repo->featureModel->all()) {
      if (f->id != repo->featureModel->root().id) out.emplace_back(repo, f->id);
    }
  }
  return out;
}

std::optional<CandidateOperation> genRemoveFeature(const AssetTree& tree, Rng& rng) {
  auto features = removableFeatures(tree);
  if (features.empty()) return std::nullopt;
  const auto& [repo, id] = features[rng.below(features.size())];
  return RemoveFeatureOp{makeFeatureLPQ(*repo, id)};
}

std::vector<const AssetNode*> mutableFiles(const AssetTree& tree) {
  std::vector<const AssetNode*> out;
  forEachNode(tree.root(), [&](const AssetNode& n) {
    if (n.kind == AssetKind::File && n.name != kManifestFileName) out.push_back(&n);
  });
  return out;
}

std::vector<std::string> folderLinePool(const AssetNode& file) {
  std::vector<std::string> pool;
  for (const auto& sibling : file.parent->children) {
    if (sibling->kind != AssetKind::File || sibling->name == kManifestFileName) continue;
    auto lines = materializeLines(*sibling);
    pool.insert(pool.end(), lines.begin(), lines.end());
  }
  return pool;
}

bool ineffectiveMutation(const Mutation& m, const std::string& currentLine) {
  switch (m.kind) {
    case Mutation::Kind::AddLine: return trim(m.donorLine).empty();
    case Mutation::Kind::ReplaceLine: return m.donorLine == currentLine;
    case Mutation::Kind::DeleteLine: return trim(currentLine).empty();
  }
  return false;
}

std::optional<CandidateOperation> genMutate(Mutation::Kind kind, const AssetTree& tree, Rng& rng,
                                            double discardProb) {
  auto files = mutableFiles(tree);
  if (files.empty()) return std::nullopt;
  const auto* file = files[rng.below(files.size())];
  auto lines = materializeLines(*file);
  if (lines.empty()) return std::nullopt;
  Mutation m;
  m.kind = kind;
  m.targetLine = rng.below(lines.size());
  if (kind != Mutation::Kind::DeleteLine) {
    auto pool = folderLinePool(*file);
    m.donorLine = pool[rng.below(pool.size())];
  }
  if (ineffectiveMutation(m, lines[m.targetLine]) && rng.chance(discardProb)) return std::nullopt;
  return MutateOp{makeAssetRef(tree, *file), m};
}

std::vector<const TestCandidate*> availableTests(const std::map<std::string, DonorProject>& donors,
                                                 const std::set<std::string>& consumed) {
  std::vector<const TestCandidate*> out;
  for (const auto& [id, donor] : donors) {
    for (const auto& t : donor.testCandidates) {
      if (t.modular && !consumed.count(t.id)) out.push_back(&t);
    }
  }
  return out;
}

std::optional<CandidateOperation> genTransplant(const AssetTree& tree, const GeneratorContext& ctx, Rng& rng) {
  if (!ctx.donors || !ctx.adapter || !ctx.consumed) return std::nullopt;
  auto tests = availableTests(*ctx.donors, *ctx.consumed);
  if (tests.empty()) return std::nullopt;
  std::vector<std::vector<AssetNode*>> points;
  for (const auto* repo : tree.repositories()) {
    auto p = insertionPoints(*repo, *ctx.adapter);
    if (!p.empty()) points.push_back(std::move(p));
  }
  if (points.empty()) return std::nullopt;
  const auto* test = tests[rng.below(tests.size())];
  const auto& repoPoints = points[rng.below(points.size())];
  const auto* point = repoPoints[rng.below(repoPoints.size())];
  ctx.consumed->insert(test->id);
  return TransplantOp{test->donorId, test->id, makeAssetRef(tree, *point)};
}

std::string nextVariantName(const AssetTree& tree, const std::string& source) {
  for (int n = 1;; ++n) {
    auto name = source + "_v" + std::to_string(n);
    if (!tree.repository(name)) return name;
  }
}

std::optional<CandidateOperation> genCloneVariant(const AssetTree& tree, Rng& rng) {
  auto repos = tree.repositories();
  if (repos.empty()) return std::nullopt;
  const auto* repo = repos[rng.below(repos.size())];
  return CloneVariantOp{makeAssetRef(tree, *repo), nextVariantName(tree, repo->name)};
}

std::vector<CloneFeatureCandidate> cloneFeatureCandidates(const AssetTree& tree) {
  std::vector<CloneFeatureCandidate> out;
  auto repos = tree.repositories();
  for (const auto* source : repos) {
    if (!source->featureModel) continue;
    for (const auto* target : repos) {
      if (source == target || !target->featureModel || !originatedFrom(tree, *source, *target)) continue;
      const auto& model = *source->featureModel;
      for (const auto* f : model.all()) {
        if (f->id == model.root().id) continue;
        bool fresh = true;
        for (auto id : model.subtree(f->id)) {
          fresh = fresh && !target->featureModel->findByLineage(model.find(id)->lineage);
        }
        if (fresh) out.push_back({source, target, f->id});
      }
    }
  }
  return out;
}

std::optional<CandidateOperation> genCloneFeature(const AssetTree& tree, Rng& rng) {
  auto candidates = cloneFeatureCandidates(tree);
  if (candidates.empty()) return std::nullopt;
  const auto& c = candidates[rng.below(candidates.size())];
  CloneFeatureOp op;
  op.feature = makeFeatureLPQ(*c.source, c.feature);
  op.targetRepo = c.target->name;
  op.targetParent = makeFeatureLPQ(*c.target, c.target->featureModel->root().id);
  return op;
}

std::optional<CandidateOperation> generate(std::string_view id, const AssetTree& tree, const GeneratorContext& ctx,
                                           Rng& rng) {
  if (id == "removeFeature") return genRemoveFeature(tree, rng);
  if (id == "mutAdd") return genMutate(Mutation::Kind::AddLine, tree, rng, ctx.sensibilityDiscardProb);
  if (id == "mutReplace") return genMutate(Mutation::Kind::ReplaceLine, tree, rng, ctx.sensibilityDiscardProb);
  if (id == "mutDelete") return genMutate(Mutation::Kind::DeleteLine, tree, rng, ctx.sensibilityDiscardProb);
  if (id == "transplant") return genTransplant(tree, ctx, rng);
  if (id == "cloneVariant") return genCloneVariant(tree, rng);
  if (id == "cloneFeature") return genCloneFeature(tree, rng);
  throw Error(Errc::BadDistribution, "unknown generator '" + std::string(id) + "'");
}

}  // namespace varhist
