#include "varhist/transplant.hpp"

#include <algorithm>

#include "varhist/addressing.hpp"
#include "varhist/errors.hpp"
#include "varhist/text.hpp"

namespace varhist {

namespace {

constexpr std::string_view kSliceSourceRoot = "src";

std::vector<std::string> splitSlash(const std::string& path) {
  std::vector<std::string> parts;
  for (auto& p : splitList(path, '/')) parts.push_back(std::move(p));
  return parts;
}

std::unique_ptr<AssetNode> fileNode(const std::string& name, const std::vector<std::string>& lines) {
  auto file = std::make_unique<AssetNode>(AssetKind::File, name);
  for (const auto& line : lines) {
    auto l = AssetNode::makeLine(line);
    l->parent = file.get();
    file->children.push_back(std::move(l));
  }
  return file;
}

std::unique_ptr<AssetNode> blockNode(const std::string& name, const std::vector<std::string>& lines) {
  auto block = fileNode(name, lines);
  block->kind = AssetKind::Block;
  return block;
}

/// Rewrites (or appends) the `locals:` line so that it declares `donorId`.
std::vector<std::string> withLocal(const std::vector<std::string>& lines, const std::string& donorId) {
  auto out = lines;
  for (auto& line : out) {
    auto t = trim(line);
    if (t.rfind("locals", 0) != 0) continue;
    auto rest = trim(t.substr(6));
    if (rest.empty() || rest.front() != ':') continue;
    auto items = splitList(rest.substr(1), ',');
    items.push_back(donorId);
    line = "locals: ";
    for (std::size_t i = 0; i < items.size(); ++i) line += (i ? ", " : "") + items[i];
    return out;
  }
  out.push_back("locals: " + donorId);
  return out;
}

}  // namespace

std::string slicePath(const std::string& donorId, const std::string& file) {
  return std::string(kSliceDirectory) + "/" + donorId + "/" + std::string(kSliceSourceRoot) + "/" + file;
}

std::optional<std::pair<std::string, std::string>> sliceFileOf(const std::string& repoRelative) {
  auto parts = splitSlash(repoRelative);
  if (parts.size() < 4 || parts[0] != kSliceDirectory || parts[2] != kSliceSourceRoot) return std::nullopt;
  std::string file;
  for (std::size_t i = 3; i < parts.size(); ++i) file += (i > 3 ? "/" : "") + parts[i];
  return std::make_pair(parts[1], file);
}

bool insideSlice(const AssetNode& node) {
  auto rel = repositoryRelativePath(*filesystemAnchor(node));
  return rel == kSliceDirectory || rel.rfind(std::string(kSliceDirectory) + "/", 0) == 0;
}

std::vector<AssetNode*> insertionPoints(const AssetNode& repo, const LanguageAdapter& adapter) {
  std::vector<AssetNode*> out;
  forEachNode(const_cast<AssetNode&>(repo), [&](AssetNode& file) {
    if (file.kind != AssetKind::File || !adapter.isSourceFile(file.name) || insideSlice(file)) return;
    auto nodes = lineNodes(file);
    std::vector<std::string> lines;
    lines.reserve(nodes.size());
    for (auto* n : nodes) lines.push_back(n->text);
    for (auto i : adapter.insertionLines(lines)) {
      if (nodes[i]->parent == &file) out.push_back(nodes[i]);
    }
  });
  return out;
}

json organToJson(const Organ& organ) {
  json test;
  test["id"] = organ.test.id;
  test["donor"] = organ.test.donorId;
  test["name"] = organ.test.name;
  test["file"] = organ.test.file;
  test["markerLine"] = organ.test.markerLine;
  test["bodyBegin"] = organ.test.bodyBegin;
  test["bodyEnd"] = organ.test.bodyEnd;
  test["imports"] = organ.test.imports;
  test["body"] = organ.test.body;
  test["modular"] = organ.test.modular;
  json j;
  j["donor"] = organ.donorId;
  j["test"] = std::move(test);
  j["inFileDeps"] = organ.inFileDeps;
  auto files = json::array();
  for (const auto& [path, lines] : organ.sliceContent) {
    files.push_back(json{{"kind", "File"}, {"name", path}, {"children", lines}});
  }
  j["sliceFiles"] = std::move(files);
  j["manifest"] = json{{"name", organ.manifestFragment.name}, {"deps", organ.manifestFragment.deps}};
  return j;
}

Organ organFromJson(const json& j) {
  try {
    Organ organ;
    organ.donorId = j.at("donor").get<std::string>();
    const auto& t = j.at("test");
    organ.test.id = t.at("id").get<std::string>();
    organ.test.donorId = t.at("donor").get<std::string>();
    organ.test.name = t.at("name").get<std::string>();
    organ.test.file = t.at("file").get<std::string>();
    organ.test.markerLine = t.at("markerLine").get<std::size_t>();
    organ.test.bodyBegin = t.at("bodyBegin").get<std::size_t>();
    organ.test.bodyEnd = t.at("bodyEnd").get<std::size_t>();
    organ.test.imports = t.at("imports").get<std::vector<std::string>>();
    organ.test.body = t.at("body").get<std::vector<std::string>>();
    organ.test.modular = t.at("modular").get<bool>();
    organ.inFileDeps = j.at("inFileDeps").get<std::vector<std::string>>();
    for (const auto& f : j.at("sliceFiles")) {
      auto name = f.at("name").get<std::string>();
      organ.sliceFiles.insert(name);
      organ.sliceContent.emplace(name, f.at("children").get<std::vector<std::string>>());
    }
    organ.manifestFragment.name = j.at("manifest").at("name").get<std::string>();
    organ.manifestFragment.deps = j.at("manifest").at("deps").get<std::vector<std::string>>();
    return organ;
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedRecord, std::string("bad organ dump: ") + e.what());
  }
}

std::string uniqueFeatureName(const FeatureModel& model, FeatureId parent, const std::string& name) {
  const auto* p = model.find(parent);
  if (!p) throw Error(Errc::UnknownFeature, "parent feature not in model");
  auto taken = [&](const std::string& candidate) {
    return std::any_of(p->children.begin(), p->children.end(),
                       [&](const Feature& c) { return c.name == candidate; });
  };
  if (!taken(name)) return name;
  for (int n = 2;; ++n) {
    auto candidate = name + "_" + std::to_string(n);
    if (!taken(candidate)) return candidate;
  }
}

AssetNode& ensureFolders(OpContext& ctx, AssetNode& base, const std::vector<std::string>& parts) {
  AssetNode* cur = &base;
  for (const auto& part : parts) {
    if (auto* next = cur->childNamed(part)) {
      if (next->kind != AssetKind::Folder) {
        throw Error(Errc::SliceConflict, filesystemPath(*next) + " is not a folder");
      }
      cur = next;
      continue;
    }
    AssetNode folder(AssetKind::Folder, part);
    cur = &ctx.addAsset(*cur, cur->children.size(), folder);
  }
  return *cur;
}

void declareLocalSlice(OpContext& ctx, AssetNode& repo, const std::string& donorId,
                       const LanguageAdapter& adapter) {
  auto* manifest = repo.childNamed(kManifestFileName);
  if (!manifest) {
    ManifestModel m;
    m.name = repo.name;
    m.locals.push_back(donorId);
    auto proto = fileNode(std::string(kManifestFileName), splitLines(adapter.emitManifest(m)));
    ctx.addAsset(repo, repo.children.size(), *proto);
    return;
  }
  if (manifest->kind != AssetKind::File) {
    throw Error(Errc::SliceConflict, "repository manifest path is not a file");
  }
  auto lines = materializeLines(*manifest);
  auto model = adapter.parseManifest(joinLines(lines));
  if (std::find(model.locals.begin(), model.locals.end(), donorId) != model.locals.end()) return;
  ctx.setFileContent(*manifest, withLocal(lines, donorId));
}

void mergeSliceManifest(OpContext& ctx, AssetNode& repo, const std::string& donorId,
                        const ManifestModel& fragment, const LanguageAdapter& adapter) {
  auto& dir = ensureFolders(ctx, repo, {std::string(kSliceDirectory), donorId});
  auto* existing = dir.childNamed(kManifestFileName);
  if (!existing) {
    auto proto = fileNode(std::string(kManifestFileName), splitLines(adapter.emitManifest(fragment)));
    ctx.addAsset(dir, dir.children.size(), *proto);
    return;
  }
  if (existing->kind != AssetKind::File) throw Error(Errc::SliceConflict, "slice manifest path is not a file");
  auto current = adapter.parseManifest(joinLines(materializeLines(*existing)));
  if (current.name != fragment.name) {
    throw Error(Errc::SliceConflict, "slice manifest of '" + donorId + "' names '" + current.name +
                                         "', expected '" + fragment.name + "'");
  }
  bool changed = false;
  for (const auto& dep : fragment.deps) {
    if (std::find(current.deps.begin(), current.deps.end(), dep) == current.deps.end()) {
      current.deps.push_back(dep);
      changed = true;
    }
  }
  if (changed) ctx.setFileContent(*existing, splitLines(adapter.emitManifest(current)));
}

Integration integrateOrgan(OpContext& ctx, AssetNode& repo, AssetNode& insertionLine,
                           const Organ& organ, const LanguageAdapter& adapter) {
  auto& tree = ctx.tree();
  if (insertionLine.kind != AssetKind::Line || !insertionLine.parent ||
      insertionLine.parent->kind != AssetKind::File || repositoryOf(insertionLine) != &repo) {
    throw Error(Errc::ForbiddenInsertionPoint, "insertion point must be a line of a file in " + repo.name);
  }
  if (insideSlice(insertionLine)) {
    throw Error(Errc::ForbiddenInsertionPoint, "insertion point lies in a donor slice");
  }
  auto legal = insertionPoints(repo, adapter);
  if (std::find(legal.begin(), legal.end(), &insertionLine) == legal.end()) {
    throw Error(Errc::ForbiddenInsertionPoint, "line does not close a method-level block");
  }
  if (!repo.featureModel) throw Error(Errc::UnknownFeature, "repository has no feature model");

  Integration result;
  auto& file = *insertionLine.parent;
  const auto& donorId = organ.donorId;

  // (1) imports and guarded body become blocks in front of the closing line
  ctx.beginGroup("ImplantOrgan", json{{"test", organ.test.id}});
  std::size_t at = insertionLine.indexInParent();
  if (!organ.inFileDeps.empty()) {
    auto imports = blockNode("", organ.inFileDeps);
    result.blocks.push_back(&ctx.addAsset(file, at++, *imports));
  }
  auto body = blockNode(organ.test.name, adapter.guardWrap(organ.test.body));
  result.blocks.push_back(&ctx.addAsset(file, at, *body));
  ctx.endGroup();

  // (2) slice files: reused when present, cloned from a sibling repository
  // that already includes them, copied from the dump otherwise
  ctx.beginGroup("AddSliceFiles", json{{"donor", donorId}});
  for (const auto& [rel, lines] : organ.sliceContent) {
    auto path = splitSlash(slicePath(donorId, rel));
    auto* cur = &repo;
    for (std::size_t i = 0; cur && i < path.size(); ++i) cur = cur->childNamed(path[i]);
    if (cur) {
      if (cur->kind != AssetKind::File) throw Error(Errc::SliceConflict, filesystemPath(*cur) + " is not a file");
      result.sliceFiles.push_back(cur);
      continue;
    }
    std::vector<std::string> folders(path.begin(), path.end() - 1);
    auto& dir = ensureFolders(ctx, repo, folders);
    const AssetNode* origin = nullptr;
    if (auto d = tree.donors.find(donorId); d != tree.donors.end()) {
      for (auto* other : tree.repositories()) {
        if (other == &repo) continue;
        auto inc = d->second.includedIn.find(other->name);
        if (inc == d->second.includedIn.end() || !inc->second.count(rel)) continue;
        auto* candidate = findByPath(tree, filesystemPath(*other) + "/" + slicePath(donorId, rel));
        if (candidate && candidate->kind == AssetKind::File) {
          origin = candidate;
          break;
        }
      }
    }
    if (origin) {
      result.sliceFiles.push_back(&ctx.cloneAsset(*origin, dir, dir.children.size(), path.back()));
    } else {
      auto proto = fileNode(path.back(), lines);
      result.sliceFiles.push_back(&ctx.addAsset(dir, dir.children.size(), *proto));
    }
  }
  ctx.endGroup();

  // (3) the host manifest declares the slice
  ctx.beginGroup("UpdateHostManifest", json{{"donor", donorId}});
  declareLocalSlice(ctx, repo, donorId, adapter);
  ctx.endGroup();

  // (4) adapted donor manifest next to the slice sources
  ctx.beginGroup("AddSliceManifest", json{{"donor", donorId}});
  mergeSliceManifest(ctx, repo, donorId, organ.manifestFragment, adapter);
  ctx.endGroup();

  // (5) new feature below the root, mapped to everything introduced
  ctx.beginGroup("MapFeature", json{{"test", organ.test.id}});
  auto rootId = repo.featureModel->root().id;
  auto name = uniqueFeatureName(*repo.featureModel, rootId, organ.test.name);
  result.feature = ctx.addFeature(repo, rootId, name, organ.test.id);
  for (auto* block : result.blocks) ctx.mapAsset(*block, result.feature);
  for (auto* f : result.sliceFiles) ctx.mapAsset(*f, result.feature);
  if (!organ.sliceFiles.empty()) ctx.includeSlice(donorId, repo.name, organ.sliceFiles);
  ctx.endGroup();
  return result;
}

}  // namespace varhist
