#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "varhist/adapter.hpp"
#include "varhist/donor.hpp"
#include "varhist/model.hpp"
#include "varhist/record.hpp"

namespace varhist {

/// `slices/<donor>/src/<file>` below a repository.
std::string slicePath(const std::string& donorId, const std::string& file);
/// (donor, file) for a repository-relative path inside a slice source tree.
std::optional<std::pair<std::string, std::string>> sliceFileOf(const std::string& repoRelative);
/// True for nodes inside a repository's slice directory.
bool insideSlice(const AssetNode& node);

/// Lines before which an organ may be implanted: closing lines of
/// method-level blocks in source files outside the slice directory.  Only
/// lines that are direct children of their file qualify.
std::vector<AssetNode*> insertionPoints(const AssetNode& repo, const LanguageAdapter& adapter);

json organToJson(const Organ& organ);
Organ organFromJson(const json& j);

/// Smallest free `name`, `name_2`, `name_3`, ... among the children of
/// `parent` in `model`.
std::string uniqueFeatureName(const FeatureModel& model, FeatureId parent, const std::string& name);

/// Folder chain below `base`, created as needed.  A non-folder in the way
/// raises SliceConflict.
AssetNode& ensureFolders(OpContext& ctx, AssetNode& base, const std::vector<std::string>& parts);
/// Adds `donorId` to the locals of the repository's manifest, creating the
/// manifest when the repository has none.
void declareLocalSlice(OpContext& ctx, AssetNode& repo, const std::string& donorId,
                       const LanguageAdapter& adapter);
/// Adds the slice manifest or merges the dependencies of `fragment` into
/// the existing one.
void mergeSliceManifest(OpContext& ctx, AssetNode& repo, const std::string& donorId,
                        const ManifestModel& fragment, const LanguageAdapter& adapter);

struct Integration {
  FeatureId feature = 0;
  std::vector<AssetNode*> blocks;
  std::vector<AssetNode*> sliceFiles;
};

/// Implants `organ` in front of `insertionLine` in five recorded steps:
/// ImplantOrgan, AddSliceFiles, UpdateHostManifest, AddSliceManifest and
/// MapFeature.
Integration integrateOrgan(OpContext& ctx, AssetNode& repo, AssetNode& insertionLine,
                           const Organ& organ, const LanguageAdapter& adapter);

}  // namespace varhist
