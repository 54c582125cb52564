#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "varhist/model.hpp"

namespace varhist {

/// On-disk form of one revision: every directory and file below the
/// snapshot root, keyed by slash-separated relative path.
struct SnapshotContent {
  std::set<std::string> directories;
  std::map<std::string, std::string> files;

  bool operator==(const SnapshotContent&) const = default;
};

SnapshotContent materialize(const AssetTree& tree);
/// Replaces `dir` with the materialized tree.  Throws SnapshotIoError.
void writeSnapshot(const AssetTree& tree, const std::filesystem::path& dir);
void writeSnapshot(const SnapshotContent& content, const std::filesystem::path& dir);
SnapshotContent readSnapshot(const std::filesystem::path& dir);

/// Repository node for a directory.  Entries are taken in lexicographic
/// order; names starting with '.' are skipped.  The repository gets a
/// feature model whose root feature carries the repository name.
std::unique_ptr<AssetNode> loadRepository(const std::filesystem::path& dir, const std::string& name);
/// Tree whose repositories are the subdirectories of `dir`.
AssetTree parseSnapshot(const std::filesystem::path& dir);

/// Lines of every file per repository: repository -> relative path -> lines.
using RepositoryFiles = std::map<std::string, std::map<std::string, std::vector<std::string>>>;
RepositoryFiles repositoryFiles(const AssetTree& tree);
RepositoryFiles repositoryFiles(const SnapshotContent& content);

}  // namespace varhist
