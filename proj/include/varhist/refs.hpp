#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace varhist {

using Revision = std::int64_t;

/// Address of an asset valid in exactly one revision.
///
/// `path` names the deepest enclosing filesystem asset (repository, folder or
/// file) relative to the synthetic root, with "/" denoting the root itself.
/// `indexPath` descends from that asset through child indices to sub-file
/// assets and is empty for filesystem assets.
///
/// Textual form: `<revision>:<path>#<i0.i1...>`.
struct AssetRef {
  Revision revision = 0;
  std::string path;
  std::vector<std::size_t> indexPath;

  std::string str() const;
  static AssetRef parse(std::string_view text);

  auto operator<=>(const AssetRef&) const = default;
};

/// A feature identified by the repository owning its model and its
/// least-partially-qualified name path.  Textual form: `<repoPath>!<a/b/c>`.
struct FeatureRef {
  std::string repoPath;
  std::vector<std::string> lpq;

  std::string str() const;
  std::string lpqString() const;
  static FeatureRef parse(std::string_view text);

  auto operator<=>(const FeatureRef&) const = default;
};

}  // namespace varhist
