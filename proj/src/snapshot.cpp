#include "varhist/snapshot.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "varhist/errors.hpp"
#include "varhist/text.hpp"

namespace fs = std::filesystem;

namespace varhist {

namespace {

void collect(const AssetNode& node, const std::string& prefix, SnapshotContent& out) {
  for (const auto& child : node.children) {
    if (!isFilesystemKind(child->kind)) continue;
    auto path = prefix.empty() ? child->name : prefix + "/" + child->name;
    if (child->kind == AssetKind::File) {
      out.files.emplace(path, joinLines(materializeLines(*child)));
    } else {
      out.directories.insert(path);
      collect(*child, path, out);
    }
  }
}

std::vector<fs::directory_entry> sortedEntries(const fs::path& dir) {
  std::vector<fs::directory_entry> entries;
  std::error_code ec;
  for (auto it = fs::directory_iterator(dir, ec); !ec && it != fs::directory_iterator(); it.increment(ec)) {
    entries.push_back(*it);
  }
  if (ec) throw Error(Errc::SnapshotIoError, "cannot list " + dir.string() + ": " + ec.message());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return a.path().filename().string() < b.path().filename().string();
  });
  return entries;
}

std::string readAll(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::SnapshotIoError, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void loadChildren(AssetNode& parent, const fs::path& dir) {
  for (const auto& entry : sortedEntries(dir)) {
    auto name = entry.path().filename().string();
    if (name.empty() || name.front() == '.') continue;
    if (entry.is_directory()) {
      auto folder = std::make_unique<AssetNode>(AssetKind::Folder, name);
      loadChildren(*folder, entry.path());
      folder->parent = &parent;
      parent.children.push_back(std::move(folder));
    } else if (entry.is_regular_file()) {
      auto file = std::make_unique<AssetNode>(AssetKind::File, name);
      for (auto& line : splitLines(readAll(entry.path()))) {
        auto l = AssetNode::makeLine(std::move(line));
        l->parent = file.get();
        file->children.push_back(std::move(l));
      }
      file->parent = &parent;
      parent.children.push_back(std::move(file));
    }
  }
}

}  // namespace

SnapshotContent materialize(const AssetTree& tree) {
  SnapshotContent out;
  collect(tree.root(), "", out);
  return out;
}

void writeSnapshot(const SnapshotContent& content, const fs::path& dir) {
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::SnapshotIoError, "cannot create " + dir.string() + ": " + ec.message());
  for (const auto& d : content.directories) {
    fs::create_directories(dir / d, ec);
    if (ec) throw Error(Errc::SnapshotIoError, "cannot create " + (dir / d).string() + ": " + ec.message());
  }
  for (const auto& [path, text] : content.files) {
    std::ofstream out(dir / path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw Error(Errc::SnapshotIoError, "cannot write " + (dir / path).string());
  }
}

void writeSnapshot(const AssetTree& tree, const fs::path& dir) { writeSnapshot(materialize(tree), dir); }

SnapshotContent readSnapshot(const fs::path& dir) {
  SnapshotContent out;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(Errc::SnapshotIoError, dir.string() + " is not a directory");
  for (auto it = fs::recursive_directory_iterator(dir, ec); !ec && it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    auto rel = fs::relative(it->path(), dir).generic_string();
    if (it->is_directory()) {
      out.directories.insert(rel);
    } else if (it->is_regular_file()) {
      out.files.emplace(rel, readAll(it->path()));
    }
  }
  if (ec) throw Error(Errc::SnapshotIoError, "cannot list " + dir.string() + ": " + ec.message());
  return out;
}

std::unique_ptr<AssetNode> loadRepository(const fs::path& dir, const std::string& name) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(Errc::SnapshotIoError, dir.string() + " is not a directory");
  auto repo = std::make_unique<AssetNode>(AssetKind::Repository, name);
  repo->featureModel = FeatureModel(Feature{0, name, "", {}});
  loadChildren(*repo, dir);
  return repo;
}

AssetTree parseSnapshot(const fs::path& dir) {
  AssetTree tree;
  for (const auto& entry : sortedEntries(dir)) {
    auto name = entry.path().filename().string();
    if (!entry.is_directory()) {
      throw Error(Errc::SnapshotIoError, "unexpected file '" + name + "' at the snapshot root");
    }
    auto repo = loadRepository(entry.path(), name);
    repo->featureModel->root().id = tree.newFeatureId();
    tree.insert(tree.root(), tree.root().children.size(), std::move(repo));
  }
  return tree;
}

RepositoryFiles repositoryFiles(const AssetTree& tree) {
  RepositoryFiles out;
  for (const auto* repo : tree.repositories()) {
    auto& files = out[repo->name];
    forEachNode(*repo, [&](const AssetNode& n) {
      if (n.kind == AssetKind::File) files.emplace(repositoryRelativePath(n), materializeLines(n));
    });
  }
  return out;
}

RepositoryFiles repositoryFiles(const SnapshotContent& content) {
  RepositoryFiles out;
  for (const auto& d : content.directories) {
    if (d.find('/') == std::string::npos) out[d];
  }
  for (const auto& [path, text] : content.files) {
    auto slash = path.find('/');
    if (slash == std::string::npos) continue;
    out[path.substr(0, slash)].emplace(path.substr(slash + 1), splitLines(text));
  }
  return out;
}

}  // namespace varhist
