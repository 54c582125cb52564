#include "varhist/donor.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

#include "varhist/errors.hpp"
#include "varhist/text.hpp"

namespace fs = std::filesystem;

namespace varhist {

namespace {

bool isExternal(const ManifestModel& manifest, std::string_view module) {
  for (const auto& dep : manifest.deps) {
    if (module == dep) return true;
    if (module.size() > dep.size() && module.substr(0, dep.size()) == dep && module[dep.size()] == '.') {
      return true;
    }
  }
  return false;
}

std::string readFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::DonorIoError, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::map<std::string, std::vector<std::string>> readTree(const fs::path& root) {
  std::map<std::string, std::vector<std::string>> files;
  if (!fs::exists(root)) return files;
  std::error_code ec;
  for (auto it = fs::recursive_directory_iterator(root, ec); it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    if (ec) throw Error(Errc::DonorIoError, "cannot list " + root.string() + ": " + ec.message());
    if (!it->is_regular_file()) continue;
    auto rel = fs::relative(it->path(), root).generic_string();
    files.emplace(rel, splitLines(readFile(it->path())));
  }
  if (ec) throw Error(Errc::DonorIoError, "cannot list " + root.string() + ": " + ec.message());
  return files;
}

}  // namespace

const TestCandidate* DonorProject::findTest(std::string_view testId) const {
  for (const auto& t : testCandidates) {
    if (t.id == testId) return &t;
  }
  return nullptr;
}

ImportTarget resolveImport(const LanguageAdapter& adapter, const DonorProject& donor,
                           std::string_view module) {
  auto path = adapter.modulePath(module);
  if (donor.sourceFiles.count(path)) return {ImportTarget::Kind::SourceFile, path};
  if (donor.testFiles.count(path)) return {ImportTarget::Kind::TestFile, path};
  if (isExternal(donor.manifest, module)) return {ImportTarget::Kind::External, std::string(module)};
  return {ImportTarget::Kind::Unresolved, std::string(module)};
}

DonorProject makeDonor(std::string id, fs::path rootPath, ManifestModel manifest,
                       std::map<std::string, std::vector<std::string>> sourceFiles,
                       std::map<std::string, std::vector<std::string>> testFiles,
                       const LanguageAdapter& adapter) {
  DonorProject donor;
  donor.id = std::move(id);
  donor.rootPath = std::move(rootPath);
  donor.manifest = std::move(manifest);
  donor.sourceFiles = std::move(sourceFiles);
  donor.testFiles = std::move(testFiles);

  for (const auto& [file, lines] : donor.sourceFiles) {
    if (!adapter.isSourceFile(file)) continue;
    auto& edges = donor.moduleDeps.edges[file];
    for (const auto& imp : adapter.scanImports(lines)) {
      auto target = resolveImport(adapter, donor, imp.module);
      switch (target.kind) {
        case ImportTarget::Kind::SourceFile: edges.insert(target.value); break;
        case ImportTarget::Kind::External: donor.moduleDeps.externals[file].insert(target.value); break;
        case ImportTarget::Kind::TestFile:
        case ImportTarget::Kind::Unresolved: donor.moduleDeps.unresolved[file].insert(imp.module); break;
      }
    }
  }
  donor.testCandidates = scanDonorTests(donor, adapter);
  return donor;
}

DonorProject loadDonor(const fs::path& root, const LanguageAdapter& adapter) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw Error(Errc::DonorIoError, "donor '" + root.string() + "' is not a directory");
  auto manifestPath = root / std::string(kManifestFileName);
  if (!fs::is_regular_file(manifestPath, ec)) {
    throw Error(Errc::DonorIoError, "donor '" + root.string() + "' has no " + std::string(kManifestFileName));
  }
  auto manifest = adapter.parseManifest(readFile(manifestPath));
  auto id = manifest.name.empty() ? root.filename().string() : manifest.name;
  if (id.empty()) id = fs::absolute(root).lexically_normal().filename().string();
  if (manifest.name.empty()) manifest.name = id;
  auto sources = readTree(root / manifest.sourceRoot());
  auto tests = readTree(root / manifest.testRoot());
  return makeDonor(id, root, std::move(manifest), std::move(sources), std::move(tests), adapter);
}

std::vector<TestCandidate> scanDonorTests(const DonorProject& donor, const LanguageAdapter& adapter) {
  std::vector<TestCandidate> out;
  const auto testRoot = donor.manifest.testRoot();
  for (const auto& [file, lines] : donor.testFiles) {
    if (!adapter.isSourceFile(file)) continue;
    auto blocks = adapter.scanTests(lines);
    if (blocks.empty()) continue;
    std::vector<std::string> imports;
    for (const auto& imp : adapter.scanImports(lines)) imports.push_back("import " + imp.module);
    auto fileSymbols = adapter.definedSymbols(lines);
    for (const auto& block : blocks) {
      TestCandidate c;
      c.donorId = donor.id;
      c.name = block.name;
      c.file = testRoot + "/" + file;
      c.id = donor.id + ":" + c.file + ":" + block.name;
      c.markerLine = block.markerLine;
      c.bodyBegin = block.headerLine + 1;
      c.bodyEnd = block.closeLine;
      c.imports = imports;
      c.body.assign(lines.begin() + static_cast<std::ptrdiff_t>(c.bodyBegin),
                    lines.begin() + static_cast<std::ptrdiff_t>(c.bodyEnd));
      auto referenced = adapter.symbolScan(c.body);
      c.modular = std::none_of(referenced.begin(), referenced.end(), [&](const std::string& s) {
        return s != block.name && fileSymbols.count(s) > 0;
      });
      out.push_back(std::move(c));
    }
  }
  return out;
}

std::set<std::string> sliceClosure(const DonorProject& donor, const std::set<std::string>& start,
                                   std::set<std::string>* externalsOut) {
  std::set<std::string> reached;
  std::deque<std::string> queue(start.begin(), start.end());
  while (!queue.empty()) {
    auto file = queue.front();
    queue.pop_front();
    if (!reached.insert(file).second) continue;
    if (auto it = donor.moduleDeps.unresolved.find(file); it != donor.moduleDeps.unresolved.end() &&
                                                          !it->second.empty()) {
      throw Error(Errc::MissingDependency,
                  file + " imports '" + *it->second.begin() + "' which is neither a source file nor a declared dependency");
    }
    if (externalsOut) {
      if (auto it = donor.moduleDeps.externals.find(file); it != donor.moduleDeps.externals.end()) {
        externalsOut->insert(it->second.begin(), it->second.end());
      }
    }
    if (auto it = donor.moduleDeps.edges.find(file); it != donor.moduleDeps.edges.end()) {
      for (const auto& next : it->second) {
        if (!reached.count(next)) queue.push_back(next);
      }
    }
  }
  return reached;
}

Organ extractOrgan(const DonorProject& donor, std::string_view testId, const LanguageAdapter& adapter) {
  const auto* test = donor.findTest(testId);
  if (!test) throw Error(Errc::DonorIoError, "donor '" + donor.id + "' has no test '" + std::string(testId) + "'");
  if (!test->modular) throw Error(Errc::NotModular, test->id + " references file-local symbols");

  std::set<std::string> start;
  std::set<std::string> externals;
  for (const auto& statement : test->imports) {
    auto module = std::string(trim(std::string_view(statement).substr(7)));
    auto target = resolveImport(adapter, donor, module);
    switch (target.kind) {
      case ImportTarget::Kind::SourceFile: start.insert(target.value); break;
      case ImportTarget::Kind::External: externals.insert(target.value); break;
      case ImportTarget::Kind::TestFile:
        throw Error(Errc::MissingDependency, test->id + " depends on '" + module + "' from the test source set");
      case ImportTarget::Kind::Unresolved:
        throw Error(Errc::MissingDependency, test->id + " imports unresolvable '" + module + "'");
    }
  }

  Organ organ;
  organ.donorId = donor.id;
  organ.test = *test;
  organ.inFileDeps = test->imports;
  organ.sliceFiles = sliceClosure(donor, start, &externals);
  for (const auto& file : organ.sliceFiles) organ.sliceContent.emplace(file, donor.sourceFiles.at(file));

  // Only externals actually reached by the organ survive; the comparison is
  // against the import names, which may extend a declared dependency.
  organ.manifestFragment = adaptManifest(donor.manifest);
  std::vector<std::string> deps;
  for (const auto& dep : donor.manifest.deps) {
    bool used = std::any_of(externals.begin(), externals.end(), [&](const std::string& module) {
      return module == dep || (module.size() > dep.size() && module.compare(0, dep.size(), dep) == 0 &&
                               module[dep.size()] == '.');
    });
    if (used) deps.push_back(dep);
  }
  organ.manifestFragment.deps = std::move(deps);
  organ.manifestFragment.locals.clear();
  return organ;
}

}  // namespace varhist
