#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "varhist/adapter.hpp"

namespace varhist {

/// A test of a donor project that may be transplanted as a feature.
struct TestCandidate {
  std::string id;       ///< `<donor>:<test file>:<name>`, unique across donors
  std::string donorId;
  std::string name;
  std::string file;     ///< test file path relative to the donor root
  std::size_t markerLine = 0;
  std::size_t bodyBegin = 0;  ///< first body line (after the header)
  std::size_t bodyEnd = 0;    ///< one past the last body line
  std::vector<std::string> imports;  ///< import statements of the test file
  std::vector<std::string> body;
  bool modular = false;

  bool operator==(const TestCandidate&) const = default;
};

/// File-level dependency graph of a donor's source set.
struct ModuleGraph {
  std::map<std::string, std::set<std::string>> edges;       ///< file -> files
  std::map<std::string, std::set<std::string>> externals;   ///< file -> external deps
  std::map<std::string, std::set<std::string>> unresolved;  ///< file -> unresolvable imports
};

struct DonorProject {
  std::string id;
  std::filesystem::path rootPath;
  ManifestModel manifest;
  /// Source files keyed by path relative to the source root.
  std::map<std::string, std::vector<std::string>> sourceFiles;
  /// Test files keyed by path relative to the test root.
  std::map<std::string, std::vector<std::string>> testFiles;
  std::vector<TestCandidate> testCandidates;
  ModuleGraph moduleDeps;

  const TestCandidate* findTest(std::string_view testId) const;
};

struct ImportTarget {
  enum class Kind { SourceFile, External, TestFile, Unresolved };
  Kind kind = Kind::Unresolved;
  std::string value;
};

ImportTarget resolveImport(const LanguageAdapter& adapter, const DonorProject& donor,
                           std::string_view module);

/// Builds a donor from files already in memory (used by loadDonor and by
/// tests that synthesize donors).
DonorProject makeDonor(std::string id, std::filesystem::path rootPath, ManifestModel manifest,
                       std::map<std::string, std::vector<std::string>> sourceFiles,
                       std::map<std::string, std::vector<std::string>> testFiles,
                       const LanguageAdapter& adapter);

/// Reads a donor directory (`project.manifest` plus source and test roots).
/// Throws DonorIoError when the layout is unreadable.
DonorProject loadDonor(const std::filesystem::path& root, const LanguageAdapter& adapter);

/// Candidates in (file, line) order with their modular flag.
std::vector<TestCandidate> scanDonorTests(const DonorProject& donor, const LanguageAdapter& adapter);

/// The transplantable unit: a modular test, the imports of its file and the
/// donor files it transitively depends on.
struct Organ {
  std::string donorId;
  TestCandidate test;
  std::vector<std::string> inFileDeps;
  std::set<std::string> sliceFiles;
  std::map<std::string, std::vector<std::string>> sliceContent;
  ManifestModel manifestFragment;

  bool operator==(const Organ&) const = default;
};

/// Closure of `start` over the donor's module graph, plus the externals the
/// reached files declare.  Throws MissingDependency if a reached file has an
/// unresolvable import.
std::set<std::string> sliceClosure(const DonorProject& donor, const std::set<std::string>& start,
                                   std::set<std::string>* externalsOut = nullptr);

Organ extractOrgan(const DonorProject& donor, std::string_view testId, const LanguageAdapter& adapter);

}  // namespace varhist
