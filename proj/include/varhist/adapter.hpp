#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace varhist {

inline constexpr std::string_view kManifestFileName = "project.manifest";
inline constexpr std::string_view kSliceDirectory = "slices";

/// Build manifest of a project: `key: value` lines.  Known keys are name,
/// srcdir, testdir, deps and locals (comma-separated lists); any other key is
/// kept verbatim in `extra`.
struct ManifestModel {
  std::string name;
  std::optional<std::string> srcdir;
  std::optional<std::string> testdir;
  std::vector<std::string> deps;
  std::vector<std::string> locals;
  std::vector<std::pair<std::string, std::string>> extra;

  std::string sourceRoot() const { return srcdir.value_or("src"); }
  std::string testRoot() const { return testdir.value_or("test"); }

  bool operator==(const ManifestModel&) const = default;
};

ManifestModel parseManifest(std::string_view text);
std::string emitManifest(const ManifestModel& manifest);
/// Keeps the project name, external dependencies and local slice
/// declarations; every other directive is dropped.
ManifestModel adaptManifest(const ManifestModel& manifest);

struct ImportDecl {
  std::string module;
  std::size_t line = 0;
};

/// A test found by scanning one file.  Lines are indices into that file.
struct TestBlock {
  std::string name;
  std::size_t markerLine = 0;
  std::size_t headerLine = 0;
  std::size_t closeLine = 0;
};

/// Language-specific services the transplant engine and the bundled checker
/// rely on.  Everything else in the generator is language independent.
class LanguageAdapter {
 public:
  virtual ~LanguageAdapter() = default;

  virtual std::string_view name() const = 0;
  virtual bool isSourceFile(std::string_view path) const = 0;
  /// Relative path (below a source root) of the file defining `module`.
  virtual std::string modulePath(std::string_view module) const = 0;

  virtual std::vector<ImportDecl> scanImports(const std::vector<std::string>& lines) const = 0;
  virtual std::vector<TestBlock> scanTests(const std::vector<std::string>& lines) const = 0;
  /// Symbols defined at the top level of a file.
  virtual std::set<std::string> definedSymbols(const std::vector<std::string>& lines) const = 0;
  /// Identifiers referenced by a code fragment.
  virtual std::set<std::string> symbolScan(const std::vector<std::string>& body) const = 0;
  /// Wraps a fragment so that failures inside it stay local.  The result is
  /// never shorter than the input.
  virtual std::vector<std::string> guardWrap(const std::vector<std::string>& body) const = 0;
  /// Line indices in front of which a fragment may be inserted so that it
  /// lands inside a method-level block.
  virtual std::vector<std::size_t> insertionLines(const std::vector<std::string>& lines) const = 0;
  /// Returns a description of the first structural defect, if any.
  virtual std::optional<std::string> structuralError(const std::vector<std::string>& lines) const = 0;

  virtual ManifestModel parseManifest(std::string_view text) const { return varhist::parseManifest(text); }
  virtual std::string emitManifest(const ManifestModel& m) const { return varhist::emitManifest(m); }
};

/// Bundled toy language.  Files end in `.mini`; `import a.b` lines declare
/// dependencies on module file `a/b.mini`; `@test` on its own line marks the
/// next brace-delimited block as a test; `guard { ... }` isolates failures.
class MinilangAdapter final : public LanguageAdapter {
 public:
  std::string_view name() const override { return "minilang"; }
  bool isSourceFile(std::string_view path) const override;
  std::string modulePath(std::string_view module) const override;
  std::vector<ImportDecl> scanImports(const std::vector<std::string>& lines) const override;
  std::vector<TestBlock> scanTests(const std::vector<std::string>& lines) const override;
  std::set<std::string> definedSymbols(const std::vector<std::string>& lines) const override;
  std::set<std::string> symbolScan(const std::vector<std::string>& body) const override;
  std::vector<std::string> guardWrap(const std::vector<std::string>& body) const override;
  std::vector<std::size_t> insertionLines(const std::vector<std::string>& lines) const override;
  std::optional<std::string> structuralError(const std::vector<std::string>& lines) const override;

  /// Net change of brace depth contributed by one line, ignoring string
  /// literals and `//` comments.
  static int braceDelta(std::string_view line);
};

}  // namespace varhist
