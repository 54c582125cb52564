#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "varhist/adapter.hpp"
#include "varhist/model.hpp"
#include "varhist/snapshot.hpp"

namespace varhist {

struct CheckResult {
  bool ok = true;
  std::string reason;

  static CheckResult pass() { return {}; }
  static CheckResult fail(std::string why) { return {false, std::move(why)}; }
};

class CompilabilityChecker {
 public:
  virtual ~CompilabilityChecker() = default;
  virtual std::string_view name() const = 0;
  virtual CheckResult check(const AssetTree& tree) const = 0;
  virtual CheckResult checkDirectory(const std::filesystem::path& snapshotDir) const = 0;
};

/// Per repository: every source file is structurally sound and every import
/// resolves against the repository's source and test roots, the source roots
/// of its declared local slices, or declared external dependencies.  Each
/// declared local slice needs its own manifest.
class BundledChecker final : public CompilabilityChecker {
 public:
  explicit BundledChecker(const LanguageAdapter& adapter) : adapter_(adapter) {}
  std::string_view name() const override { return "bundled"; }
  CheckResult check(const AssetTree& tree) const override;
  CheckResult checkDirectory(const std::filesystem::path& snapshotDir) const override;
  CheckResult checkFiles(const RepositoryFiles& files) const;

 private:
  const LanguageAdapter& adapter_;
};

/// Runs `sh -c <command>` inside the snapshot directory; exit status 0 means
/// compilable.  The child is killed after `timeoutSeconds`.
class ExternalCommandChecker final : public CompilabilityChecker {
 public:
  ExternalCommandChecker(std::string command, double timeoutSeconds)
      : command_(std::move(command)), timeout_(timeoutSeconds) {}
  std::string_view name() const override { return "external"; }
  CheckResult check(const AssetTree& tree) const override;
  CheckResult checkDirectory(const std::filesystem::path& snapshotDir) const override;

 private:
  std::string command_;
  double timeout_;
};

CheckResult checkCompilable(const std::filesystem::path& snapshotDir, const CompilabilityChecker& checker);

}  // namespace varhist
