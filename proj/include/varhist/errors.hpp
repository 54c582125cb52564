#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace varhist {

enum class Errc {
  UnknownFeature,
  SelfTrace,
  UnrelatedRepositories,
  NotInTree,
  StaleRef,
  DanglingRef,
  CannotRemoveRoot,
  BadIndex,
  NotMutable,
  DuplicateRepository,
  AlreadyPresent,
  DonorIoError,
  NotModular,
  MissingDependency,
  ForbiddenInsertionPoint,
  SliceConflict,
  ManifestParseError,
  BadDistribution,
  BadConfig,
  InvalidInitialSystem,
  SnapshotIoError,
  LedgerIoError,
  ReplayDivergence,
  MalformedRecord,
};

std::string_view to_string(Errc code);

/// Every failure raised by the library carries one of the codes above so
/// callers (transactions, the CLI) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace varhist
