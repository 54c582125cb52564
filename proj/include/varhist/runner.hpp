#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "varhist/checker.hpp"
#include "varhist/config.hpp"
#include "varhist/donor.hpp"
#include "varhist/operations.hpp"

namespace varhist {

struct GeneratorStats {
  std::int64_t selected = 0;
  std::int64_t committed = 0;
  std::int64_t rolledBack = 0;
  std::int64_t noCandidate = 0;
  std::int64_t skipped = 0;
};

struct RunSummary {
  std::int64_t iterations = 0;
  std::int64_t committed = 0;
  std::int64_t rolledBack = 0;
  std::int64_t noCandidate = 0;
  std::int64_t skipped = 0;
  Revision finalRevision = 0;
  std::string stoppedBy;  ///< maxIterations | termination
  std::size_t consumedTests = 0;
  std::map<std::string, GeneratorStats> perGenerator;
};

json toJson(const RunSummary& summary);

/// One transaction attempt, as written to the debug log.
struct Attempt {
  std::int64_t iteration = 0;
  int attempt = 0;
  std::string generator;
  std::string outcome;  ///< committed | rolledBack | noCandidate
  std::string kind;
  std::string reason;
};

/// Receives the history as it is produced.
class HistorySink {
 public:
  virtual ~HistorySink() = default;
  virtual void begin(const AssetTree& /*initial*/, const RunConfig& /*config*/, const json& /*inputs*/) {}
  virtual void commit(const OperationRecord& /*record*/, const AssetTree& /*tree*/) {}
  virtual void attempt(const Attempt& /*attempt*/) {}
  virtual void finish(const RunSummary& /*summary*/) {}
};

/// Loads `dir` as a single repository named after the directory.  An
/// optional `.features` file declares initial features, one per line:
/// `Feature/Path: file, file`.  Throws InvalidInitialSystem.
AssetTree loadInitialSystem(const std::filesystem::path& dir);
std::map<std::string, DonorProject> loadDonors(const std::vector<std::filesystem::path>& paths,
                                               const LanguageAdapter& adapter);
std::unique_ptr<CompilabilityChecker> makeChecker(const CheckerSpec& spec, const LanguageAdapter& adapter);

class Simulation {
 public:
  Simulation(RunConfig config, AssetTree initial, std::map<std::string, DonorProject> donors,
             const LanguageAdapter& adapter, std::unique_ptr<CompilabilityChecker> checker);

  /// Throws InvalidInitialSystem when the initial tree fails the checker.
  RunSummary run(HistorySink& sink);

  const AssetTree& tree() const { return tree_; }
  const std::set<std::string>& consumedTests() const { return consumed_; }
  const std::map<std::string, DonorProject>& donors() const { return donors_; }
  const CompilabilityChecker& checker() const { return *checker_; }

  /// Called after every commit with the record and the trees around it.
  /// Keeping the pre-state costs a tree copy per commit, so it is only made
  /// when this is set.
  std::function<void(const OperationRecord&, const AssetTree& before, const AssetTree& after)> onCommit;

 private:
  RunConfig config_;
  AssetTree tree_;
  std::map<std::string, DonorProject> donors_;
  const LanguageAdapter& adapter_;
  std::unique_ptr<CompilabilityChecker> checker_;
  std::set<std::string> consumed_;
};

}  // namespace varhist
