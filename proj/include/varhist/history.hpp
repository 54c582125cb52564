#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "varhist/adapter.hpp"
#include "varhist/errors.hpp"
#include "varhist/runner.hpp"

namespace varhist {

std::string revisionName(Revision revision);

/// Feature models, asset-to-feature mappings and donor inclusion state of
/// one revision (features/NNNN.json).
json featuresToJson(const AssetTree& tree);
/// Installs models, mappings and inclusion state on a tree parsed from the
/// snapshot of the same revision.
void applyFeaturesJson(AssetTree& tree, const json& features);

/// Structural serialization of the whole tree including feature models and
/// mappings; treeFromJson(treeToJson(t)) is structurally identical to t.
json treeToJson(const AssetTree& tree);
AssetTree treeFromJson(const json& j);
bool sameStructure(const AssetTree& a, const AssetTree& b);

json traceToJson(const CloneTrace& trace);

/// Writes the history layout below `outDir`: revisions/NNNN/, features/,
/// ledger.ndjson, traces.ndjson, attempts.ndjson and run.json.
class DirectorySink final : public HistorySink {
 public:
  explicit DirectorySink(std::filesystem::path outDir);

  void begin(const AssetTree& initial, const RunConfig& config, const json& inputs) override;
  void commit(const OperationRecord& record, const AssetTree& tree) override;
  void attempt(const Attempt& attempt) override;
  void finish(const RunSummary& summary) override;

  /// Appends the truncation marker after an I/O failure, best effort.
  void markTruncated(const std::string& reason) noexcept;

 private:
  void writeRevision(const AssetTree& tree);
  void append(const std::filesystem::path& file, const std::string& line, Errc code);

  std::filesystem::path out_;
  json config_;
  json inputs_;
  std::string ledger_;
};

/// Parses ledger.ndjson.  A malformed line k raises ReplayDivergence naming
/// record k; the truncation marker ends the ledger.
std::vector<OperationRecord> readLedger(const std::filesystem::path& path);

/// Rebuilds revision 0 from its snapshot and feature file, then applies the
/// records in order.  `onRecord` sees the tree after each record.
AssetTree replayHistory(const std::filesystem::path& revision0Dir, const std::filesystem::path& features0,
                        const std::vector<OperationRecord>& ledger,
                        const std::function<void(const OperationRecord&, const AssetTree&)>& onRecord = {});
AssetTree replay(const std::filesystem::path& outDir,
                 const std::function<void(const OperationRecord&, const AssetTree&)>& onRecord = {});

struct Violation {
  std::string kind;
  Revision revision = -1;
  std::string opId;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  std::int64_t revisionsChecked = 0;
  bool ok() const { return violations.empty(); }
  json toJson() const;
};

/// Checks replay fidelity of every snapshot, feature and trace files
/// against the replayed state, checker verdicts, layout density and the
/// ledger length against run.json.
ValidationReport validateHistory(const std::filesystem::path& outDir, const CompilabilityChecker& checker);

}  // namespace varhist
