#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "varhist/adapter.hpp"
#include "varhist/errors.hpp"
#include "varhist/history.hpp"
#include "varhist/metrics.hpp"
#include "varhist/runner.hpp"

namespace fs = std::filesystem;
using namespace varhist;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kBadInput = 2;
constexpr int kIoError = 3;
constexpr int kBadLayout = 4;

struct GenerateArgs {
  std::string config;
  std::string preset;
  std::string system;
  std::vector<std::string> donors;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> maxIterations;
  std::string termination;
  bool quiet = false;
};

int runGenerate(const GenerateArgs& args) {
  MinilangAdapter adapter;
  RunConfig config;
  std::unique_ptr<Simulation> sim;
  try {
    if (!args.preset.empty()) config = presetConfig(args.preset);
    if (!args.config.empty()) config = loadConfig(args.config, config);
    if (args.seed) config.seed = *args.seed;
    if (args.maxIterations) config.maxIterations = *args.maxIterations;
    if (!args.termination.empty()) config.termination = Termination::parse(args.termination);
    validateConfig(config);
    std::vector<fs::path> donorPaths(args.donors.begin(), args.donors.end());
    auto initial = loadInitialSystem(args.system);
    auto donors = loadDonors(donorPaths, adapter);
    auto checker = makeChecker(config.checker, adapter);
    sim = std::make_unique<Simulation>(config, std::move(initial), std::move(donors), adapter, std::move(checker));
  } catch (const Error& e) {
    std::cerr << "varhist generate: " << e.what() << '\n';
    return kBadInput;
  }

  DirectorySink sink(args.out);
  try {
    auto summary = sim->run(sink);
    if (!args.quiet) {
      std::cout << "committed " << summary.committed << " of " << summary.iterations << " iterations ("
                << summary.skipped << " skipped, " << summary.rolledBack << " rollbacks), final revision "
                << summary.finalRevision << ", stopped by " << summary.stoppedBy << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "varhist generate: " << e.what() << '\n';
    if (e.code() == Errc::SnapshotIoError || e.code() == Errc::LedgerIoError) {
      sink.markTruncated(e.what());
      return kIoError;
    }
    return kBadInput;
  }
  return kOk;
}

int runStats(const std::string& out, bool longFormat, const std::string& csvPath) {
  std::vector<MetricRow> rows;
  try {
    rows = historyMetrics(out);
  } catch (const Error& e) {
    std::cerr << "varhist stats: " << e.what() << '\n';
    return kBadLayout;
  }
  auto text = longFormat ? metricsLong(rows) : metricsCsv(rows);
  if (csvPath.empty()) {
    std::cout << text;
  } else {
    std::ofstream file(csvPath);
    file << text;
    if (!file) {
      std::cerr << "varhist stats: cannot write " << csvPath << '\n';
      return kIoError;
    }
  }
  return kOk;
}

CheckerSpec checkerOfRun(const fs::path& out) {
  CheckerSpec spec;
  std::ifstream in(out / "run.json");
  if (!in) return spec;
  try {
    auto run = json::parse(in);
    return configFromJson(run.at("config")).checker;
  } catch (const std::exception&) {
    return spec;
  }
}

int runValidate(const std::string& out, bool quiet) {
  if (!fs::is_directory(out)) {
    std::cerr << "varhist validate: '" << out << "' is not a directory\n";
    return kBadInput;
  }
  MinilangAdapter adapter;
  auto checker = makeChecker(checkerOfRun(out), adapter);
  auto report = validateHistory(out, *checker);
  {
    std::ofstream file(fs::path(out) / "validation.json");
    file << report.toJson().dump(1) << '\n';
  }
  if (!quiet) {
    for (const auto& v : report.violations) {
      std::cout << v.kind << " revision=" << v.revision << (v.opId.empty() ? "" : " op=" + v.opId) << ": "
                << v.detail << '\n';
    }
    std::cout << (report.ok() ? "valid" : "INVALID") << ": " << report.revisionsChecked << " revisions checked, "
              << report.violations.size() << " violations\n";
  }
  return report.ok() ? kOk : kFailed;
}

int runReplay(const std::string& out, const std::string& into) {
  try {
    std::size_t applied = 0;
    auto tree = replay(out, [&](const OperationRecord&, const AssetTree&) { ++applied; });
    if (!into.empty()) writeSnapshot(tree, into);
    std::cout << "replayed " << applied << " records to revision " << tree.revision() << " ("
              << tree.repositories().size() << " repositories)\n";
  } catch (const Error& e) {
    std::cerr << "varhist replay: " << e.what() << '\n';
    return kFailed;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic version histories for variant-rich systems"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Simulate a history and write it to --out");
  generate->add_option("--config", gen.config, "JSON run configuration")->check(CLI::ExistingFile);
  generate->add_option("--preset", gen.preset, "Base configuration")
      ->check(CLI::IsMember({"uniform-generators", "uniform-operations", "growing-system"}));
  generate->add_option("--system", gen.system, "Initial system directory")->required();
  generate->add_option("--donor", gen.donors, "Donor project directory (repeatable)");
  generate->add_option("--out", gen.out, "Output directory")->required();
  generate->add_option("--seed", gen.seed, "Overrides the configured seed");
  generate->add_option("--max-iterations", gen.maxIterations, "Overrides max_iterations");
  generate->add_option("--termination", gen.termination, "e.g. 'distinctFeatureCount >= 10'");
  generate->add_flag("-q,--quiet", gen.quiet);

  std::string out;
  bool longFormat = false;
  std::string csvPath;
  auto* stats = app.add_subcommand("stats", "Per-revision metrics of a history as CSV");
  stats->add_option("--out", out, "History directory")->required();
  stats->add_flag("--long", longFormat, "revision,metric,key,value rows");
  stats->add_option("--csv", csvPath, "Write to a file instead of stdout");

  bool quiet = false;
  auto* validate = app.add_subcommand("validate", "Check a history against its ledger and the checker");
  validate->add_option("--out", out, "History directory")->required();
  validate->add_flag("-q,--quiet", quiet);

  std::string into;
  auto* replayCmd = app.add_subcommand("replay", "Rebuild the final revision from revision 0 and the ledger");
  replayCmd->add_option("--out", out, "History directory")->required();
  replayCmd->add_option("--into", into, "Write the replayed final snapshot here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  }

  if (*generate) return runGenerate(gen);
  if (*stats) return runStats(out, longFormat, csvPath);
  if (*validate) return runValidate(out, quiet);
  return runReplay(out, into);
}
