#include "varhist/runner.hpp"

#include <fstream>
#include <sstream>

#include "varhist/addressing.hpp"
#include "varhist/errors.hpp"
#include "varhist/generators.hpp"
#include "varhist/metrics.hpp"
#include "varhist/snapshot.hpp"
#include "varhist/text.hpp"

namespace fs = std::filesystem;

namespace varhist {

json toJson(const RunSummary& s) {
  json per = json::object();
  for (const auto& [id, g] : s.perGenerator) {
    per[id] = json{{"selected", g.selected},
                   {"committed", g.committed},
                   {"rolledBack", g.rolledBack},
                   {"noCandidate", g.noCandidate},
                   {"skipped", g.skipped}};
  }
  return json{{"iterations", s.iterations}, {"committed", s.committed},     {"rolledBack", s.rolledBack},
              {"noCandidate", s.noCandidate}, {"skipped", s.skipped},       {"finalRevision", s.finalRevision},
              {"stoppedBy", s.stoppedBy},     {"consumedTests", s.consumedTests}, {"perGenerator", per}};
}

namespace {

void declareFeatures(AssetTree& tree, AssetNode& repo, const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(Errc::InvalidInitialSystem, "cannot read " + file.string());
  std::string raw;
  std::size_t lineNo = 0;
  auto& model = *repo.featureModel;
  while (std::getline(in, raw)) {
    ++lineNo;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw Error(Errc::InvalidInitialSystem, file.string() + ":" + std::to_string(lineNo) + ": expected 'Feature: files'");
    }
    auto path = splitList(line.substr(0, colon), '/');
    if (path.empty()) throw Error(Errc::InvalidInitialSystem, file.string() + ":" + std::to_string(lineNo) + ": empty feature");
    FeatureId cur = model.root().id;
    std::string lineage = repo.name + "!";
    for (std::size_t i = 0; i < path.size(); ++i) {
      lineage += (i ? "/" : "") + path[i];
      const auto* parent = model.find(cur);
      const Feature* existing = nullptr;
      for (const auto& c : parent->children) {
        if (c.name == path[i]) existing = &c;
      }
      if (existing) {
        cur = existing->id;
      } else {
        Feature f{tree.newFeatureId(), path[i], lineage, {}};
        cur = model.addChild(cur, std::move(f)).id;
      }
    }
    for (const auto& rel : splitList(line.substr(colon + 1), ',')) {
      auto* node = findByPath(tree, repo.name + "/" + rel);
      if (!node || node == &repo) {
        throw Error(Errc::InvalidInitialSystem, file.string() + ":" + std::to_string(lineNo) + ": no asset '" + rel + "'");
      }
      node->mappedFeatures.insert(cur);
    }
  }
}

}  // namespace

AssetTree loadInitialSystem(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(Errc::InvalidInitialSystem, "'" + dir.string() + "' is not a directory");
  auto name = fs::absolute(dir).lexically_normal().filename().string();
  if (name.empty()) name = fs::absolute(dir).lexically_normal().parent_path().filename().string();
  AssetTree tree;
  try {
    auto repo = loadRepository(dir, name);
    repo->featureModel->root().id = tree.newFeatureId();
    auto& inserted = tree.insert(tree.root(), 0, std::move(repo));
    auto features = dir / ".features";
    if (fs::exists(features, ec)) declareFeatures(tree, inserted, features);
  } catch (const Error& e) {
    if (e.code() == Errc::InvalidInitialSystem) throw;
    throw Error(Errc::InvalidInitialSystem, e.what());
  }
  return tree;
}

std::map<std::string, DonorProject> loadDonors(const std::vector<fs::path>& paths, const LanguageAdapter& adapter) {
  std::map<std::string, DonorProject> donors;
  for (const auto& path : paths) {
    auto donor = loadDonor(path, adapter);
    auto id = donor.id;
    if (!donors.emplace(id, std::move(donor)).second) {
      throw Error(Errc::DonorIoError, "two donors are named '" + id + "'");
    }
  }
  return donors;
}

std::unique_ptr<CompilabilityChecker> makeChecker(const CheckerSpec& spec, const LanguageAdapter& adapter) {
  if (spec.kind == "external") return std::make_unique<ExternalCommandChecker>(spec.cmd, spec.timeoutSeconds);
  return std::make_unique<BundledChecker>(adapter);
}

Simulation::Simulation(RunConfig config, AssetTree initial, std::map<std::string, DonorProject> donors,
                       const LanguageAdapter& adapter, std::unique_ptr<CompilabilityChecker> checker)
    : config_(std::move(config)),
      tree_(std::move(initial)),
      donors_(std::move(donors)),
      adapter_(adapter),
      checker_(std::move(checker)) {
  validateConfig(config_);
}

RunSummary Simulation::run(HistorySink& sink) {
  auto verdict = checker_->check(tree_);
  if (!verdict.ok) throw Error(Errc::InvalidInitialSystem, "initial system is not compilable: " + verdict.reason);

  const auto distribution = effectiveDistribution(config_);
  json inputs{{"system", tree_.repositories().empty() ? "" : tree_.repositories().front()->name},
              {"donors", json::array()}};
  for (const auto& [id, donor] : donors_) {
    std::size_t modular = 0;
    for (const auto& t : donor.testCandidates) modular += t.modular ? 1 : 0;
    inputs["donors"].push_back(json{{"id", id}, {"tests", donor.testCandidates.size()}, {"modular", modular}});
  }
  sink.begin(tree_, config_, inputs);

  RunSummary summary;
  summary.stoppedBy = "maxIterations";
  for (const auto& [id, p] : distribution) summary.perGenerator[id];

  GeneratorContext gctx{&adapter_, &donors_, &consumed_, config_.sensibilityDiscardProb};
  OperationEnv env{&adapter_, &donors_};

  auto terminated = [&] { return config_.termination && config_.termination->holds(computeMetrics(tree_)); };

  if (terminated()) {
    summary.stoppedBy = "termination";
  } else {
    for (std::int64_t iteration = 1; iteration <= config_.maxIterations; ++iteration) {
      ++summary.iterations;
      auto rng = Rng::forIteration(config_.seed, iteration);
      auto generator = selectGenerator(distribution, rng);
      auto& stats = summary.perGenerator[generator];
      ++stats.selected;
      bool committed = false;
      for (int attempt = 1; attempt <= config_.maxRetries && !committed; ++attempt) {
        Attempt log{iteration, attempt, generator, "", "", ""};
        auto candidate = generate(generator, tree_, gctx, rng);
        if (!candidate) {
          log.outcome = "noCandidate";
          ++stats.noCandidate;
          ++summary.noCandidate;
          sink.attempt(log);
          continue;
        }
        log.kind = std::string(operationKind(*candidate));
        std::optional<AssetTree> before;
        if (onCommit) before.emplace(tree_);
        auto result = runInTransaction(tree_, *candidate, env, *checker_, iteration);
        if (auto* ok = std::get_if<Committed>(&result)) {
          log.outcome = "committed";
          sink.attempt(log);
          ++stats.committed;
          ++summary.committed;
          sink.commit(ok->record, tree_);
          if (onCommit) onCommit(ok->record, *before, tree_);
          committed = true;
        } else {
          log.outcome = "rolledBack";
          log.reason = std::get<RolledBack>(result).reason;
          ++stats.rolledBack;
          ++summary.rolledBack;
          sink.attempt(log);
        }
      }
      if (!committed) {
        ++stats.skipped;
        ++summary.skipped;
      }
      if (committed && terminated()) {
        summary.stoppedBy = "termination";
        break;
      }
    }
  }
  summary.finalRevision = tree_.revision();
  summary.consumedTests = consumed_.size();
  sink.finish(summary);
  return summary;
}

}  // namespace varhist
