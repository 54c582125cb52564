#include "varhist/checker.hpp"

#include <atomic>
#include <chrono>
#include <thread>

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "varhist/errors.hpp"
#include "varhist/text.hpp"

namespace fs = std::filesystem;

namespace varhist {

namespace {

std::string under(const std::string& root, const std::string& path) {
  if (root.empty() || root == ".") return path;
  return root + "/" + path;
}

bool declaredExternal(const std::vector<std::string>& deps, const std::string& module) {
  for (const auto& dep : deps) {
    if (module == dep) return true;
    if (module.size() > dep.size() && module.compare(0, dep.size(), dep) == 0 && module[dep.size()] == '.') {
      return true;
    }
  }
  return false;
}

}  // namespace

CheckResult BundledChecker::checkFiles(const RepositoryFiles& repos) const {
  for (const auto& [repo, files] : repos) {
    ManifestModel manifest;
    std::vector<std::string> roots;
    std::vector<std::string> externals;
    try {
      if (auto it = files.find(std::string(kManifestFileName)); it != files.end()) {
        manifest = adapter_.parseManifest(joinLines(it->second));
      }
      roots = {manifest.sourceRoot(), manifest.testRoot()};
      externals = manifest.deps;
      for (const auto& local : manifest.locals) {
        auto base = std::string(kSliceDirectory) + "/" + local;
        auto sm = files.find(base + "/" + std::string(kManifestFileName));
        if (sm == files.end()) {
          return CheckResult::fail(repo + ": local slice '" + local + "' has no manifest");
        }
        auto slice = adapter_.parseManifest(joinLines(sm->second));
        roots.push_back(base + "/" + slice.sourceRoot());
        externals.insert(externals.end(), slice.deps.begin(), slice.deps.end());
      }
    } catch (const Error& e) {
      return CheckResult::fail(repo + ": " + e.what());
    }

    for (const auto& [path, lines] : files) {
      if (!adapter_.isSourceFile(path)) continue;
      if (auto err = adapter_.structuralError(lines)) {
        return CheckResult::fail(repo + "/" + path + ": " + *err);
      }
      for (const auto& imp : adapter_.scanImports(lines)) {
        auto modulePath = adapter_.modulePath(imp.module);
        bool found = std::any_of(roots.begin(), roots.end(),
                                 [&](const std::string& r) { return files.count(under(r, modulePath)) > 0; });
        if (!found && !declaredExternal(externals, imp.module)) {
          return CheckResult::fail(repo + "/" + path + ":" + std::to_string(imp.line + 1) +
                                   ": unresolved import '" + imp.module + "'");
        }
      }
    }
  }
  return CheckResult::pass();
}

CheckResult BundledChecker::check(const AssetTree& tree) const { return checkFiles(repositoryFiles(tree)); }

CheckResult BundledChecker::checkDirectory(const fs::path& snapshotDir) const {
  try {
    return checkFiles(repositoryFiles(readSnapshot(snapshotDir)));
  } catch (const Error& e) {
    return CheckResult::fail(e.what());
  }
}

CheckResult ExternalCommandChecker::check(const AssetTree& tree) const {
  static std::atomic<unsigned> counter{0};
  auto dir = fs::temp_directory_path() /
             ("varhist-check-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  try {
    writeSnapshot(tree, dir);
  } catch (const Error& e) {
    return CheckResult::fail(std::string("checker error: ") + e.what());
  }
  auto result = checkDirectory(dir);
  std::error_code ec;
  fs::remove_all(dir, ec);
  return result;
}

CheckResult ExternalCommandChecker::checkDirectory(const fs::path& snapshotDir) const {
  pid_t pid = ::fork();
  if (pid < 0) return CheckResult::fail("checker error: fork failed");
  if (pid == 0) {
    ::setpgid(0, 0);
    if (::chdir(snapshotDir.c_str()) != 0) ::_exit(126);
    int devnull = ::open("/dev/null", O_RDWR);
    if (devnull >= 0) {
      ::dup2(devnull, 0);
      ::dup2(devnull, 1);
      ::dup2(devnull, 2);
    }
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::milliseconds(static_cast<long long>(timeout_ * 1000.0));
  int status = 0;
  while (true) {
    pid_t done = ::waitpid(pid, &status, WNOHANG);
    if (done == pid) break;
    if (done < 0) return CheckResult::fail("checker error: wait failed");
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      return CheckResult::fail("checker timeout");
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  if (WIFEXITED(status) && WEXITSTATUS(status) == 0) return CheckResult::pass();
  if (WIFEXITED(status)) return CheckResult::fail("checker exit " + std::to_string(WEXITSTATUS(status)));
  return CheckResult::fail("checker crashed");
}

CheckResult checkCompilable(const fs::path& snapshotDir, const CompilabilityChecker& checker) {
  return checker.checkDirectory(snapshotDir);
}

}  // namespace varhist
