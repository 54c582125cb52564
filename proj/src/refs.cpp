#include "varhist/refs.hpp"

#include <charconv>

#include "varhist/errors.hpp"

namespace varhist {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::UnknownFeature: return "UnknownFeature";
    case Errc::SelfTrace: return "SelfTrace";
    case Errc::UnrelatedRepositories: return "UnrelatedRepositories";
    case Errc::NotInTree: return "NotInTree";
    case Errc::StaleRef: return "StaleRef";
    case Errc::DanglingRef: return "DanglingRef";
    case Errc::CannotRemoveRoot: return "CannotRemoveRoot";
    case Errc::BadIndex: return "BadIndex";
    case Errc::NotMutable: return "NotMutable";
    case Errc::DuplicateRepository: return "DuplicateRepository";
    case Errc::AlreadyPresent: return "AlreadyPresent";
    case Errc::DonorIoError: return "DonorIoError";
    case Errc::NotModular: return "NotModular";
    case Errc::MissingDependency: return "MissingDependency";
    case Errc::ForbiddenInsertionPoint: return "ForbiddenInsertionPoint";
    case Errc::SliceConflict: return "SliceConflict";
    case Errc::ManifestParseError: return "ManifestParseError";
    case Errc::BadDistribution: return "BadDistribution";
    case Errc::BadConfig: return "BadConfig";
    case Errc::InvalidInitialSystem: return "InvalidInitialSystem";
    case Errc::SnapshotIoError: return "SnapshotIoError";
    case Errc::LedgerIoError: return "LedgerIoError";
    case Errc::ReplayDivergence: return "ReplayDivergence";
    case Errc::MalformedRecord: return "MalformedRecord";
  }
  return "Unknown";
}

namespace {

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(sep, start);
    parts.emplace_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <typename Int>
Int parseInt(std::string_view text, std::string_view whole) {
  Int value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw Error(Errc::MalformedRecord, "bad number in reference '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

std::string AssetRef::str() const {
  std::string out = std::to_string(revision) + ":" + path + "#";
  for (std::size_t i = 0; i < indexPath.size(); ++i) {
    if (i) out += '.';
    out += std::to_string(indexPath[i]);
  }
  return out;
}

AssetRef AssetRef::parse(std::string_view text) {
  auto colon = text.find(':');
  auto hash = text.rfind('#');
  if (colon == std::string_view::npos || hash == std::string_view::npos || hash < colon) {
    throw Error(Errc::MalformedRecord, "not an asset reference: '" + std::string(text) + "'");
  }
  AssetRef ref;
  ref.revision = parseInt<Revision>(text.substr(0, colon), text);
  ref.path = std::string(text.substr(colon + 1, hash - colon - 1));
  if (ref.path.empty()) {
    throw Error(Errc::MalformedRecord, "empty path in reference '" + std::string(text) + "'");
  }
  auto indices = text.substr(hash + 1);
  if (!indices.empty()) {
    for (const auto& part : split(indices, '.')) {
      ref.indexPath.push_back(parseInt<std::size_t>(part, text));
    }
  }
  return ref;
}

std::string FeatureRef::lpqString() const {
  std::string out;
  for (std::size_t i = 0; i < lpq.size(); ++i) {
    if (i) out += '/';
    out += lpq[i];
  }
  return out;
}

std::string FeatureRef::str() const { return repoPath + "!" + lpqString(); }

FeatureRef FeatureRef::parse(std::string_view text) {
  auto bang = text.find('!');
  if (bang == std::string_view::npos || bang == 0 || bang + 1 >= text.size()) {
    throw Error(Errc::MalformedRecord, "not a feature reference: '" + std::string(text) + "'");
  }
  FeatureRef ref;
  ref.repoPath = std::string(text.substr(0, bang));
  ref.lpq = split(text.substr(bang + 1), '/');
  return ref;
}

}  // namespace varhist
