#include "varhist/adapter.hpp"

#include <cctype>

#include "varhist/errors.hpp"
#include "varhist/text.hpp"

namespace varhist {

// ---------------------------------------------------------------------------
// Manifest

namespace {

bool validKey(std::string_view key) {
  if (key.empty() || !(std::isalpha(static_cast<unsigned char>(key[0])) || key[0] == '_')) return false;
  for (char c : key) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
  }
  return true;
}

std::string joinList(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += ", ";
    out += item;
  }
  return out;
}

}  // namespace

ManifestModel parseManifest(std::string_view text) {
  ManifestModel m;
  bool sawName = false;
  std::size_t lineNo = 0;
  for (const auto& raw : splitLines(text)) {
    ++lineNo;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw Error(Errc::ManifestParseError, "line " + std::to_string(lineNo) + ": expected 'key: value'");
    }
    auto key = trim(line.substr(0, colon));
    auto value = trim(line.substr(colon + 1));
    if (!validKey(key)) {
      throw Error(Errc::ManifestParseError, "line " + std::to_string(lineNo) + ": bad key '" + std::string(key) + "'");
    }
    auto single = [&](std::optional<std::string>& slot) {
      if (slot) throw Error(Errc::ManifestParseError, "duplicate key '" + std::string(key) + "'");
      slot = std::string(value);
    };
    if (key == "name") {
      if (sawName) throw Error(Errc::ManifestParseError, "duplicate key 'name'");
      sawName = true;
      m.name = std::string(value);
    } else if (key == "srcdir") {
      single(m.srcdir);
    } else if (key == "testdir") {
      single(m.testdir);
    } else if (key == "deps") {
      for (auto& d : splitList(value, ',')) m.deps.push_back(std::move(d));
    } else if (key == "locals") {
      for (auto& l : splitList(value, ',')) m.locals.push_back(std::move(l));
    } else {
      m.extra.emplace_back(std::string(key), std::string(value));
    }
  }
  return m;
}

std::string emitManifest(const ManifestModel& m) {
  std::string out = "name: " + m.name + "\n";
  if (m.srcdir) out += "srcdir: " + *m.srcdir + "\n";
  if (m.testdir) out += "testdir: " + *m.testdir + "\n";
  if (!m.deps.empty()) out += "deps: " + joinList(m.deps) + "\n";
  if (!m.locals.empty()) out += "locals: " + joinList(m.locals) + "\n";
  for (const auto& [key, value] : m.extra) out += key + ": " + value + "\n";
  return out;
}

ManifestModel adaptManifest(const ManifestModel& manifest) {
  ManifestModel adapted;
  adapted.name = manifest.name;
  adapted.deps = manifest.deps;
  adapted.locals = manifest.locals;
  return adapted;
}

// ---------------------------------------------------------------------------
// Minilang

namespace {

bool isIdentStart(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool isIdentChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

/// Calls `onBrace(+1/-1)` for every structural brace of a line.
template <typename F>
void forEachBrace(std::string_view line, F onBrace) {
  bool inString = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (inString) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        inString = false;
      }
      continue;
    }
    if (c == '"') {
      inString = true;
    } else if (c == '/' && i + 1 < line.size() && line[i + 1] == '/') {
      return;
    } else if (c == '{') {
      onBrace(+1);
    } else if (c == '}') {
      onBrace(-1);
    }
  }
}

std::string_view codePart(std::string_view line) {
  bool inString = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (inString) {
      if (line[i] == '\\') ++i;
      else if (line[i] == '"') inString = false;
    } else if (line[i] == '"') {
      inString = true;
    } else if (line[i] == '/' && i + 1 < line.size() && line[i + 1] == '/') {
      return line.substr(0, i);
    }
  }
  return line;
}

std::vector<std::string> identifiers(std::string_view line) {
  std::vector<std::string> out;
  auto code = codePart(line);
  bool inString = false;
  for (std::size_t i = 0; i < code.size();) {
    char c = code[i];
    if (inString) {
      if (c == '\\') i += 2;
      else {
        if (c == '"') inString = false;
        ++i;
      }
      continue;
    }
    if (c == '"') {
      inString = true;
      ++i;
    } else if (isIdentStart(c)) {
      auto start = i;
      while (i < code.size() && isIdentChar(code[i])) ++i;
      out.emplace_back(code.substr(start, i - start));
    } else {
      ++i;
    }
  }
  return out;
}

const std::set<std::string>& keywords() {
  static const std::set<std::string> kw = {"fn", "let", "const", "var", "return", "if", "else",
                                           "while", "for", "in", "guard", "import", "true", "false",
                                           "assert", "print", "and", "or", "not"};
  return kw;
}

}  // namespace

int MinilangAdapter::braceDelta(std::string_view line) {
  int delta = 0;
  forEachBrace(line, [&](int d) { delta += d; });
  return delta;
}

bool MinilangAdapter::isSourceFile(std::string_view path) const {
  return path.size() > 5 && path.substr(path.size() - 5) == ".mini";
}

std::string MinilangAdapter::modulePath(std::string_view module) const {
  std::string path(module);
  for (auto& c : path) {
    if (c == '.') c = '/';
  }
  return path + ".mini";
}

std::vector<ImportDecl> MinilangAdapter::scanImports(const std::vector<std::string>& lines) const {
  std::vector<ImportDecl> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto line = trim(codePart(lines[i]));
    if (line.substr(0, 7) != "import ") continue;
    auto module = trim(line.substr(7));
    bool ok = !module.empty() && isIdentStart(module.front()) && module.back() != '.';
    for (char c : module) ok = ok && (isIdentChar(c) || c == '.');
    if (ok) out.push_back(ImportDecl{std::string(module), i});
  }
  return out;
}

std::vector<TestBlock> MinilangAdapter::scanTests(const std::vector<std::string>& lines) const {
  std::vector<TestBlock> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]) != "@test") continue;
    std::size_t header = i + 1;
    while (header < lines.size() && braceDelta(lines[header]) <= 0) {
      if (!trim(lines[header]).empty()) break;
      ++header;
    }
    if (header >= lines.size() || braceDelta(lines[header]) <= 0) continue;
    int depth = 0;
    std::size_t close = header;
    bool closed = false;
    for (; close < lines.size(); ++close) {
      depth += braceDelta(lines[close]);
      if (depth <= 0) {
        closed = true;
        break;
      }
    }
    if (!closed || close == header) continue;

    TestBlock block{"", i, header, close};
    auto ids = identifiers(lines[header]);
    for (std::size_t k = 0; k + 1 < ids.size(); ++k) {
      if (ids[k] == "fn") {
        block.name = ids[k + 1];
        break;
      }
    }
    if (block.name.empty()) block.name = "test" + std::to_string(i);
    out.push_back(block);
    i = close;
  }
  return out;
}

std::set<std::string> MinilangAdapter::definedSymbols(const std::vector<std::string>& lines) const {
  std::set<std::string> out;
  int depth = 0;
  for (const auto& line : lines) {
    if (depth == 0) {
      auto ids = identifiers(line);
      if (ids.size() >= 2 &&
          (ids[0] == "fn" || ids[0] == "let" || ids[0] == "const" || ids[0] == "var")) {
        out.insert(ids[1]);
      }
    }
    depth += braceDelta(line);
  }
  return out;
}

std::set<std::string> MinilangAdapter::symbolScan(const std::vector<std::string>& body) const {
  std::set<std::string> out;
  for (const auto& line : body) {
    for (auto& id : identifiers(line)) {
      if (!keywords().count(id)) out.insert(std::move(id));
    }
  }
  return out;
}

std::vector<std::string> MinilangAdapter::guardWrap(const std::vector<std::string>& body) const {
  std::vector<std::string> out;
  out.reserve(body.size() + 2);
  out.emplace_back("guard {");
  out.insert(out.end(), body.begin(), body.end());
  out.emplace_back("}");
  return out;
}

std::vector<std::size_t> MinilangAdapter::insertionLines(const std::vector<std::string>& lines) const {
  std::vector<std::size_t> out;
  int depth = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    int after = depth + braceDelta(lines[i]);
    if (depth == 1 && after == 0) out.push_back(i);
    depth = after;
  }
  return out;
}

std::optional<std::string> MinilangAdapter::structuralError(const std::vector<std::string>& lines) const {
  int depth = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    bool underflow = false;
    forEachBrace(lines[i], [&](int d) {
      depth += d;
      if (depth < 0) underflow = true;
    });
    if (underflow) return "unmatched '}' on line " + std::to_string(i + 1);
  }
  if (depth != 0) return std::to_string(depth) + " unclosed '{' at end of file";
  return std::nullopt;
}

}  // namespace varhist
