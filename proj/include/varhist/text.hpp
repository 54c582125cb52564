#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace varhist {

/// Splits file content into lines.  A trailing newline does not produce an
/// extra empty line and carriage returns before a newline are dropped.
std::vector<std::string> splitLines(std::string_view text);
/// Inverse of splitLines for LF-terminated content.
std::string joinLines(const std::vector<std::string>& lines);

std::string_view trim(std::string_view text);
std::vector<std::string> splitList(std::string_view text, char sep);
std::string zeroPad(long long value, int width);

}  // namespace varhist
