#ifndef NEWSCLUST_SRC_FILE_UTIL_H_
#define NEWSCLUST_SRC_FILE_UTIL_H_

#include <filesystem>
#include <string>
#include <string_view>

namespace newsclust::internal {

std::string ReadFile(const std::filesystem::path& path);

// Writes via a sibling temp file and rename.
void WriteFile(const std::filesystem::path& path, std::string_view contents);

// "%.17g"
std::string FormatDouble(double value);
double ParseDouble(std::string_view text);

}  // namespace newsclust::internal

#endif  // NEWSCLUST_SRC_FILE_UTIL_H_
