// rfa/io_util.h

#ifndef RFA_IO_UTIL_H_
#define RFA_IO_UTIL_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rfa {

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

// Writes to a temporary sibling file and renames it over `path`, so readers
// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

// Minimal RFC 4180 field splitting: commas, double-quoted fields with ""
// escapes. Trailing CR is stripped.
std::vector<std::string> split_csv_line(std::string_view line);

std::string csv_escape(std::string_view field);

std::string trim(std::string_view s);

}  // namespace rfa

#endif  // RFA_IO_UTIL_H_
