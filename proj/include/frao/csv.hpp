#pragma once

#include <string>
#include <vector>

namespace frao {

// Minimal comma-separated reader: no quoting, blank lines skipped.
std::vector<std::vector<std::string>> read_csv_rows(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

// Fixed-format double that round-trips exactly (shortest form via %.17g
// would be locale-free too, but we pin %.12g for plot-data readability and
// %.17g where round-tripping matters).
std::string format_double(double v, int precision = 12);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace frao
