#include "frao/csv.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "frao/diagnostics.hpp"

namespace frao {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    out << contents;
    if (!out) throw Error("write failed: " + path);
}

std::vector<std::vector<std::string>> read_csv_rows(const std::string& path) {
    std::string text = read_file(path);
    std::vector<std::vector<std::string>> rows;
    std::string cell;
    std::vector<std::string> row;
    auto flush_cell = [&] {
        row.push_back(cell);
        cell.clear();
    };
    for (char c : text) {
        if (c == '\r') continue;
        if (c == ',') {
            flush_cell();
        } else if (c == '\n') {
            flush_cell();
            bool blank = true;
            for (const auto& s : row)
                if (!s.empty()) blank = false;
            if (!blank) rows.push_back(row);
            row.clear();
        } else {
            cell.push_back(c);
        }
    }
    if (!cell.empty() || !row.empty()) {
        flush_cell();
        rows.push_back(row);
    }
    return rows;
}

std::string format_double(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace frao
