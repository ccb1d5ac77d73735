#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

namespace govrek {

// Shortest round-trippable decimal form; locale-independent, so CSV output is
// byte-stable across runs and machines.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // Prefer the shortest representation that parses back exactly.
    for (int prec = 1; prec < 17; ++prec) {
        char shorter[64];
        std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
        if (std::strtod(shorter, nullptr) == v) return shorter;
    }
    return buf;
}

inline std::string csv_row(const std::vector<std::string>& cells) {
    std::string row;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) row += ',';
        row += cells[i];
    }
    row += '\n';
    return row;
}

// Minimal CSV split (no quoting; the emitted schemas never need it).
std::vector<std::string> split_csv_line(const std::string& line);

// Reads a CSV file into header + rows; throws MissingRun when absent.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv(const std::string& path);

} // namespace govrek
