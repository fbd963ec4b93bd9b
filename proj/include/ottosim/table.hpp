#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ottosim::csv {

// Minimal CSV table: comma-separated, no quoting, lines starting with '#'
// are comments. Cell values must not contain commas or newlines; the writer
// enforces this.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;  // throws SchemaMismatch
    std::vector<double> numeric_column(const std::string& name) const;
};

Table read_table(const std::filesystem::path& path);
void write_table(const Table& table, const std::filesystem::path& path);

// Round-trip-exact decimal formatting (shortest representation that parses
// back to the same double).
std::string format_double(double value);
double parse_double(const std::string& cell, std::size_t line, std::size_t column);

}  // namespace ottosim::csv
