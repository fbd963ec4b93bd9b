#include "ottosim/table.hpp"

#include <charconv>
#include <fstream>
#include <system_error>

#include "ottosim/errors.hpp"

namespace ottosim::csv {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return cells;
}

}  // namespace

std::size_t Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw SchemaMismatch("missing column: " + name);
}

std::vector<double> Table::numeric_column(const std::string& name) const {
    std::size_t c = column(name);
    std::vector<double> values;
    values.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        values.push_back(parse_double(rows[r][c], r + 2, c + 1));
    }
    return values;
}

Table read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());

    Table table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto cells = split_line(line);
        if (table.header.empty()) {
            table.header = std::move(cells);
        } else {
            if (cells.size() != table.header.size()) {
                throw ParseError("row has " + std::to_string(cells.size()) +
                                     " cells, header has " + std::to_string(table.header.size()),
                                 line_no, 1);
            }
            table.rows.push_back(std::move(cells));
        }
    }
    if (table.header.empty()) throw ParseError("empty file", 1, 1);
    return table;
}

void write_table(const Table& table, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");

    auto write_row = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (cells[i].find_first_of(",\n\r") != std::string::npos) {
                throw IoError("cell contains separator: " + cells[i]);
            }
            if (i) out << ',';
            out << cells[i];
        }
        out << '\n';
    };

    write_row(table.header);
    for (const auto& row : table.rows) write_row(row);
    if (!out) throw IoError("write failed: " + path.string());
}

std::string format_double(double value) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& cell, std::size_t line, std::size_t column) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = first + cell.size();
    auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || res.ptr != last) {
        throw ParseError("not a number: '" + cell + "'", line, column);
    }
    return value;
}

}  // namespace ottosim::csv
