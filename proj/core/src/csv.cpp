#include "stochtube/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace stochtube {
namespace csv {

std::string format(double v) {
    // %.17g always round-trips; trim to the shortest representation that
    // still parses back exactly so files stay readable.
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        double back = 0.0;
        const auto res = std::from_chars(buf, buf + std::string_view(buf).size(), back);
        if (res.ec == std::errc() && back == v) break;
    }
    return buf;
}

void write_row(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) os << ',';
        os << cells[i];
    }
    os << '\n';
}

std::size_t Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw std::invalid_argument("csv: no column named '" + name + "'");
}

double Table::number(std::size_t row, std::size_t col) const {
    const std::string& cell = rows.at(row).at(col);
    double v = 0.0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        throw std::invalid_argument("csv: cell '" + cell + "' is not a number");
    return v;
}

namespace {
std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}
}  // namespace

Table read(std::istream& is) {
    Table t;
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("csv: empty input");
    t.header = split_line(line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (cells.size() != t.header.size())
            throw std::invalid_argument("csv: ragged row '" + line + "'");
        t.rows.push_back(std::move(cells));
    }
    return t;
}

Table read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("csv: cannot open '" + path + "'");
    return read(f);
}

}  // namespace csv
}  // namespace stochtube
