#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stochtube {
namespace csv {

// Shortest round-trip decimal form, C locale, deterministic across runs.
std::string format(double v);

void write_row(std::ostream& os, const std::vector<std::string>& cells);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;  // throws if absent
    double number(std::size_t row, std::size_t col) const;
};

Table read(std::istream& is);
Table read_file(const std::string& path);

}  // namespace csv
}  // namespace stochtube
