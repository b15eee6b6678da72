#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace kmx::tools {

using Cell = std::variant<double, long long, std::string>;

// Shortest decimal string that parses back to the same double.
std::string format_number(double x);
std::string format_cell(const Cell& c);

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row);
    std::size_t column(const std::string& name) const;  // throws if absent
    double number(std::size_t row, const std::string& name) const;
};

// '#'-prefixed key: value lines, then the header and the rows.
void write_csv(std::ostream& os, const std::vector<std::pair<std::string, std::string>>& meta, const Table& t);

}  // namespace kmx::tools
