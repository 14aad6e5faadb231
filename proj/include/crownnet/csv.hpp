#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace crownnet::csv {

/// Comma-separated table with a header row. No quoting; fields never contain commas.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by name; throws ValidationError if absent.
    std::size_t column(std::string_view name) const;
};

Table parse(std::istream& in, const std::string& source = "<stream>");
Table read(const std::filesystem::path& path);
void write(const std::filesystem::path& path, const Table& table);
void write(std::ostream& out, const Table& table);

/// Shortest round-trip representation.
std::string format(double v);
/// Fixed six-decimal representation for result tables.
std::string format_fixed(double v, int decimals = 6);

double to_double(std::string_view s);
long to_long(std::string_view s);

}  // namespace crownnet::csv
