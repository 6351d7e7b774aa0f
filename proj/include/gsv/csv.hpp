#pragma once

#include <string>
#include <vector>

namespace gsv::csv {

/// Shortest decimal form that round-trips the exact double value.
std::string format_double(double v);

/// Minimal CSV field quoting (only when the value needs it).
std::string quote(const std::string& field);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

Table read_file(const std::string& path);
Table parse(const std::string& text);

/// Writes content to a temp file in the same directory, then renames.
void atomic_write(const std::string& path, const std::string& content);

double parse_double(const std::string& field, const std::string& context);
long parse_long(const std::string& field, const std::string& context);

} // namespace gsv::csv
