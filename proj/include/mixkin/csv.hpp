#pragma once

#include <string>
#include <vector>

namespace mixkin {

struct CsvRow {
    std::vector<std::string> fields;
    long line = 0;  // 1-based line in the source file
};

// Reads a comma-separated file. Lines starting with '#' and blank lines are
// skipped, so files may carry an embedded provenance block. Fields are
// trimmed of surrounding whitespace; quoting is not supported (labels never
// contain commas). Throws ValidationError if the file cannot be opened.
std::vector<CsvRow> read_csv(const std::string& path);

// True if row matches the given header (case-insensitive).
bool is_header(const CsvRow& row, const std::vector<std::string>& names);

// Parses a strictly finite double; throws ValidationError naming the file
// and line on failure.
double parse_double(const std::string& field, const std::string& path, long line);

long parse_long(const std::string& field, const std::string& path, long line);

// Shortest decimal form that round-trips through double ("%.17g" trimmed).
std::string format_double(double v);

}  // namespace mixkin
