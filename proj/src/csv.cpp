#include "mixkin/csv.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "mixkin/errors.hpp"

namespace mixkin {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

std::vector<CsvRow> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::vector<CsvRow> rows;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        CsvRow row;
        row.line = lineno;
        std::size_t start = 0;
        while (true) {
            std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                row.fields.push_back(trim(line.substr(start)));
                break;
            }
            row.fields.push_back(trim(line.substr(start, comma - start)));
            start = comma + 1;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

bool is_header(const CsvRow& row, const std::vector<std::string>& names) {
    if (row.fields.size() != names.size()) return false;
    for (std::size_t i = 0; i < names.size(); ++i) {
        const std::string& a = row.fields[i];
        const std::string& b = names[i];
        if (a.size() != b.size()) return false;
        for (std::size_t j = 0; j < a.size(); ++j) {
            if (std::tolower(static_cast<unsigned char>(a[j])) !=
                std::tolower(static_cast<unsigned char>(b[j])))
                return false;
        }
    }
    return true;
}

double parse_double(const std::string& field, const std::string& path, long line) {
    if (field.empty())
        throw ValidationError(path + ":" + std::to_string(line) + ": empty numeric field");
    char* end = nullptr;
    double v = std::strtod(field.c_str(), &end);
    if (end != field.c_str() + field.size() || !std::isfinite(v))
        throw ValidationError(path + ":" + std::to_string(line) + ": bad number '" + field + "'");
    return v;
}

long parse_long(const std::string& field, const std::string& path, long line) {
    if (field.empty())
        throw ValidationError(path + ":" + std::to_string(line) + ": empty integer field");
    char* end = nullptr;
    long v = std::strtol(field.c_str(), &end, 10);
    if (end != field.c_str() + field.size())
        throw ValidationError(path + ":" + std::to_string(line) + ": bad integer '" + field + "'");
    return v;
}

std::string format_double(double v) {
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace mixkin
