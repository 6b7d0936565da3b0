#include "driftwatch/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "driftwatch/errors.hpp"

namespace driftwatch {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

bool parse_double(std::string_view text, double& out) {
    text = trim(text);
    if (text.empty()) return false;
    const std::string buffer(text);
    char* end = nullptr;
    out = std::strtod(buffer.c_str(), &end);
    return end == buffer.c_str() + buffer.size();
}

}  // namespace

bool parse_pair(std::string_view line, double& a, double& b) {
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) return false;
    return parse_double(line.substr(0, comma), a) && parse_double(line.substr(comma + 1), b);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> read_two_column_csv(std::istream& in,
                                                                std::string_view first,
                                                                std::string_view second) {
    const std::string expected = std::string(first) + "," + std::string(second);
    std::string line;
    long line_no = 0;
    bool header_seen = false;
    std::vector<double> a, b;
    while (std::getline(in, line)) {
        ++line_no;
        const auto view = trim(line);
        if (view.empty()) continue;
        if (!header_seen) {
            if (view != expected) {
                throw DomainError("expected CSV header '" + expected + "' on line " +
                                  std::to_string(line_no));
            }
            header_seen = true;
            continue;
        }
        double x = 0.0, y = 0.0;
        if (!parse_pair(view, x, y)) {
            throw DomainError("malformed CSV record on line " + std::to_string(line_no));
        }
        a.push_back(x);
        b.push_back(y);
    }
    if (!header_seen) throw DomainError("empty CSV input, expected header '" + expected + "'");
    return {Eigen::Map<Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size())),
            Eigen::Map<Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()))};
}

void write_two_column_csv(std::ostream& out, std::string_view first, std::string_view second,
                          std::span<const double> a, std::span<const double> b) {
    out << first << ',' << second << '\n';
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
        out << format_exact(a[i]) << ',' << format_exact(b[i]) << '\n';
    }
}

std::string format_exact(double x) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.17g", x);
    return buffer;
}

std::string format_report(double x) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.10g", x);
    return buffer;
}

}  // namespace driftwatch
