#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include <Eigen/Dense>

namespace driftwatch {

/// Reads a two-column numeric CSV whose header must be exactly
/// `first,second`. Blank lines are skipped; anything else malformed throws
/// DomainError with the offending line number.
std::pair<Eigen::VectorXd, Eigen::VectorXd> read_two_column_csv(std::istream& in,
                                                                std::string_view first,
                                                                std::string_view second);

void write_two_column_csv(std::ostream& out, std::string_view first, std::string_view second,
                          std::span<const double> a, std::span<const double> b);

/// Round-trip representation (%.17g).
std::string format_exact(double x);

/// Ten significant digits (%.10g), the precision of reports.
std::string format_report(double x);

/// Parses "a,b" into two doubles; returns false on malformed input.
bool parse_pair(std::string_view line, double& a, double& b);

}  // namespace driftwatch
