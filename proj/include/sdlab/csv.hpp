#pragma once

#include <string>
#include <utility>
#include <vector>

namespace sdlab {
namespace csvio {

// Shortest decimal that round-trips the double exactly; '.' separator
std::string format_real(double v);

// Rows of pre-formatted cells; LF line endings regardless of platform.
void write_rows(const std::string& path, const std::string& header,
                const std::vector<std::vector<std::string>>& rows);

// Strict two-column numeric reader used for (t, value) tables. Verifies the
// header verbatim and reports offending line numbers (1-based, header = 1).
std::vector<std::pair<double, double>> read_two_column(const std::string& path,
                                                       const std::string& expected_header);

}  // namespace csvio
}  // namespace sdlab
