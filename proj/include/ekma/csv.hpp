#pragma once

#include <cmath>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ekma::csv {

// Splits one CSV line. Fields may be double-quoted; "" inside quotes is a
// literal quote. A trailing '\r' is ignored.
std::vector<std::string> split_line(std::string_view line);

// Reads the next non-empty line; false at end of stream.
bool next_line(std::istream& in, std::string& line);

std::optional<double> parse_double(std::string_view text);
std::optional<long> parse_long(std::string_view text);

// Shortest text that round-trips to the same double; empty for NaN.
std::string format_exact(double v);

// printf-style "%.<digits>g".
std::string format_sig(double v, int digits = 6);

// Quotes a field when it contains a comma, quote, or newline.
std::string escape(std::string_view field);

// Index of `name` in `header`, or nullopt.
std::optional<std::size_t> find_column(const std::vector<std::string>& header, std::string_view name);

}  // namespace ekma::csv
