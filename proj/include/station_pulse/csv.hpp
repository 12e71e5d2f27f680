#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace stationpulse {

/// Line-oriented CSV reader with minimal RFC-4180 quoting support (quoted
/// fields, doubled quotes). Tracks line numbers for error messages.
class CsvReader {
public:
    explicit CsvReader(const std::string& path);

    /// Reads the next row into `fields`. Returns false at EOF. Blank lines
    /// are skipped.
    bool next_row(std::vector<std::string>& fields);

    std::size_t line_number() const { return line_number_; }
    const std::string& path() const { return path_; }

private:
    std::ifstream in_;
    std::string path_;
    std::size_t line_number_ = 0;
};

/// Splits one CSV line (no embedded newlines).
std::vector<std::string> split_csv_line(const std::string& line);

/// Quotes a field if it contains a comma, quote, or leading/trailing space.
std::string csv_escape(const std::string& field);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

/// strtod with full-string validation; returns false on trailing garbage.
bool parse_double(const std::string& s, double& out);

}  // namespace stationpulse
