#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace vdlr {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Index of a header column, or -1.
    int column(std::string_view name) const;
};

// Comma-separated, first line is the header. Double-quoted fields are
// unwrapped; CRLF line endings are accepted.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

// Locale-independent parse; throws DataError naming row/column on failure.
double parse_double(std::string_view text, std::size_t row, std::string_view column);

// Shortest representation that round-trips exactly.
std::string format_double(double v);

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    CsvWriter& field(std::string_view s);
    CsvWriter& field(double v);
    CsvWriter& field(long long v);
    CsvWriter& field(int v) { return field(static_cast<long long>(v)); }
    CsvWriter& field(std::size_t v) { return field(static_cast<long long>(v)); }
    void end_row();

    void row(const std::vector<std::string>& fields);

private:
    std::ostream& out_;
    bool first_ = true;
};

}  // namespace vdlr
