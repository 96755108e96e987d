#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <vector>

namespace liteshield {

// Streaming RFC-4180 reader: quoted fields, doubled quotes, embedded
// separators and newlines, CRLF or LF line endings.
class CsvReader {
public:
    explicit CsvReader(std::istream& in, char separator = ',');

    // Reads the next record into fields. Returns false at end of input.
    bool next(std::vector<std::string>& fields);

    // 1-based physical line on which the last returned record started.
    std::size_t line() const noexcept { return record_line_; }

private:
    std::istream& in_;
    char sep_;
    std::size_t line_ = 1;
    std::size_t record_line_ = 0;
};

// Quotes a field when it contains a separator, quote or line break.
std::string csv_escape(const std::string& field, char separator = ',');

}  // namespace liteshield
