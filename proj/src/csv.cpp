#include "liteshield/csv.hpp"

#include "liteshield/error.hpp"

namespace liteshield {

CsvReader::CsvReader(std::istream& in, char separator) : in_(in), sep_(separator) {}

bool CsvReader::next(std::vector<std::string>& fields) {
    fields.clear();
    int c = in_.get();
    if (c == std::char_traits<char>::eof()) return false;
    record_line_ = line_;

    std::string field;
    bool quoted = false;
    bool field_started_quoted = false;
    for (;; c = in_.get()) {
        if (c == std::char_traits<char>::eof()) {
            if (quoted) {
                throw DataError("unterminated quoted field starting on line " +
                                std::to_string(record_line_));
            }
            fields.push_back(std::move(field));
            return true;
        }
        const char ch = static_cast<char>(c);
        if (quoted) {
            if (ch == '"') {
                if (in_.peek() == '"') {
                    in_.get();
                    field.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                if (ch == '\n') ++line_;
                field.push_back(ch);
            }
            continue;
        }
        if (ch == '"' && field.empty() && !field_started_quoted) {
            quoted = true;
            field_started_quoted = true;
        } else if (ch == sep_) {
            fields.push_back(std::move(field));
            field.clear();
            field_started_quoted = false;
        } else if (ch == '\r' && in_.peek() == '\n') {
            // CRLF: the '\n' ends the record on the next iteration.
        } else if (ch == '\n') {
            ++line_;
            fields.push_back(std::move(field));
            return true;
        } else {
            field.push_back(ch);
        }
    }
}

std::string csv_escape(const std::string& field, char separator) {
    if (field.find_first_of(std::string{separator, '"', '\n', '\r'}) == std::string::npos) {
        return field;
    }
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

}  // namespace liteshield
