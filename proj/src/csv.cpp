#include "embrec/csv.hpp"

#include <fstream>
#include <sstream>

#include "embrec/errors.hpp"

namespace embrec {

namespace {

enum class State { field_start, unquoted, quoted, quote_in_quoted };

}  // namespace

std::vector<CsvRecord> parse_csv(const std::string& text) {
    std::vector<CsvRecord> records;
    std::size_t pos = 0;
    const std::size_t size = text.size();

    // Skip a UTF-8 BOM if present.
    if (size >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) {
        pos = 3;
    }

    std::size_t line = 1;
    CsvRecord record;
    record.line = line;
    std::string field;
    State state = State::field_start;
    bool any_data = false;  // record has at least one character or separator

    auto end_field = [&] {
        record.fields.push_back(std::move(field));
        field.clear();
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record = CsvRecord{};
        any_data = false;
    };

    for (; pos < size; ++pos) {
        const char c = text[pos];
        switch (state) {
        case State::field_start:
            if (c == '"') {
                state = State::quoted;
                any_data = true;
            } else if (c == ',') {
                end_field();
                any_data = true;
            } else if (c == '\n') {
                if (any_data) {
                    end_record();
                }
                ++line;
                record.line = line;
            } else if (c == '\r') {
                // handled by the following '\n'
            } else {
                field.push_back(c);
                state = State::unquoted;
                any_data = true;
            }
            break;
        case State::unquoted:
            if (c == ',') {
                end_field();
                state = State::field_start;
            } else if (c == '\n') {
                end_record();
                ++line;
                record.line = line;
                state = State::field_start;
            } else if (c == '\r' && pos + 1 < size && text[pos + 1] == '\n') {
                // CRLF terminator: drop the CR
            } else {
                field.push_back(c);
            }
            break;
        case State::quoted:
            if (c == '"') {
                state = State::quote_in_quoted;
            } else {
                if (c == '\n') {
                    ++line;
                }
                field.push_back(c);
            }
            break;
        case State::quote_in_quoted:
            if (c == '"') {
                field.push_back('"');
                state = State::quoted;
            } else if (c == ',') {
                end_field();
                state = State::field_start;
            } else if (c == '\n') {
                end_record();
                ++line;
                record.line = line;
                state = State::field_start;
            } else if (c == '\r') {
                // CRLF after closing quote
            } else {
                std::ostringstream msg;
                msg << "line " << line << ": unexpected character after closing quote";
                throw FormatError(msg.str());
            }
            break;
        }
    }

    if (state == State::quoted) {
        std::ostringstream msg;
        msg << "line " << record.line << ": unterminated quoted field";
        throw FormatError(msg.str());
    }
    if (any_data || state == State::unquoted || state == State::quote_in_quoted) {
        end_record();
    }
    return records;
}

std::vector<CsvRecord> read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open file: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_csv(buffer.str());
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) {
        return field;
    }
    std::string out = "\"";
    for (const char c : field) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out.push_back(c);
        }
    }
    out.push_back('"');
    return out;
}

}  // namespace embrec
