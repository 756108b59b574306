#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace embrec {

/// One parsed CSV record plus the line number its first field started on
/// (1-based; quoted fields may span lines).
struct CsvRecord {
    std::vector<std::string> fields;
    std::size_t line = 0;
};

/// Reads a whole RFC-4180 file: quoted fields, doubled-quote escapes,
/// embedded newlines inside quotes, LF or CRLF terminators, optional UTF-8
/// BOM. Throws IoError when the file cannot be opened and FormatError on an
/// unterminated quoted field.
std::vector<CsvRecord> read_csv(const std::string& path);

/// Parses CSV from an in-memory buffer (same rules as read_csv).
std::vector<CsvRecord> parse_csv(const std::string& text);

/// Quotes a field if it contains a comma, quote, or newline.
std::string csv_escape(const std::string& field);

}  // namespace embrec
