#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace phenoclust::csv {

using Record = std::vector<std::string>;

/// Parses RFC-4180 CSV: comma separated, double-quote enclosed fields with
/// "" escapes, CRLF or LF terminators, line breaks allowed inside quotes.
/// Throws DataError("ingestion") on an unterminated quote.
std::vector<Record> parse(std::istream& in);

/// Quotes a field only when it contains a comma, quote, CR, or LF.
std::string escape(std::string_view field);

void write_record(std::ostream& out, const Record& record);

} // namespace phenoclust::csv
