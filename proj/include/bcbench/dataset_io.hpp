#pragma once

#include "bcbench/datamodel.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace bcbench {

// Minimal RFC 4180 reader/writer: comma separated, double-quote escaping,
// first row is the header.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(std::string_view name) const;  // throws SchemaError
};

CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::string& path);
std::string to_csv(const CsvTable& table);
void write_text_file(const std::string& path, std::string_view text);
std::string read_text_file(const std::string& path);

// Shortest decimal form that round-trips; NaN becomes the empty string.
std::string format_number(double v);
double parse_number(std::string_view s);  // throws ParseError

// Dataset file: one row per record, empty field = missing. Column list is
// documented in docs/formats.md.
std::vector<std::string> record_csv_header();
std::string records_to_csv(const std::vector<BehaviorRecord>& records);
std::vector<BehaviorRecord> records_from_csv(std::string_view text);
void write_records(const std::string& path, const std::vector<BehaviorRecord>& records);
std::vector<BehaviorRecord> read_records(const std::string& path);

// Feature matrix file: feature columns followed by a final `label` column.
// The class level is stored in the header of the label column as `label:<L>`.
std::string matrix_to_csv(const FeatureMatrix& m);
FeatureMatrix matrix_from_csv(std::string_view text);
void write_matrix(const std::string& path, const FeatureMatrix& m);
FeatureMatrix read_matrix(const std::string& path);

}  // namespace bcbench
