#include "bcbench/dataset_io.hpp"

#include "bcbench/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace bcbench {

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw SchemaError("missing CSV column '" + std::string(name) + "'");
}

CsvTable parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
        row.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        if (c == '"' && !field_started) {
            quoted = true;
            field_started = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\n') {
            end_row();
        } else if (c != '\r') {
            field.push_back(c);
            field_started = true;
        }
    }
    if (quoted) throw ParseError("unterminated quoted CSV field");
    if (!field.empty() || !row.empty()) end_row();
    if (rows.empty()) throw ParseError("CSV has no header row");
    CsvTable t;
    t.header = std::move(rows.front());
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != t.header.size())
            throw ParseError("CSV row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                             " fields, header has " + std::to_string(t.header.size()));
        t.rows.push_back(std::move(rows[i]));
    }
    return t;
}

namespace {

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void append_row(std::string& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += quote(fields[i]);
    }
    out += '\n';
}

}  // namespace

std::string to_csv(const CsvTable& table) {
    std::string out;
    append_row(out, table.header);
    for (const auto& r : table.rows) append_row(out, r);
    return out;
}

void write_text_file(const std::string& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write failed for '" + path + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CsvTable read_csv(const std::string& path) { return parse_csv(read_text_file(path)); }

std::string format_number(double v) {
    if (std::isnan(v)) return {};
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_number(std::string_view s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParseError("not a number: '" + std::string(s) + "'");
    return v;
}

// ---------------------------------------------------------------------------

std::vector<std::string> record_csv_header() {
    std::vector<std::string> h{"record_id", "child_id", "session_id", "gender", "condition"};
    for (auto n : kMajorNames) h.push_back("major_" + std::string(n));
    for (auto n : kMinorNames) h.push_back("minor_" + std::string(n));
    for (const auto& c : env_columns()) {
        h.emplace_back(c.name);
        if (c.name == "beacon_rssi") h.emplace_back("beacon_mac");
    }
    for (auto n : {"season", "year", "month", "day", "hour", "minute", "second", "class7", "class3", "class2"})
        h.emplace_back(n);
    return h;
}

std::string records_to_csv(const std::vector<BehaviorRecord>& records) {
    CsvTable t;
    t.header = record_csv_header();
    for (const auto& r : records) {
        std::vector<std::string> row{r.record_id, std::to_string(r.child_id), r.session_id,
                                     std::string(to_string(r.characteristics.gender)),
                                     std::string(to_string(r.characteristics.condition))};
        for (auto f : r.major) row.push_back(std::to_string(f));
        for (auto f : r.minor) row.push_back(std::to_string(f));
        for (const auto& c : env_columns()) {
            if (c.categorical) row.push_back(r.env.categorical[c.slot].value_or(""));
            else row.push_back(r.env.numeric[c.slot] ? format_number(*r.env.numeric[c.slot]) : "");
            if (c.name == "beacon_rssi") row.push_back(r.env.beacon_mac ? format_mac(*r.env.beacon_mac) : "");
        }
        const auto& s = r.env.stamp;
        row.emplace_back(to_string(s.season()));
        for (int v : {s.year, s.month, s.day, s.hour, s.minute, s.second}) row.push_back(std::to_string(v));
        row.emplace_back(kClass7Names[static_cast<std::size_t>(r.labels.class7)]);
        row.emplace_back(kClass3Names[static_cast<std::size_t>(r.labels.class3)]);
        row.emplace_back(kClass2Names[static_cast<std::size_t>(r.labels.class2)]);
        t.rows.push_back(std::move(row));
    }
    return to_csv(t);
}

namespace {

int parse_int(std::string_view s, const char* what) {
    int v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParseError(std::string("bad integer for ") + what + ": '" + std::string(s) + "'");
    return v;
}

std::uint8_t parse_flag(std::string_view s) {
    if (s == "0") return 0;
    if (s == "1") return 1;
    throw ParseError("behavior flag must be 0 or 1, got '" + std::string(s) + "'");
}

}  // namespace

std::vector<BehaviorRecord> records_from_csv(std::string_view text) {
    const CsvTable t = parse_csv(text);
    const auto header = record_csv_header();
    std::vector<std::size_t> idx;
    idx.reserve(header.size());
    for (const auto& h : header) idx.push_back(t.column(h));

    std::vector<BehaviorRecord> out;
    out.reserve(t.rows.size());
    for (const auto& row : t.rows) {
        std::size_t k = 0;
        auto next = [&]() -> const std::string& { return row[idx[k++]]; };
        BehaviorRecord r;
        r.record_id = next();
        r.child_id = parse_int(next(), "child_id");
        r.session_id = next();
        r.characteristics.gender = parse_gender(next());
        r.characteristics.condition = parse_condition(next());
        for (auto& f : r.major) f = parse_flag(next());
        for (auto& f : r.minor) f = parse_flag(next());
        for (const auto& c : env_columns()) {
            const std::string& v = next();
            if (c.categorical) {
                if (!v.empty()) r.env.categorical[c.slot] = v;
            } else if (!v.empty()) {
                r.env.numeric[c.slot] = parse_number(v);
            }
            if (c.name == "beacon_rssi") {
                const std::string& mac = next();
                if (!mac.empty()) r.env.beacon_mac = parse_mac(mac);
            }
        }
        const std::string& season = next();
        auto& s = r.env.stamp;
        s.year = parse_int(next(), "year");
        s.month = parse_int(next(), "month");
        s.day = parse_int(next(), "day");
        s.hour = parse_int(next(), "hour");
        s.minute = parse_int(next(), "minute");
        s.second = parse_int(next(), "second");
        s.validate();
        if (parse_season(season) != s.season())
            throw SchemaError("season '" + season + "' inconsistent with month in record '" + r.record_id + "'");
        r.labels.class7 = parse_class7(next());
        r.labels.class3 = parse_class3(next());
        r.labels.class2 = parse_class2(next());
        out.push_back(std::move(r));
    }
    validate_records(out);
    return out;
}

void write_records(const std::string& path, const std::vector<BehaviorRecord>& records) {
    write_text_file(path, records_to_csv(records));
}

std::vector<BehaviorRecord> read_records(const std::string& path) { return records_from_csv(read_text_file(path)); }

// ---------------------------------------------------------------------------

std::string matrix_to_csv(const FeatureMatrix& m) {
    CsvTable t;
    t.header = m.column_names();
    t.header.push_back("label:" + std::to_string(m.class_level()));
    for (std::size_t r = 0; r < m.rows(); ++r) {
        std::vector<std::string> row;
        row.reserve(m.cols() + 1);
        for (double v : m.row(r)) row.push_back(format_number(v));
        row.push_back(std::to_string(m.labels()[r]));
        t.rows.push_back(std::move(row));
    }
    return to_csv(t);
}

FeatureMatrix matrix_from_csv(std::string_view text) {
    CsvTable t = parse_csv(text);
    if (t.header.empty() || t.header.back().rfind("label:", 0) != 0)
        throw SchemaError("feature matrix CSV must end with a 'label:<level>' column");
    const int level = parse_int(std::string_view(t.header.back()).substr(6), "class level");
    std::vector<std::string> names(t.header.begin(), t.header.end() - 1);
    std::vector<double> values;
    values.reserve(t.rows.size() * names.size());
    std::vector<int> labels;
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < names.size(); ++c)
            values.push_back(row[c].empty() ? std::numeric_limits<double>::quiet_NaN() : parse_number(row[c]));
        labels.push_back(parse_int(row.back(), "label"));
    }
    const std::size_t n = labels.size();
    return FeatureMatrix(std::move(names), n, std::move(values), std::move(labels), level);
}

void write_matrix(const std::string& path, const FeatureMatrix& m) { write_text_file(path, matrix_to_csv(m)); }
FeatureMatrix read_matrix(const std::string& path) { return matrix_from_csv(read_text_file(path)); }

}  // namespace bcbench
