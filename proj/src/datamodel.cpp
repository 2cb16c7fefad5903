#include "bcbench/datamodel.hpp"

#include "bcbench/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

namespace bcbench {

namespace {

template <std::size_t N>
std::size_t find_name(const std::array<std::string_view, N>& names, std::string_view s, const char* what) {
    for (std::size_t i = 0; i < N; ++i)
        if (names[i] == s) return i;
    throw SchemaError(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

int days_in_month(int year, int month) {
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return month == 2 && leap ? 29 : kDays[month - 1];
}

}  // namespace

std::string_view to_string(Gender g) { return g == Gender::male ? "male" : "female"; }
std::string_view to_string(Condition c) {
    return c == Condition::pimd_smid ? "PIMD_SMID" : "severe_profound_ID";
}
Gender parse_gender(std::string_view s) {
    if (s == "male") return Gender::male;
    if (s == "female") return Gender::female;
    throw SchemaError("unknown gender '" + std::string(s) + "'");
}
Condition parse_condition(std::string_view s) {
    if (s == "PIMD_SMID") return Condition::pimd_smid;
    if (s == "severe_profound_ID") return Condition::severe_profound_id;
    throw SchemaError("unknown condition '" + std::string(s) + "'");
}

MajorCategoryFlags majors_from_minors(const MinorCategoryFlags& minor) {
    MajorCategoryFlags major{};
    for (std::size_t i = 0; i < kMinorCount; ++i)
        if (minor[i]) major[kMinorParent[i]] = 1;
    return major;
}

Class7 parse_class7(std::string_view s) { return static_cast<Class7>(find_name(kClass7Names, s, "class7 label")); }
Class3 parse_class3(std::string_view s) { return static_cast<Class3>(find_name(kClass3Names, s, "class3 label")); }
Class2 parse_class2(std::string_view s) { return static_cast<Class2>(find_name(kClass2Names, s, "class2 label")); }

LabelMapping LabelMapping::defaults() {
    LabelMapping m;
    m.to3_ = {Class3::action,              // calling
              Class3::response,            // response
              Class3::response_or_action,  // emotions
              Class3::response_or_action,  // interest
              Class3::response_or_action,  // negative
              Class3::action,              // selecting
              Class3::action};             // physiological_response
    m.to2_ = {Class2::response, Class2::action, Class2::action};
    return m;
}

LabelMapping LabelMapping::parse(std::string_view text) {
    LabelMapping m = defaults();
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("label mapping line " + std::to_string(lineno) + ": expected from=to");
        const std::string from = trim(std::string_view(t).substr(0, eq));
        const std::string to = trim(std::string_view(t).substr(eq + 1));
        try {
            // "response" names an outcome at both levels; a bare name resolves
            // to level 7 first, and the `3:` prefix forces level 3.
            if (from.rfind("3:", 0) == 0) {
                m.to2_[static_cast<std::size_t>(parse_class3(from.substr(2)))] = parse_class2(to);
            } else if (std::find(kClass7Names.begin(), kClass7Names.end(), from) != kClass7Names.end()) {
                m.to3_[static_cast<std::size_t>(parse_class7(from))] = parse_class3(to);
            } else {
                m.to2_[static_cast<std::size_t>(parse_class3(from))] = parse_class2(to);
            }
        } catch (const SchemaError& e) {
            throw ConfigError("label mapping line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return m;
}

LabelMapping LabelMapping::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open label mapping '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

OutcomeLabels LabelMapping::labels_for(Class7 c) const {
    const Class3 c3 = to_class3(c);
    return {c, c3, to_class2(c3)};
}

std::string LabelMapping::to_text() const {
    std::string out = "# level 7 -> level 3\n";
    for (std::size_t i = 0; i < 7; ++i)
        out += std::string(kClass7Names[i]) + "=" + std::string(kClass3Names[static_cast<std::size_t>(to3_[i])]) + "\n";
    out += "# level 3 -> level 2 (prefix 3: selects the level-3 name)\n";
    for (std::size_t i = 0; i < 3; ++i)
        out += "3:" + std::string(kClass3Names[i]) + "=" + std::string(kClass2Names[static_cast<std::size_t>(to2_[i])]) + "\n";
    return out;
}

Class3 map_class7_to_class3(Class7 c, const LabelMapping& mapping) { return mapping.to_class3(c); }
Class2 map_class3_to_class2(Class3 c, const LabelMapping& mapping) { return mapping.to_class2(c); }

int class_count(int class_level) {
    if (class_level != 2 && class_level != 3 && class_level != 7)
        throw ConfigError("class level must be 2, 3 or 7, got " + std::to_string(class_level));
    return class_level;
}

int label_at_level(const OutcomeLabels& labels, int class_level) {
    switch (class_count(class_level)) {
        case 2: return static_cast<int>(labels.class2);
        case 3: return static_cast<int>(labels.class3);
        default: return static_cast<int>(labels.class7);
    }
}

std::string_view to_string(Season s) {
    static constexpr std::array<std::string_view, 4> kNames{"spring", "summer", "autumn", "winter"};
    return kNames[static_cast<std::size_t>(s)];
}

Season parse_season(std::string_view s) {
    for (auto season : {Season::spring, Season::summer, Season::autumn, Season::winter})
        if (to_string(season) == s) return season;
    throw SchemaError("unknown season '" + std::string(s) + "'");
}

Season season_for_month(int month) {
    if (month < 1 || month > 12) throw SchemaError("month out of range: " + std::to_string(month));
    if (month >= 3 && month <= 5) return Season::spring;
    if (month >= 6 && month <= 8) return Season::summer;
    if (month >= 9 && month <= 11) return Season::autumn;
    return Season::winter;
}

std::int64_t TimeStamp::epoch_seconds() const {
    return days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day)) * 86400 +
           hour * 3600 + minute * 60 + second;
}

TimeStamp TimeStamp::from_epoch_seconds(std::int64_t t) {
    std::int64_t days = t >= 0 ? t / 86400 : (t - 86399) / 86400;
    std::int64_t rem = t - days * 86400;
    // civil_from_days
    days += 719468;
    const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(days - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    TimeStamp ts;
    ts.year = static_cast<int>(y + (m <= 2));
    ts.month = static_cast<int>(m);
    ts.day = static_cast<int>(d);
    ts.hour = static_cast<int>(rem / 3600);
    ts.minute = static_cast<int>(rem % 3600 / 60);
    ts.second = static_cast<int>(rem % 60);
    return ts;
}

void TimeStamp::validate() const {
    if (month < 1 || month > 12) throw SchemaError("month out of range: " + std::to_string(month));
    if (day < 1 || day > days_in_month(year, month)) throw SchemaError("day out of range: " + std::to_string(day));
    if (hour < 0 || hour > 23 || minute < 0 || minute > 59 || second < 0 || second > 59)
        throw SchemaError("time of day out of range");
}

std::string format_mac(const MacAddress& mac) {
    char buf[18];
    std::snprintf(buf, sizeof buf, "%02X:%02X:%02X:%02X:%02X:%02X", mac[0], mac[1], mac[2], mac[3], mac[4], mac[5]);
    return buf;
}

MacAddress parse_mac(std::string_view s) {
    MacAddress mac{};
    if (s.size() != 17) throw SchemaError("malformed MAC address '" + std::string(s) + "'");
    for (std::size_t i = 0; i < 6; ++i) {
        if (i > 0 && s[i * 3 - 1] != ':') throw SchemaError("malformed MAC address '" + std::string(s) + "'");
        unsigned v = 0;
        for (std::size_t j = 0; j < 2; ++j) {
            const char ch = s[i * 3 + j];
            v <<= 4;
            if (ch >= '0' && ch <= '9') v |= static_cast<unsigned>(ch - '0');
            else if (ch >= 'a' && ch <= 'f') v |= static_cast<unsigned>(ch - 'a' + 10);
            else if (ch >= 'A' && ch <= 'F') v |= static_cast<unsigned>(ch - 'A' + 10);
            else throw SchemaError("malformed MAC address '" + std::string(s) + "'");
        }
        mac[i] = static_cast<std::uint8_t>(v);
    }
    return mac;
}

const std::array<EnvColumnSpec, kEnvColumnCount>& env_columns() {
    using S = EnvSource;
    auto num = [](std::string_view n, S s, EnvNumeric f) {
        return EnvColumnSpec{n, s, false, static_cast<std::size_t>(f)};
    };
    auto cat = [](std::string_view n, S s, EnvCategorical f) {
        return EnvColumnSpec{n, s, true, static_cast<std::size_t>(f)};
    };
    static const std::array<EnvColumnSpec, kEnvColumnCount> kColumns{
        num("latitude", S::gps, EnvNumeric::latitude),
        num("longitude", S::gps, EnvNumeric::longitude),
        num("beacon_rssi", S::beacon, EnvNumeric::beacon_rssi),
        cat("beacon_name", S::beacon, EnvCategorical::beacon_name),
        num("uv_range", S::alps, EnvNumeric::uv_range),
        num("ambient_light", S::alps, EnvNumeric::ambient_light),
        num("geomag_g1", S::alps, EnvNumeric::geomag_g1),
        num("geomag_g2", S::alps, EnvNumeric::geomag_g2),
        num("geomag_g3", S::alps, EnvNumeric::geomag_g3),
        num("geomag_ut1", S::alps, EnvNumeric::geomag_ut1),
        num("geomag_ut2", S::alps, EnvNumeric::geomag_ut2),
        num("geomag_ut3", S::alps, EnvNumeric::geomag_ut3),
        num("pressure", S::alps, EnvNumeric::pressure),
        num("temperature", S::alps, EnvNumeric::temperature),
        num("humidity", S::alps, EnvNumeric::humidity),
        cat("weather_condition", S::weather, EnvCategorical::weather_condition),
        num("sunset", S::weather, EnvNumeric::sunset),
        num("sunrise", S::weather, EnvNumeric::sunrise),
        num("current_time", S::weather, EnvNumeric::current_time),
        num("temp_min", S::weather, EnvNumeric::temp_min),
        num("temp_max", S::weather, EnvNumeric::temp_max),
        num("weather_pressure", S::weather, EnvNumeric::weather_pressure),
        num("temp_main", S::weather, EnvNumeric::temp_main),
        num("weather_humidity", S::weather, EnvNumeric::weather_humidity),
        cat("weather_description", S::weather, EnvCategorical::weather_description),
        num("cloudiness", S::weather, EnvNumeric::cloudiness),
        num("wind_direction", S::weather, EnvNumeric::wind_direction),
        num("wind_speed", S::weather, EnvNumeric::wind_speed),
    };
    return kColumns;
}

std::string_view to_string(EnvNumeric f) {
    for (const auto& col : env_columns())
        if (!col.categorical && col.slot == static_cast<std::size_t>(f)) return col.name;
    return "?";
}

std::optional<ValueRange> physical_range(EnvNumeric f) {
    switch (f) {
        case EnvNumeric::latitude: return ValueRange{-90.0, 90.0};
        case EnvNumeric::longitude: return ValueRange{-180.0, 180.0};
        case EnvNumeric::beacon_rssi: return ValueRange{-127.0, 20.0};
        case EnvNumeric::uv_range: return ValueRange{0.0, 20.48};
        case EnvNumeric::ambient_light: return ValueRange{0.0, 81900.0};
        case EnvNumeric::geomag_g1:
        case EnvNumeric::geomag_g2:
        case EnvNumeric::geomag_g3: return ValueRange{-2.4, 2.4};
        case EnvNumeric::pressure: return ValueRange{300.0, 1100.0};
        case EnvNumeric::temperature: return ValueRange{-20.0, 60.0};
        case EnvNumeric::humidity: return ValueRange{0.0, 100.0};
        case EnvNumeric::weather_humidity:
        case EnvNumeric::cloudiness: return ValueRange{0.0, 100.0};
        case EnvNumeric::wind_direction: return ValueRange{0.0, 360.0, true};
        case EnvNumeric::wind_speed: return ValueRange{0.0, 1e9};
        default: return std::nullopt;
    }
}

std::size_t EnvironmentSnapshot::missing_count() const {
    std::size_t n = 0;
    for (const auto& v : numeric) n += !v.has_value();
    for (const auto& v : categorical) n += !v.has_value();
    return n;
}

bool EnvironmentSnapshot::has_any_source() const {
    return std::any_of(numeric.begin(), numeric.end(), [](const auto& v) { return v.has_value(); }) ||
           std::any_of(categorical.begin(), categorical.end(), [](const auto& v) { return v.has_value(); });
}

void EnvironmentSnapshot::validate() const {
    for (std::size_t i = 0; i < kEnvNumericCount; ++i) {
        if (!numeric[i]) continue;
        const auto f = static_cast<EnvNumeric>(i);
        const double v = *numeric[i];
        if (!std::isfinite(v)) throw RangeError(std::string(to_string(f)), v);
        if (auto r = physical_range(f); r && !r->contains(v)) throw RangeError(std::string(to_string(f)), v);
    }
    const auto& sunrise = (*this)[EnvNumeric::sunrise];
    const auto& sunset = (*this)[EnvNumeric::sunset];
    if (sunrise && sunset && !(*sunrise < *sunset && *sunset - *sunrise < 86400.0))
        throw RangeError("sunset", *sunset);
    stamp.validate();
}

void validate_records(std::span<const BehaviorRecord> records) {
    std::unordered_set<std::string> ids;
    std::map<std::string, int> session_child;
    for (const auto& r : records) {
        if (!ids.insert(r.record_id).second) throw SchemaError("duplicate record_id '" + r.record_id + "'");
        if (r.child_id < 1 || r.child_id > 20)
            throw SchemaError("child_id out of range in record '" + r.record_id + "'");
        for (auto f : r.minor)
            if (f > 1) throw SchemaError("minor flag not binary in record '" + r.record_id + "'");
        for (auto f : r.major)
            if (f > 1) throw SchemaError("major flag not binary in record '" + r.record_id + "'");
        if (majors_from_minors(r.minor) != r.major)
            throw SchemaError("major flags disagree with minor flags in record '" + r.record_id + "'");
        auto [it, inserted] = session_child.emplace(r.session_id, r.child_id);
        if (!inserted && it->second != r.child_id)
            throw SchemaError("session '" + r.session_id + "' spans several children");
        r.env.validate();
    }
}

// ---------------------------------------------------------------------------

FeatureMatrix::FeatureMatrix(std::vector<std::string> column_names, std::size_t rows, std::vector<double> values,
                             std::vector<int> labels, int class_level)
    : names_(std::move(column_names)), rows_(rows), values_(std::move(values)), labels_(std::move(labels)),
      class_level_(class_level) {
    if (values_.size() != rows_ * names_.size()) throw SchemaError("feature matrix value count mismatch");
    if (labels_.size() != rows_) throw SchemaError("label vector length differs from row count");
    if (class_level_ < 2) throw SchemaError("class level must be at least 2");
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (std::isnan(values_[i]))
            throw MissingDataError("missing value in column '" + names_[i % names_.size()] + "' row " +
                                   std::to_string(i / names_.size()));
    for (int y : labels_)
        if (y < 0 || y >= class_level_) throw SchemaError("label " + std::to_string(y) + " outside class range");
}

std::optional<std::size_t> FeatureMatrix::column_index(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return i;
    return std::nullopt;
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::size_t> cols) const {
    std::vector<std::string> names;
    names.reserve(cols.size());
    for (auto c : cols) {
        if (c >= this->cols()) throw SchemaError("column index out of range");
        names.push_back(names_[c]);
    }
    std::vector<double> v;
    v.reserve(rows_ * cols.size());
    for (std::size_t r = 0; r < rows_; ++r)
        for (auto c : cols) v.push_back(at(r, c));
    return FeatureMatrix(std::move(names), rows_, std::move(v), labels_, class_level_);
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows) const {
    std::vector<double> v;
    v.reserve(rows.size() * cols());
    std::vector<int> y;
    y.reserve(rows.size());
    for (auto r : rows) {
        if (r >= rows_) throw SchemaError("row index out of range");
        auto src = row(r);
        v.insert(v.end(), src.begin(), src.end());
        y.push_back(labels_[r]);
    }
    return FeatureMatrix(names_, rows.size(), std::move(v), std::move(y), class_level_);
}

std::vector<double> FeatureMatrix::column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = at(r, c);
    return out;
}

// ---------------------------------------------------------------------------

EncodedColumns encode_columns(std::span<const RawColumn> columns, const EncodingOptions& options) {
    if (!options.one_hot && !options.integer_code)
        throw ConfigError("at least one categorical encoding must be enabled");
    EncodedColumns out;
    constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
    std::optional<std::size_t> rows;
    for (const auto& col : columns) {
        const std::size_t n = col.categorical ? col.levels.size() : col.numeric.size();
        if (rows && *rows != n) throw SchemaError("column '" + col.name + "' has a different length");
        rows = n;
        if (!col.categorical) {
            out.names.push_back(col.name);
            out.columns.push_back(col.numeric);
            continue;
        }
        std::set<std::string> distinct;
        for (const auto& v : col.levels)
            if (v) distinct.insert(*v);
        const std::vector<std::string> levels(distinct.begin(), distinct.end());
        auto code_of = [&](const std::string& v) {
            return static_cast<double>(std::lower_bound(levels.begin(), levels.end(), v) - levels.begin());
        };
        if (options.integer_code) {
            std::vector<double> codes(n);
            for (std::size_t r = 0; r < n; ++r) codes[r] = col.levels[r] ? code_of(*col.levels[r]) : kMissing;
            out.names.push_back(col.name);
            out.columns.push_back(std::move(codes));
        }
        if (options.one_hot) {
            for (const auto& level : levels) {
                std::vector<double> ind(n);
                for (std::size_t r = 0; r < n; ++r)
                    ind[r] = col.levels[r] ? (*col.levels[r] == level ? 1.0 : 0.0) : kMissing;
                out.names.push_back(col.name + "=" + level);
                out.columns.push_back(std::move(ind));
            }
        }
    }
    out.rows = rows.value_or(0);
    return out;
}

namespace {

std::vector<RawColumn> characteristic_columns(std::span<const BehaviorRecord> records) {
    RawColumn gender{"gender", false, {}, {}};
    RawColumn condition{"condition", false, {}, {}};
    for (const auto& r : records) {
        gender.numeric.push_back(static_cast<double>(r.characteristics.gender));
        condition.numeric.push_back(static_cast<double>(r.characteristics.condition));
    }
    return {std::move(gender), std::move(condition)};
}

std::string two_digits(int v) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "%02d", v);
    return buf;
}

std::vector<RawColumn> environment_columns(std::span<const BehaviorRecord> records) {
    constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
    std::vector<RawColumn> cols;
    for (const auto& spec : env_columns()) {
        RawColumn col{std::string(spec.name), spec.categorical, {}, {}};
        for (const auto& r : records) {
            if (spec.categorical) col.levels.push_back(r.env.categorical[spec.slot]);
            else col.numeric.push_back(r.env.numeric[spec.slot].value_or(kMissing));
        }
        cols.push_back(std::move(col));
    }
    RawColumn season{"season", true, {}, {}}, year{"year", true, {}, {}}, month{"month", true, {}, {}};
    RawColumn day{"day", false, {}, {}}, hour{"hour", false, {}, {}}, minute{"minute", false, {}, {}},
        second{"second", false, {}, {}};
    for (const auto& r : records) {
        const auto& s = r.env.stamp;
        season.levels.emplace_back(std::string(to_string(s.season())));
        year.levels.emplace_back(std::to_string(s.year));
        month.levels.emplace_back(two_digits(s.month));
        day.numeric.push_back(s.day);
        hour.numeric.push_back(s.hour);
        minute.numeric.push_back(s.minute);
        second.numeric.push_back(s.second);
    }
    for (auto* c : {&season, &year, &month, &day, &hour, &minute, &second}) cols.push_back(std::move(*c));
    return cols;
}

void append(EncodedColumns& dst, EncodedColumns&& src) {
    for (auto& n : src.names) dst.names.push_back(std::move(n));
    for (auto& c : src.columns) dst.columns.push_back(std::move(c));
    dst.rows = src.rows;
}

}  // namespace

EncodedColumns encode_categoricals(std::span<const BehaviorRecord> records, const EncodingOptions& options) {
    if (records.empty()) throw EmptyInput("no records to encode");
    auto chars = characteristic_columns(records);
    auto env = environment_columns(records);
    EncodedColumns out = encode_columns(chars, options);
    append(out, encode_columns(env, options));
    return out;
}

char to_char(ComboId c) { return static_cast<char>('a' + static_cast<int>(c)); }

ComboId parse_combo(std::string_view s) {
    if (s.size() == 1 && s[0] >= 'a' && s[0] <= 'f') return static_cast<ComboId>(s[0] - 'a');
    throw ConfigError("unknown dataset combination '" + std::string(s) + "'");
}

bool combo_has_env(ComboId c) { return c == ComboId::a || c == ComboId::c || c == ComboId::e; }
bool combo_has_major(ComboId c) {
    return c == ComboId::a || c == ComboId::b || c == ComboId::e || c == ComboId::f;
}
bool combo_has_minor(ComboId c) { return c != ComboId::a && c != ComboId::b; }
int combo_behavior_variant(ComboId c) { return static_cast<int>(c) / 2; }

FeatureMatrix build_combination(std::span<const BehaviorRecord> records, ComboId combo, int class_level,
                                const EncodingOptions& options) {
    if (records.empty()) throw EmptyInput("no records for dataset combination");
    class_count(class_level);
    const std::size_t n = records.size();

    std::vector<std::string> names;
    std::vector<std::vector<double>> cols;
    {
        auto chars = encode_columns(characteristic_columns(records), options);
        names = std::move(chars.names);
        cols = std::move(chars.columns);
    }
    if (combo_has_major(combo)) {
        for (std::size_t j = 0; j < kMajorCount; ++j) {
            names.push_back("major_" + std::string(kMajorNames[j]));
            std::vector<double> c(n);
            for (std::size_t r = 0; r < n; ++r) c[r] = records[r].major[j];
            cols.push_back(std::move(c));
        }
    }
    if (combo_has_minor(combo)) {
        for (std::size_t j = 0; j < kMinorCount; ++j) {
            names.push_back("minor_" + std::string(kMinorNames[j]));
            std::vector<double> c(n);
            for (std::size_t r = 0; r < n; ++r) c[r] = records[r].minor[j];
            cols.push_back(std::move(c));
        }
    }
    if (combo_has_env(combo)) {
        auto env = encode_columns(environment_columns(records), options);
        for (std::size_t j = 0; j < env.names.size(); ++j) {
            for (std::size_t r = 0; r < n; ++r)
                if (std::isnan(env.columns[j][r]))
                    throw MissingDataError("environment column '" + env.names[j] + "' is missing in record '" +
                                           records[r].record_id + "'; impute before building combination " +
                                           std::string(1, to_char(combo)));
            names.push_back(std::move(env.names[j]));
            cols.push_back(std::move(env.columns[j]));
        }
    }

    std::vector<double> values(n * cols.size());
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < cols.size(); ++c) values[r * cols.size() + c] = cols[c][r];
    std::vector<int> labels(n);
    for (std::size_t r = 0; r < n; ++r) labels[r] = label_at_level(records[r].labels, class_level);
    return FeatureMatrix(std::move(names), n, std::move(values), std::move(labels), class_level);
}

}  // namespace bcbench
