#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bcbench {

// ---------------------------------------------------------------------------
// Child characteristics and behavior categories
// ---------------------------------------------------------------------------

enum class Gender : std::uint8_t { male, female };
enum class Condition : std::uint8_t { pimd_smid, severe_profound_id };

struct ChildCharacteristics {
    Gender gender = Gender::male;
    Condition condition = Condition::pimd_smid;

    friend bool operator==(const ChildCharacteristics&, const ChildCharacteristics&) = default;
};

std::string_view to_string(Gender g);
std::string_view to_string(Condition c);
Gender parse_gender(std::string_view s);
Condition parse_condition(std::string_view s);

inline constexpr std::size_t kMajorCount = 6;
inline constexpr std::size_t kMinorCount = 16;

inline constexpr std::array<std::string_view, kMajorCount> kMajorNames{
    "eye_movement", "facial_expression", "vocalization",
    "hand_movement", "body_movement", "non_communicative"};

inline constexpr std::array<std::string_view, kMinorCount> kMinorNames{
    "gazing", "eye_tracking", "changing_line_of_sight", "opening_closing_eyelids",
    "smiling", "facial_expression_other", "concentrating_listening",
    "vocalization",
    "pointing", "reaching", "moving",
    "approaching", "contacting", "body_part_movement",
    "stereotypical", "injurious"};

// Major category that owns each minor category.
inline constexpr std::array<std::size_t, kMinorCount> kMinorParent{
    0, 0, 0, 0, 1, 1, 1, 2, 3, 3, 3, 4, 4, 4, 5, 5};

using MajorCategoryFlags = std::array<std::uint8_t, kMajorCount>;
using MinorCategoryFlags = std::array<std::uint8_t, kMinorCount>;

MajorCategoryFlags majors_from_minors(const MinorCategoryFlags& minor);

// ---------------------------------------------------------------------------
// Outcome classes
// ---------------------------------------------------------------------------

enum class Class7 : std::uint8_t {
    calling, response, emotions, interest, negative, selecting, physiological_response
};
enum class Class3 : std::uint8_t { response, action, response_or_action };
enum class Class2 : std::uint8_t { response, action };

inline constexpr std::array<std::string_view, 7> kClass7Names{
    "calling", "response", "emotions", "interest", "negative", "selecting", "physiological_response"};
inline constexpr std::array<std::string_view, 3> kClass3Names{"response", "action", "response_or_action"};
inline constexpr std::array<std::string_view, 2> kClass2Names{"response", "action"};

Class7 parse_class7(std::string_view s);
Class3 parse_class3(std::string_view s);
Class2 parse_class2(std::string_view s);

struct OutcomeLabels {
    Class7 class7 = Class7::calling;
    Class3 class3 = Class3::response;
    Class2 class2 = Class2::response;

    friend bool operator==(const OutcomeLabels&, const OutcomeLabels&) = default;
};

// Editable 7 -> 3 -> 2 outcome hierarchy. The text form is one `from=to` pair
// per line, `#` starts a comment, e.g.
//
//     calling=action
//     response_or_action=action
//
// Lines for level-7 names set the 7->3 table; lines for level-3 names set the
// 3->2 table. Unlisted entries keep their defaults.
class LabelMapping {
public:
    // response -> response; every other level-7 outcome lands on an
    // action-bearing level-3 class; response_or_action collapses to action.
    static LabelMapping defaults();
    static LabelMapping parse(std::string_view text);
    static LabelMapping load(const std::string& path);

    Class3 to_class3(Class7 c) const { return to3_[static_cast<std::size_t>(c)]; }
    Class2 to_class2(Class3 c) const { return to2_[static_cast<std::size_t>(c)]; }
    OutcomeLabels labels_for(Class7 c) const;
    std::string to_text() const;

private:
    std::array<Class3, 7> to3_{};
    std::array<Class2, 3> to2_{};
};

Class3 map_class7_to_class3(Class7 c, const LabelMapping& mapping = LabelMapping::defaults());
Class2 map_class3_to_class2(Class3 c, const LabelMapping& mapping = LabelMapping::defaults());

// Integer label of a record at class level 2, 3 or 7.
int label_at_level(const OutcomeLabels& labels, int class_level);
int class_count(int class_level);

// ---------------------------------------------------------------------------
// Environment snapshot
// ---------------------------------------------------------------------------

enum class Season : std::uint8_t { spring, summer, autumn, winter };
std::string_view to_string(Season s);
Season parse_season(std::string_view s);
// 3-5 spring, 6-8 summer, 9-11 autumn, 12-2 winter.
Season season_for_month(int month);

struct TimeStamp {
    int year = 2020;
    int month = 1;
    int day = 1;
    int hour = 0;
    int minute = 0;
    int second = 0;

    Season season() const { return season_for_month(month); }
    // Seconds since 1970-01-01T00:00:00 of the civil time (no zone applied).
    std::int64_t epoch_seconds() const;
    static TimeStamp from_epoch_seconds(std::int64_t t);
    void validate() const;

    friend bool operator==(const TimeStamp&, const TimeStamp&) = default;
};

using MacAddress = std::array<std::uint8_t, 6>;
std::string format_mac(const MacAddress& mac);
MacAddress parse_mac(std::string_view s);

// Numeric environment fields; slot order matches the CSV column order.
enum class EnvNumeric : std::size_t {
    latitude, longitude,
    beacon_rssi,
    uv_range, ambient_light, geomag_g1, geomag_g2, geomag_g3,
    geomag_ut1, geomag_ut2, geomag_ut3, pressure, temperature, humidity,
    sunset, sunrise, current_time, temp_min, temp_max, weather_pressure,
    temp_main, weather_humidity, cloudiness, wind_direction, wind_speed,
};
inline constexpr std::size_t kEnvNumericCount = 25;

enum class EnvCategorical : std::size_t { beacon_name, weather_condition, weather_description };
inline constexpr std::size_t kEnvCategoricalCount = 3;

enum class EnvSource : std::uint8_t { gps, beacon, alps, weather };

struct EnvColumnSpec {
    std::string_view name;
    EnvSource source;
    bool categorical;
    std::size_t slot;  // index into numeric or categorical storage
};

// Imputable environment columns in source order (GPS, iBeacon, ALPS, weather).
// Timestamp-derived columns are always observed and are not listed here.
inline constexpr std::size_t kEnvColumnCount = kEnvNumericCount + kEnvCategoricalCount;
const std::array<EnvColumnSpec, kEnvColumnCount>& env_columns();

inline constexpr std::size_t kAlpsChannelCount = 11;
inline constexpr std::size_t kWeatherFieldCount = 13;

struct EnvironmentSnapshot {
    std::array<std::optional<double>, kEnvNumericCount> numeric{};
    std::array<std::optional<std::string>, kEnvCategoricalCount> categorical{};
    std::optional<MacAddress> beacon_mac;  // metadata only, never a feature
    TimeStamp stamp{};

    std::optional<double>& operator[](EnvNumeric f) { return numeric[static_cast<std::size_t>(f)]; }
    const std::optional<double>& operator[](EnvNumeric f) const { return numeric[static_cast<std::size_t>(f)]; }
    std::optional<std::string>& operator[](EnvCategorical f) { return categorical[static_cast<std::size_t>(f)]; }
    const std::optional<std::string>& operator[](EnvCategorical f) const {
        return categorical[static_cast<std::size_t>(f)];
    }

    bool observed(const EnvColumnSpec& col) const {
        return col.categorical ? categorical[col.slot].has_value() : numeric[col.slot].has_value();
    }
    std::size_t missing_count() const;
    bool has_any_source() const;

    // Throws RangeError when a present value violates its physical range.
    void validate() const;

    friend bool operator==(const EnvironmentSnapshot&, const EnvironmentSnapshot&) = default;
};

// Physical range of a numeric channel, inclusive unless noted.
struct ValueRange {
    double lo;
    double hi;
    bool hi_exclusive = false;
    bool contains(double v) const { return v >= lo && (hi_exclusive ? v < hi : v <= hi); }
};
std::optional<ValueRange> physical_range(EnvNumeric f);
std::string_view to_string(EnvNumeric f);

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

struct BehaviorRecord {
    std::string record_id;
    int child_id = 1;
    std::string session_id;
    ChildCharacteristics characteristics;
    MajorCategoryFlags major{};
    MinorCategoryFlags minor{};
    EnvironmentSnapshot env;
    OutcomeLabels labels;

    friend bool operator==(const BehaviorRecord&, const BehaviorRecord&) = default;
};

// Checks child_id range, flag values, major/minor consistency, unique ids and
// physical ranges. Throws SchemaError or RangeError.
void validate_records(std::span<const BehaviorRecord> records);

// ---------------------------------------------------------------------------
// Feature matrices
// ---------------------------------------------------------------------------

// Complete numeric design matrix with named columns and an integer label
// vector. Row-major storage.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::vector<std::string> column_names, std::size_t rows, std::vector<double> values,
                  std::vector<int> labels, int class_level);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return names_.size(); }
    double at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }
    std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols(), cols()}; }
    std::span<const double> values() const { return values_; }
    const std::vector<std::string>& column_names() const { return names_; }
    const std::vector<int>& labels() const { return labels_; }
    int class_level() const { return class_level_; }
    // Number of label values, i.e. class_count(class_level) for the study levels.
    int n_classes() const { return class_level_; }
    std::optional<std::size_t> column_index(std::string_view name) const;

    FeatureMatrix select_columns(std::span<const std::size_t> cols) const;
    FeatureMatrix select_rows(std::span<const std::size_t> rows) const;
    std::vector<double> column(std::size_t c) const;

private:
    std::vector<std::string> names_;
    std::size_t rows_ = 0;
    std::vector<double> values_;
    std::vector<int> labels_;
    int class_level_ = 2;
};

// A column prior to encoding. Numeric columns use NaN for missing cells;
// categorical ones use nullopt.
struct RawColumn {
    std::string name;
    bool categorical = false;
    std::vector<double> numeric;
    std::vector<std::optional<std::string>> levels;
};

struct EncodingOptions {
    bool one_hot = true;
    bool integer_code = true;
};

// Column-major numeric block; NaN marks a missing cell.
struct EncodedColumns {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    std::size_t rows = 0;
};

// Categorical columns become an integer-code column (`name`) followed by one
// indicator column per level (`name=level`), levels sorted lexicographically.
// Numeric columns pass through.
EncodedColumns encode_columns(std::span<const RawColumn> columns, const EncodingOptions& options = {});

// Characteristic and environment columns of the records, encoded.
EncodedColumns encode_categoricals(std::span<const BehaviorRecord> records, const EncodingOptions& options = {});

enum class ComboId : std::uint8_t { a, b, c, d, e, f };
inline constexpr std::array<ComboId, 6> kAllCombos{ComboId::a, ComboId::b, ComboId::c,
                                                   ComboId::d, ComboId::e, ComboId::f};
char to_char(ComboId c);
ComboId parse_combo(std::string_view s);
bool combo_has_env(ComboId c);
bool combo_has_major(ComboId c);
bool combo_has_minor(ComboId c);
// a/b -> 0 (major), c/d -> 1 (minor), e/f -> 2 (both).
int combo_behavior_variant(ComboId c);

// Characteristics, then major flags, then minor flags, then encoded
// environment, each group only when the combination includes it.
FeatureMatrix build_combination(std::span<const BehaviorRecord> records, ComboId combo, int class_level,
                                const EncodingOptions& options = {});

}  // namespace bcbench
