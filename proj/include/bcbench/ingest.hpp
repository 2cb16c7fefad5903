#pragma once

#include "bcbench/datamodel.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bcbench {

// ---------------------------------------------------------------------------
// iBeacon advertisement
//
//   offset  size  content
//        0     3  02 01 06        flags AD structure
//        3     2  1A FF           length 26, manufacturer specific data
//        5     2  4C 00           company id 0x004C, little-endian
//        7     2  02 15           iBeacon type, remaining length 21
//        9    16  proximity UUID
//       25     2  major, big-endian
//       27     2  minor, big-endian
//       29     1  measured power at 1 m, signed dBm
// ---------------------------------------------------------------------------

inline constexpr std::size_t kIBeaconFrameSize = 30;
inline constexpr std::size_t kIBeaconHeaderSize = 9;
inline constexpr std::array<std::uint8_t, kIBeaconHeaderSize> kIBeaconHeader{0x02, 0x01, 0x06, 0x1A, 0xFF,
                                                                           0x4C, 0x00, 0x02, 0x15};

struct BeaconFrame {
    std::array<std::uint8_t, kIBeaconFrameSize> raw{};
    std::array<std::uint8_t, 16> uuid{};
    std::uint16_t major_field = 0;
    std::uint16_t minor_field = 0;
    std::int8_t tx_power = 0;
    int observed_rssi = 0;  // from the capture layer, not the payload

    friend bool operator==(const BeaconFrame&, const BeaconFrame&) = default;
};

BeaconFrame make_ibeacon(const std::array<std::uint8_t, 16>& uuid, std::uint16_t major, std::uint16_t minor,
                         std::int8_t tx_power, int observed_rssi);
// Throws MalformedFrame carrying the offending byte offset.
BeaconFrame parse_ibeacon(std::span<const std::uint8_t> bytes, int observed_rssi = 0);
std::vector<std::uint8_t> serialize_ibeacon(const BeaconFrame& frame);

// One received advertisement plus what the scanner knows about the sender.
struct BeaconSighting {
    BeaconFrame frame;
    MacAddress mac{};
    std::string name;
};

// Strongest RSSI wins; earlier sighting on ties. nullptr when empty.
const BeaconSighting* strongest_sighting(std::span<const BeaconSighting> sightings);

// ---------------------------------------------------------------------------
// ALPS sensor frame, little-endian, 96 bytes:
//
//   offset  size  content
//        0     2  'A' 'L'  magic
//        2     1  0x01     version
//        3     1  0x0B     channel count
//        4     4  frame counter, uint32
//        8    88  11 IEEE-754 float64 channels, listing order below;
//                 quiet NaN marks a channel the sensor did not report
// ---------------------------------------------------------------------------

inline constexpr std::size_t kAlpsFrameSize = 96;
inline constexpr std::size_t kAlpsHeaderSize = 4;
inline constexpr std::array<std::uint8_t, kAlpsHeaderSize> kAlpsHeader{'A', 'L', 0x01, 0x0B};

inline constexpr std::array<EnvNumeric, kAlpsChannelCount> kAlpsChannels{
    EnvNumeric::uv_range,   EnvNumeric::ambient_light, EnvNumeric::geomag_g1, EnvNumeric::geomag_g2,
    EnvNumeric::geomag_g3,  EnvNumeric::geomag_ut1,    EnvNumeric::geomag_ut2, EnvNumeric::geomag_ut3,
    EnvNumeric::pressure,   EnvNumeric::temperature,   EnvNumeric::humidity};

struct AlpsFrame {
    std::uint32_t counter = 0;
    std::array<std::optional<double>, kAlpsChannelCount> channels{};

    friend bool operator==(const AlpsFrame&, const AlpsFrame&) = default;
};

// Throws MalformedFrame on size/header problems, RangeError naming the
// channel when a decoded value is outside its sensor range.
AlpsFrame parse_alps(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_alps(const AlpsFrame& frame);

// ---------------------------------------------------------------------------
// GPS and weather
// ---------------------------------------------------------------------------

struct GpsFix {
    double latitude = 0.0;
    double longitude = 0.0;
};

// Field names of the weather fixture document, in listing order.
inline constexpr std::array<std::string_view, kWeatherFieldCount> kWeatherFieldNames{
    "weather",  "sunset",    "sunrise",     "current_time", "temp_min",       "temp_max",  "pressure",
    "temp_main", "humidity", "description", "cloudiness",   "wind_direction", "wind_speed"};

struct WeatherResponse {
    std::optional<std::string> condition;
    std::optional<double> sunset;
    std::optional<double> sunrise;
    std::optional<double> current_time;
    std::optional<double> temp_min;
    std::optional<double> temp_max;
    std::optional<double> pressure;
    std::optional<double> temp_main;
    std::optional<double> humidity;
    std::optional<std::string> description;
    std::optional<double> cloudiness;
    std::optional<double> wind_direction;
    std::optional<double> wind_speed;

    std::size_t present_count() const;
    void validate() const;  // RangeError

    friend bool operator==(const WeatherResponse&, const WeatherResponse&) = default;
};

// Flat fixture document with the 13 named fields; absent keys or nulls are
// missing values.
WeatherResponse decode_weather_fixture(std::string_view json);
std::string encode_weather_fixture(const WeatherResponse& w);
// Current-weather response of the OpenWeatherMap API (metric units).
WeatherResponse decode_openweathermap(std::string_view json);

enum class WeatherSourceMode { fixture, live };

struct WeatherSource {
    WeatherSourceMode mode = WeatherSourceMode::fixture;
    std::string fixture_dir;
    std::string endpoint_url;  // live mode, e.g. http://host:port/data/2.5/weather
    std::string api_key;
    int timeout_seconds = 5;

    // Live settings from BCBENCH_WEATHER_URL and BCBENCH_WEATHER_KEY.
    static WeatherSource live_from_environment();
    static WeatherSource fixtures(std::string dir);
};

// File name of the fixture for a location and hour; coordinates rounded to
// four decimals.
std::string weather_fixture_name(double lat, double lon, const TimeStamp& when);

// Throws SourceUnavailable on a missing fixture, network failure or a
// document that does not decode; nothing is returned in that case.
WeatherResponse fetch_weather(double lat, double lon, const TimeStamp& when, const WeatherSource& source);

// ---------------------------------------------------------------------------
// Record assembly
// ---------------------------------------------------------------------------

// Coded behavior observation before any sensor data is attached.
struct BehaviorEvent {
    std::string record_id;
    int child_id = 1;
    std::string session_id;
    ChildCharacteristics characteristics;
    MajorCategoryFlags major{};
    MinorCategoryFlags minor{};
    TimeStamp timestamp;
    OutcomeLabels labels;
};

struct EventSources {
    std::vector<BeaconSighting> beacons;
    std::optional<AlpsFrame> alps;
    std::optional<GpsFix> gps;
    std::optional<WeatherResponse> weather;
};

// Attaches whatever sources are present. Returns nullopt (Discarded) when the
// event ends up with no environment value at all.
std::optional<BehaviorRecord> assemble_record(const BehaviorEvent& event, const EventSources& sources);

struct IngestCounters {
    std::size_t records_in = 0;
    std::size_t retained = 0;
    std::size_t discarded = 0;
    std::size_t malformed_frames = 0;
    std::size_t weather_unavailable = 0;
};

class IngestBatch {
public:
    void add(const BehaviorEvent& event, const EventSources& sources);
    void count_malformed() { ++counters_.malformed_frames; }
    void count_weather_unavailable() { ++counters_.weather_unavailable; }
    const IngestCounters& counters() const { return counters_; }
    const std::vector<BehaviorRecord>& records() const { return records_; }
    std::vector<BehaviorRecord> take_records() { return std::move(records_); }

private:
    IngestCounters counters_;
    std::vector<BehaviorRecord> records_;
};

// Source directory layout:
//   events.csv      dataset CSV with the environment columns empty
//   beacons.jsonl   {"record_id","mac","name","rssi","frame": hex}
//   alps.jsonl      {"record_id","frame": hex}
//   gps.jsonl       {"record_id","latitude","longitude"}
// Weather comes from `weather` (fixture directory or live service).
struct IngestResult {
    std::vector<BehaviorRecord> records;
    IngestCounters counters;
};
IngestResult ingest_directory(const std::string& dir, const WeatherSource& weather);

std::string to_hex(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> from_hex(std::string_view hex);

// Append-only JSON-lines store of assembled records. One writer at a time.
class RecordStore {
public:
    explicit RecordStore(std::string path) : path_(std::move(path)) {}
    void append(const BehaviorRecord& record) const;
    std::vector<BehaviorRecord> load() const;

private:
    std::string path_;
};

std::string record_to_json(const BehaviorRecord& record);
BehaviorRecord record_from_json(std::string_view line);

}  // namespace bcbench
