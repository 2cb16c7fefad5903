#include "bcbench/ingest.hpp"

#include "bcbench/dataset_io.hpp"
#include "bcbench/error.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>

#ifdef BCBENCH_LIVE_WEATHER
#include <httplib.h>
#endif

namespace bcbench {

using nlohmann::json;

// ---------------------------------------------------------------------------
// iBeacon
// ---------------------------------------------------------------------------

BeaconFrame make_ibeacon(const std::array<std::uint8_t, 16>& uuid, std::uint16_t major, std::uint16_t minor,
                         std::int8_t tx_power, int observed_rssi) {
    BeaconFrame f;
    std::copy(kIBeaconHeader.begin(), kIBeaconHeader.end(), f.raw.begin());
    std::copy(uuid.begin(), uuid.end(), f.raw.begin() + 9);
    f.raw[25] = static_cast<std::uint8_t>(major >> 8);
    f.raw[26] = static_cast<std::uint8_t>(major & 0xFF);
    f.raw[27] = static_cast<std::uint8_t>(minor >> 8);
    f.raw[28] = static_cast<std::uint8_t>(minor & 0xFF);
    f.raw[29] = static_cast<std::uint8_t>(tx_power);
    f.uuid = uuid;
    f.major_field = major;
    f.minor_field = minor;
    f.tx_power = tx_power;
    f.observed_rssi = observed_rssi;
    return f;
}

BeaconFrame parse_ibeacon(std::span<const std::uint8_t> bytes, int observed_rssi) {
    if (bytes.size() < kIBeaconFrameSize)
        throw MalformedFrame(bytes.size(), "iBeacon frame truncated, need 30 bytes");
    if (bytes.size() > kIBeaconFrameSize) throw MalformedFrame(kIBeaconFrameSize, "trailing bytes after iBeacon frame");
    static constexpr const char* kWhat[kIBeaconHeaderSize] = {
        "flags length", "flags type", "flags value", "manufacturer data length", "manufacturer data type",
        "company id", "company id", "iBeacon type", "iBeacon length"};
    for (std::size_t i = 0; i < kIBeaconHeaderSize; ++i)
        if (bytes[i] != kIBeaconHeader[i]) throw MalformedFrame(i, std::string("unexpected ") + kWhat[i]);
    std::array<std::uint8_t, 16> uuid{};
    std::copy(bytes.begin() + 9, bytes.begin() + 25, uuid.begin());
    const auto major = static_cast<std::uint16_t>((bytes[25] << 8) | bytes[26]);
    const auto minor = static_cast<std::uint16_t>((bytes[27] << 8) | bytes[28]);
    return make_ibeacon(uuid, major, minor, static_cast<std::int8_t>(bytes[29]), observed_rssi);
}

std::vector<std::uint8_t> serialize_ibeacon(const BeaconFrame& frame) {
    const BeaconFrame canonical =
        make_ibeacon(frame.uuid, frame.major_field, frame.minor_field, frame.tx_power, frame.observed_rssi);
    return {canonical.raw.begin(), canonical.raw.end()};
}

const BeaconSighting* strongest_sighting(std::span<const BeaconSighting> sightings) {
    const BeaconSighting* best = nullptr;
    for (const auto& s : sightings)
        if (!best || s.frame.observed_rssi > best->frame.observed_rssi) best = &s;
    return best;
}

// ---------------------------------------------------------------------------
// ALPS
// ---------------------------------------------------------------------------

namespace {

void put_u64le(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64le(std::span<const std::uint8_t> b, std::size_t off) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[off + static_cast<std::size_t>(i)];
    return v;
}

constexpr std::uint64_t kAbsentChannel = 0x7FF8000000000000ULL;

}  // namespace

AlpsFrame parse_alps(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kAlpsFrameSize) throw MalformedFrame(bytes.size(), "ALPS frame truncated, need 96 bytes");
    if (bytes.size() > kAlpsFrameSize) throw MalformedFrame(kAlpsFrameSize, "trailing bytes after ALPS frame");
    for (std::size_t i = 0; i < kAlpsHeaderSize; ++i)
        if (bytes[i] != kAlpsHeader[i]) throw MalformedFrame(i, "unexpected ALPS header byte");
    AlpsFrame f;
    f.counter = static_cast<std::uint32_t>(bytes[4]) | static_cast<std::uint32_t>(bytes[5]) << 8 |
                static_cast<std::uint32_t>(bytes[6]) << 16 | static_cast<std::uint32_t>(bytes[7]) << 24;
    for (std::size_t c = 0; c < kAlpsChannelCount; ++c) {
        const double v = std::bit_cast<double>(get_u64le(bytes, 8 + 8 * c));
        if (std::isnan(v)) continue;
        const auto field = kAlpsChannels[c];
        const auto range = physical_range(field);
        if (!std::isfinite(v) || (range && !range->contains(v))) throw RangeError(std::string(to_string(field)), v);
        f.channels[c] = v;
    }
    return f;
}

std::vector<std::uint8_t> serialize_alps(const AlpsFrame& frame) {
    std::vector<std::uint8_t> out(kAlpsHeader.begin(), kAlpsHeader.end());
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(frame.counter >> (8 * i)));
    for (const auto& ch : frame.channels) put_u64le(out, ch ? std::bit_cast<std::uint64_t>(*ch) : kAbsentChannel);
    return out;
}

// ---------------------------------------------------------------------------
// Weather
// ---------------------------------------------------------------------------

std::size_t WeatherResponse::present_count() const {
    std::size_t n = condition.has_value() + description.has_value();
    for (const auto* v : {&sunset, &sunrise, &current_time, &temp_min, &temp_max, &pressure, &temp_main, &humidity,
                          &cloudiness, &wind_direction, &wind_speed})
        n += v->has_value();
    return n;
}

void WeatherResponse::validate() const {
    auto check = [](const std::optional<double>& v, EnvNumeric f) {
        if (!v) return;
        const auto r = physical_range(f);
        if (!std::isfinite(*v) || (r && !r->contains(*v))) throw RangeError(std::string(to_string(f)), *v);
    };
    check(humidity, EnvNumeric::weather_humidity);
    check(cloudiness, EnvNumeric::cloudiness);
    check(wind_direction, EnvNumeric::wind_direction);
    check(wind_speed, EnvNumeric::wind_speed);
    for (const auto* v : {&sunset, &sunrise, &current_time, &temp_min, &temp_max, &pressure, &temp_main})
        if (*v && !std::isfinite(**v)) throw RangeError("weather", **v);
    if (sunrise && sunset && !(*sunrise < *sunset && *sunset - *sunrise < 86400.0)) throw RangeError("sunset", *sunset);
}

namespace {

std::optional<double> opt_number(const json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) return std::nullopt;
    if (!it->is_number()) throw ParseError(std::string("weather field '") + key + "' is not a number");
    return it->get<double>();
}

std::optional<std::string> opt_string(const json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw ParseError(std::string("weather field '") + key + "' is not a string");
    return it->get<std::string>();
}

json parse_json(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
}

}  // namespace

WeatherResponse decode_weather_fixture(std::string_view text) {
    const json doc = parse_json(text);
    if (!doc.is_object()) throw ParseError("weather fixture must be a JSON object");
    WeatherResponse w;
    w.condition = opt_string(doc, "weather");
    w.sunset = opt_number(doc, "sunset");
    w.sunrise = opt_number(doc, "sunrise");
    w.current_time = opt_number(doc, "current_time");
    w.temp_min = opt_number(doc, "temp_min");
    w.temp_max = opt_number(doc, "temp_max");
    w.pressure = opt_number(doc, "pressure");
    w.temp_main = opt_number(doc, "temp_main");
    w.humidity = opt_number(doc, "humidity");
    w.description = opt_string(doc, "description");
    w.cloudiness = opt_number(doc, "cloudiness");
    w.wind_direction = opt_number(doc, "wind_direction");
    w.wind_speed = opt_number(doc, "wind_speed");
    w.validate();
    return w;
}

std::string encode_weather_fixture(const WeatherResponse& w) {
    json doc = json::object();
    auto put = [&](const char* key, const auto& v) {
        if (v) doc[key] = *v;
    };
    put("weather", w.condition);
    put("sunset", w.sunset);
    put("sunrise", w.sunrise);
    put("current_time", w.current_time);
    put("temp_min", w.temp_min);
    put("temp_max", w.temp_max);
    put("pressure", w.pressure);
    put("temp_main", w.temp_main);
    put("humidity", w.humidity);
    put("description", w.description);
    put("cloudiness", w.cloudiness);
    put("wind_direction", w.wind_direction);
    put("wind_speed", w.wind_speed);
    return doc.dump(2) + "\n";
}

WeatherResponse decode_openweathermap(std::string_view text) {
    const json doc = parse_json(text);
    if (!doc.is_object()) throw ParseError("weather response must be a JSON object");
    static const json kEmpty = json::object();
    auto section = [&](const char* key) -> const json& {
        auto it = doc.find(key);
        return it != doc.end() && it->is_object() ? *it : kEmpty;
    };
    WeatherResponse w;
    if (auto it = doc.find("weather"); it != doc.end() && it->is_array() && !it->empty()) {
        w.condition = opt_string((*it)[0], "main");
        w.description = opt_string((*it)[0], "description");
    }
    w.sunrise = opt_number(section("sys"), "sunrise");
    w.sunset = opt_number(section("sys"), "sunset");
    w.current_time = opt_number(doc, "dt");
    const json& main = section("main");
    w.temp_min = opt_number(main, "temp_min");
    w.temp_max = opt_number(main, "temp_max");
    w.pressure = opt_number(main, "pressure");
    w.temp_main = opt_number(main, "temp");
    w.humidity = opt_number(main, "humidity");
    w.cloudiness = opt_number(section("clouds"), "all");
    w.wind_direction = opt_number(section("wind"), "deg");
    w.wind_speed = opt_number(section("wind"), "speed");
    if (w.wind_direction && *w.wind_direction == 360.0) w.wind_direction = 0.0;
    w.validate();
    return w;
}

WeatherSource WeatherSource::live_from_environment() {
    WeatherSource s;
    s.mode = WeatherSourceMode::live;
    if (const char* url = std::getenv("BCBENCH_WEATHER_URL")) s.endpoint_url = url;
    if (const char* key = std::getenv("BCBENCH_WEATHER_KEY")) s.api_key = key;
    return s;
}

WeatherSource WeatherSource::fixtures(std::string dir) {
    WeatherSource s;
    s.mode = WeatherSourceMode::fixture;
    s.fixture_dir = std::move(dir);
    return s;
}

std::string weather_fixture_name(double lat, double lon, const TimeStamp& when) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "weather_%.4f_%.4f_%04d%02d%02d%02d.json", lat, lon, when.year, when.month,
                  when.day, when.hour);
    return buf;
}

namespace {

#ifdef BCBENCH_LIVE_WEATHER
WeatherResponse fetch_live(double lat, double lon, const TimeStamp& when, const WeatherSource& source) {
    const std::string& url = source.endpoint_url;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw SourceUnavailable("weather endpoint URL lacks a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    const std::string base = url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
    httplib::Client client(base);
    client.set_connection_timeout(source.timeout_seconds, 0);
    client.set_read_timeout(source.timeout_seconds, 0);
    char query[256];
    std::snprintf(query, sizeof query, "?lat=%.7f&lon=%.7f&dt=%lld&units=metric&appid=", lat, lon,
                  static_cast<long long>(when.epoch_seconds()));
    auto res = client.Get(path + query + source.api_key);
    if (!res) throw SourceUnavailable("weather request failed: " + httplib::to_string(res.error()));
    if (res->status != 200) throw SourceUnavailable("weather service returned HTTP " + std::to_string(res->status));
    try {
        return decode_openweathermap(res->body);
    } catch (const Error& e) {
        throw SourceUnavailable(std::string("weather response rejected: ") + e.what());
    }
}
#endif

}  // namespace

WeatherResponse fetch_weather(double lat, double lon, const TimeStamp& when, const WeatherSource& source) {
    if (source.mode == WeatherSourceMode::live) {
        if (source.endpoint_url.empty()) throw SourceUnavailable("live weather mode needs BCBENCH_WEATHER_URL");
#ifdef BCBENCH_LIVE_WEATHER
        return fetch_live(lat, lon, when, source);
#else
        throw SourceUnavailable("live weather support was not compiled in");
#endif
    }
    if (source.fixture_dir.empty()) throw SourceUnavailable("fixture mode needs a fixture directory");
    const auto path = std::filesystem::path(source.fixture_dir) / weather_fixture_name(lat, lon, when);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SourceUnavailable("no weather fixture " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_weather_fixture(text);
    } catch (const Error& e) {
        throw SourceUnavailable("weather fixture " + path.string() + " rejected: " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

std::optional<BehaviorRecord> assemble_record(const BehaviorEvent& event, const EventSources& sources) {
    BehaviorRecord r;
    r.record_id = event.record_id;
    r.child_id = event.child_id;
    r.session_id = event.session_id;
    r.characteristics = event.characteristics;
    r.major = event.major;
    r.minor = event.minor;
    r.labels = event.labels;
    r.env.stamp = event.timestamp;

    auto& env = r.env;
    if (const BeaconSighting* b = strongest_sighting(sources.beacons)) {
        env[EnvNumeric::beacon_rssi] = static_cast<double>(b->frame.observed_rssi);
        env.beacon_mac = b->mac;
        if (!b->name.empty()) env[EnvCategorical::beacon_name] = b->name;
    }
    if (sources.alps) {
        for (std::size_t c = 0; c < kAlpsChannelCount; ++c) env[kAlpsChannels[c]] = sources.alps->channels[c];
    }
    if (sources.gps) {
        env[EnvNumeric::latitude] = sources.gps->latitude;
        env[EnvNumeric::longitude] = sources.gps->longitude;
    }
    if (const auto& w = sources.weather) {
        env[EnvCategorical::weather_condition] = w->condition;
        env[EnvNumeric::sunset] = w->sunset;
        env[EnvNumeric::sunrise] = w->sunrise;
        env[EnvNumeric::current_time] = w->current_time;
        env[EnvNumeric::temp_min] = w->temp_min;
        env[EnvNumeric::temp_max] = w->temp_max;
        env[EnvNumeric::weather_pressure] = w->pressure;
        env[EnvNumeric::temp_main] = w->temp_main;
        env[EnvNumeric::weather_humidity] = w->humidity;
        env[EnvCategorical::weather_description] = w->description;
        env[EnvNumeric::cloudiness] = w->cloudiness;
        env[EnvNumeric::wind_direction] = w->wind_direction;
        env[EnvNumeric::wind_speed] = w->wind_speed;
    }
    if (!env.has_any_source()) return std::nullopt;
    return r;
}

void IngestBatch::add(const BehaviorEvent& event, const EventSources& sources) {
    ++counters_.records_in;
    if (auto rec = assemble_record(event, sources)) {
        ++counters_.retained;
        records_.push_back(std::move(*rec));
    } else {
        ++counters_.discarded;
    }
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0xF]);
    }
    return out;
}

std::vector<std::uint8_t> from_hex(std::string_view hex) {
    if (hex.size() % 2) throw ParseError("hex string has odd length");
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw ParseError(std::string("bad hex digit '") + c + "'");
    };
    std::vector<std::uint8_t> out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
    return out;
}

namespace {

template <typename F>
void for_each_json_line(const std::filesystem::path& path, F&& f) {
    std::ifstream in(path);
    if (!in) return;  // an absent source file means the source produced nothing
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        f(doc);
    }
}

}  // namespace

IngestResult ingest_directory(const std::string& dir, const WeatherSource& weather) {
    namespace fs = std::filesystem;
    const fs::path root(dir);
    const auto events_text = read_text_file((root / "events.csv").string());
    const auto event_records = records_from_csv(events_text);

    std::map<std::string, EventSources> sources;
    IngestBatch batch;
    for_each_json_line(root / "beacons.jsonl", [&](const json& d) {
        try {
            BeaconSighting s;
            s.frame = parse_ibeacon(from_hex(d.at("frame").get<std::string>()), d.at("rssi").get<int>());
            s.mac = parse_mac(d.at("mac").get<std::string>());
            s.name = d.value("name", std::string());
            sources[d.at("record_id").get<std::string>()].beacons.push_back(std::move(s));
        } catch (const MalformedFrame&) {
            batch.count_malformed();
        }
    });
    for_each_json_line(root / "alps.jsonl", [&](const json& d) {
        try {
            sources[d.at("record_id").get<std::string>()].alps = parse_alps(from_hex(d.at("frame").get<std::string>()));
        } catch (const MalformedFrame&) {
            batch.count_malformed();
        } catch (const RangeError&) {
            batch.count_malformed();
        }
    });
    for_each_json_line(root / "gps.jsonl", [&](const json& d) {
        sources[d.at("record_id").get<std::string>()].gps =
            GpsFix{d.at("latitude").get<double>(), d.at("longitude").get<double>()};
    });

    for (const auto& rec : event_records) {
        BehaviorEvent ev{rec.record_id, rec.child_id,      rec.session_id, rec.characteristics,
                         rec.major,     rec.minor,         rec.env.stamp,  rec.labels};
        EventSources& src = sources[rec.record_id];
        if (src.gps) {
            try {
                src.weather = fetch_weather(src.gps->latitude, src.gps->longitude, ev.timestamp, weather);
            } catch (const SourceUnavailable&) {
                batch.count_weather_unavailable();
            }
        }
        batch.add(ev, src);
    }
    IngestResult out;
    out.counters = batch.counters();
    out.records = batch.take_records();
    return out;
}

// ---------------------------------------------------------------------------
// Record store
// ---------------------------------------------------------------------------

std::string record_to_json(const BehaviorRecord& r) {
    json env = json::object();
    for (const auto& c : env_columns()) {
        if (c.categorical) {
            const auto& v = r.env.categorical[c.slot];
            env[std::string(c.name)] = v ? json(*v) : json(nullptr);
        } else {
            const auto& v = r.env.numeric[c.slot];
            env[std::string(c.name)] = v ? json(*v) : json(nullptr);
        }
    }
    env["beacon_mac"] = r.env.beacon_mac ? json(format_mac(*r.env.beacon_mac)) : json(nullptr);
    const auto& s = r.env.stamp;
    json doc = {
        {"record_id", r.record_id},
        {"child_id", r.child_id},
        {"session_id", r.session_id},
        {"gender", std::string(to_string(r.characteristics.gender))},
        {"condition", std::string(to_string(r.characteristics.condition))},
        {"major", std::vector<int>(r.major.begin(), r.major.end())},
        {"minor", std::vector<int>(r.minor.begin(), r.minor.end())},
        {"env", env},
        {"stamp", {s.year, s.month, s.day, s.hour, s.minute, s.second}},
        {"class7", std::string(kClass7Names[static_cast<std::size_t>(r.labels.class7)])},
        {"class3", std::string(kClass3Names[static_cast<std::size_t>(r.labels.class3)])},
        {"class2", std::string(kClass2Names[static_cast<std::size_t>(r.labels.class2)])},
    };
    return doc.dump();
}

BehaviorRecord record_from_json(std::string_view line) {
    const json d = parse_json(line);
    try {
        BehaviorRecord r;
        r.record_id = d.at("record_id").get<std::string>();
        r.child_id = d.at("child_id").get<int>();
        r.session_id = d.at("session_id").get<std::string>();
        r.characteristics.gender = parse_gender(d.at("gender").get<std::string>());
        r.characteristics.condition = parse_condition(d.at("condition").get<std::string>());
        const auto major = d.at("major").get<std::vector<int>>();
        const auto minor = d.at("minor").get<std::vector<int>>();
        if (major.size() != kMajorCount || minor.size() != kMinorCount) throw SchemaError("flag vector length");
        for (std::size_t i = 0; i < kMajorCount; ++i) r.major[i] = static_cast<std::uint8_t>(major[i]);
        for (std::size_t i = 0; i < kMinorCount; ++i) r.minor[i] = static_cast<std::uint8_t>(minor[i]);
        const json& env = d.at("env");
        for (const auto& c : env_columns()) {
            const json& v = env.at(std::string(c.name));
            if (v.is_null()) continue;
            if (c.categorical) r.env.categorical[c.slot] = v.get<std::string>();
            else r.env.numeric[c.slot] = v.get<double>();
        }
        if (const json& mac = env.at("beacon_mac"); !mac.is_null()) r.env.beacon_mac = parse_mac(mac.get<std::string>());
        const auto st = d.at("stamp").get<std::vector<int>>();
        if (st.size() != 6) throw SchemaError("stamp must have 6 fields");
        r.env.stamp = TimeStamp{st[0], st[1], st[2], st[3], st[4], st[5]};
        r.labels.class7 = parse_class7(d.at("class7").get<std::string>());
        r.labels.class3 = parse_class3(d.at("class3").get<std::string>());
        r.labels.class2 = parse_class2(d.at("class2").get<std::string>());
        return r;
    } catch (const json::exception& e) {
        throw ParseError(std::string("record JSON: ") + e.what());
    }
}

void RecordStore::append(const BehaviorRecord& record) const {
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    if (!out) throw IoError("cannot open record store '" + path_ + "'");
    out << record_to_json(record) << '\n';
    if (!out) throw IoError("append failed for '" + path_ + "'");
}

std::vector<BehaviorRecord> RecordStore::load() const {
    std::ifstream in(path_, std::ios::binary);
    if (!in) throw IoError("cannot open record store '" + path_ + "'");
    std::vector<BehaviorRecord> out;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(record_from_json(line));
    return out;
}

}  // namespace bcbench
