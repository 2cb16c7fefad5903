#include "bcbench/dataset_io.hpp"
#include "bcbench/error.hpp"
#include "bcbench/ingest.hpp"
#include "bcbench/random.hpp"
#include "bcbench/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace bcbench;

namespace {

std::array<std::uint8_t, 16> uuid_from(Rng& rng) {
    std::array<std::uint8_t, 16> u{};
    for (auto& b : u) b = static_cast<std::uint8_t>(rng.index(256));
    return u;
}

std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("bcbench_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("iBeacon frames have the documented byte layout") {
    std::array<std::uint8_t, 16> uuid{};
    for (std::size_t i = 0; i < 16; ++i) uuid[i] = static_cast<std::uint8_t>(i);
    const auto f = make_ibeacon(uuid, 0x1234, 0xABCD, -59, -71);
    const auto bytes = serialize_ibeacon(f);
    REQUIRE(bytes.size() == 30);
    CHECK(std::equal(kIBeaconHeader.begin(), kIBeaconHeader.end(), bytes.begin()));
    CHECK(bytes[9] == 0);
    CHECK(bytes[24] == 15);
    CHECK(bytes[25] == 0x12);
    CHECK(bytes[26] == 0x34);
    CHECK(bytes[27] == 0xAB);
    CHECK(bytes[28] == 0xCD);
    CHECK(static_cast<std::int8_t>(bytes[29]) == -59);
    const auto back = parse_ibeacon(bytes, -71);
    CHECK(back == f);
}

TEST_CASE("iBeacon parser rejects short frames and bad headers with offsets") {
    Rng rng(1);
    const auto bytes = serialize_ibeacon(make_ibeacon(uuid_from(rng), 1, 2, -60, -80));
    CHECK_THROWS_AS(parse_ibeacon(std::span(bytes).first(29)), MalformedFrame);
    for (std::size_t i = 0; i < kIBeaconHeaderSize; ++i) {
        auto bad = bytes;
        bad[i] ^= 0x01;
        try {
            parse_ibeacon(bad);
            FAIL("corrupted header byte accepted");
        } catch (const MalformedFrame& e) {
            CHECK(e.offset() == i);
        }
    }
}

TEST_CASE("strongest RSSI wins, earlier sighting on ties") {
    Rng rng(2);
    std::vector<BeaconSighting> s(3);
    s[0].frame = make_ibeacon(uuid_from(rng), 1, 1, -59, -80);
    s[1].frame = make_ibeacon(uuid_from(rng), 1, 2, -59, -65);
    s[2].frame = make_ibeacon(uuid_from(rng), 1, 3, -59, -65);
    CHECK(strongest_sighting(s) == &s[1]);
    CHECK(strongest_sighting(std::span<const BeaconSighting>{}) == nullptr);
}

TEST_CASE("ALPS frames round-trip including unreported channels") {
    AlpsFrame f;
    f.counter = 77;
    f.channels[0] = 3.5;
    f.channels[8] = 1008.25;
    f.channels[9] = 21.5;
    const auto bytes = serialize_alps(f);
    REQUIRE(bytes.size() == kAlpsFrameSize);
    CHECK(bytes[0] == 'A');
    CHECK(bytes[4] == 77);
    CHECK(parse_alps(bytes) == f);
    auto bad = bytes;
    bad[3] = 0x0C;
    CHECK_THROWS_AS(parse_alps(bad), MalformedFrame);
    AlpsFrame hot = f;
    hot.channels[10] = 140.0;  // humidity beyond the sensor range
    CHECK_THROWS_AS(parse_alps(serialize_alps(hot)), RangeError);
}

TEST_CASE("weather fixtures keep absent fields absent") {
    WeatherResponse w;
    w.condition = "Clouds";
    w.temp_main = 18.5;
    w.humidity = 61;
    w.wind_speed = 2.5;
    const auto text = encode_weather_fixture(w);
    const auto back = decode_weather_fixture(text);
    CHECK(back == w);
    CHECK_FALSE(back.wind_direction.has_value());
    CHECK(back.present_count() == 4);
    CHECK_THROWS(decode_weather_fixture("[1,2]"));
}

TEST_CASE("OpenWeatherMap responses map onto the weather fields") {
    const auto w = decode_openweathermap(R"({"weather":[{"main":"Rain","description":"light rain"}],
        "main":{"temp":12.5,"temp_min":11,"temp_max":14,"pressure":1002,"humidity":88},
        "wind":{"speed":4.1},"clouds":{"all":90},"sys":{"sunrise":1600000000,"sunset":1600040000},"dt":1600020000})");
    CHECK(w.condition == "Rain");
    CHECK(w.description == "light rain");
    CHECK(w.temp_main == 12.5);
    CHECK(w.cloudiness == 90);
    CHECK_FALSE(w.wind_direction.has_value());
}

TEST_CASE("fixture mode reports a missing document as unavailable") {
    const auto dir = scratch_dir("weather_missing");
    CHECK_THROWS_AS(fetch_weather(34.7, 135.5, TimeStamp{2020, 5, 1, 10, 0, 0},
                                  WeatherSource::fixtures(dir.string())),
                    SourceUnavailable);
}

TEST_CASE("events without any environment source are discarded") {
    BehaviorEvent e;
    e.record_id = "R1";
    e.session_id = "C01-S0";
    IngestBatch batch;
    batch.add(e, {});
    CHECK(batch.counters().discarded == 1);
    CHECK(batch.records().empty());
    EventSources src;
    src.gps = GpsFix{34.69, 135.50};
    batch.add(e, src);
    CHECK(batch.counters().retained == 1);
    CHECK(batch.records().front().env[EnvNumeric::latitude] == 34.69);
}

TEST_CASE("rendered sources ingest back to the generating records") {
    SynthConfig cfg;
    cfg.n_records = 120;
    cfg.seed = 4;
    const auto records = generate(cfg);
    const auto dir = scratch_dir("roundtrip");
    render_sources(records, dir.string());
    const auto result = ingest_directory(dir.string(), WeatherSource::fixtures((dir / "weather").string()));
    CHECK(result.counters.records_in == records.size());
    CHECK(result.counters.retained == records.size());
    CHECK(result.counters.malformed_frames == 0);
    CHECK(result.records == records);
}

TEST_CASE("record store appends and reloads") {
    const auto dir = scratch_dir("store");
    SynthConfig cfg;
    cfg.n_records = 10;
    const auto records = generate(cfg);
    RecordStore store((dir / "records.jsonl").string());
    for (const auto& r : records) store.append(r);
    CHECK(store.load() == records);
    CHECK(record_from_json(record_to_json(records[3])) == records[3]);
}

TEST_CASE("hex helpers") {
    const std::vector<std::uint8_t> b{0x00, 0x4c, 0xff};
    CHECK(to_hex(b) == "004cff");
    CHECK(from_hex("004CFF") == b);
    CHECK_THROWS(from_hex("0g"));
}

#ifdef BCBENCH_LIVE_WEATHER
#include <httplib.h>

#include <thread>

TEST_CASE("live mode queries the weather endpoint and decodes the response") {
    httplib::Server server;
    std::string seen_query;
    server.Get("/data/2.5/weather", [&](const httplib::Request& req, httplib::Response& res) {
        seen_query = req.get_param_value("appid");
        res.set_content(R"({"weather":[{"main":"Clear","description":"clear sky"}],"main":{"temp":20,"humidity":40},
                            "wind":{"speed":1.5,"deg":180}})",
                        "application/json");
    });
    server.Get("/broken", [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    WeatherSource src;
    src.mode = WeatherSourceMode::live;
    src.api_key = "k123";
    src.endpoint_url = "http://127.0.0.1:" + std::to_string(port) + "/data/2.5/weather";
    const auto w = fetch_weather(34.69, 135.50, TimeStamp{2020, 6, 1, 9, 0, 0}, src);
    CHECK(w.condition == "Clear");
    CHECK(w.wind_direction == 180);
    CHECK(seen_query == "k123");

    src.endpoint_url = "http://127.0.0.1:" + std::to_string(port) + "/broken";
    CHECK_THROWS_AS(fetch_weather(34.69, 135.50, TimeStamp{2020, 6, 1, 9, 0, 0}, src), SourceUnavailable);
    server.stop();
    t.join();
}
#endif
