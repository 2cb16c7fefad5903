#include "bcbench/synth.hpp"

#include "bcbench/dataset_io.hpp"
#include "bcbench/error.hpp"
#include "bcbench/ingest.hpp"
#include "bcbench/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

namespace bcbench {

void SynthConfig::validate() const {
    if (n_records < 1) throw ConfigError("n_records must be >= 1");
    if (n_children < 1 || n_children > 20) throw ConfigError("n_children must lie in 1..20");
    if (sessions_per_child < 1) throw ConfigError("sessions_per_child must be >= 1");
    double sum = 0.0;
    for (double p : class7_distribution) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("class7 probabilities must lie in [0, 1]");
        sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-9) throw ConfigError("class7 distribution must sum to 1");
    if (!(env_signal >= 0.0 && env_signal <= 1.0)) throw ConfigError("env_signal must lie in [0, 1]");
    if (!(behavior_signal >= 0.0 && behavior_signal <= 1.0)) throw ConfigError("behavior_signal must lie in [0, 1]");
    const auto& m = missingness;
    for (double r : {m.beacon, m.uv_range, m.ambient_light, m.geomag_range, m.geomag_resolution, m.weather,
                     m.wind_direction, m.gps})
        if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("missingness rates must lie in [0, 1]");
    if (m.wind_direction + 1e-12 < m.weather) throw ConfigError("wind_direction rate must cover the weather rate");
}

const std::vector<EnvNumeric>& informative_env_channels() {
    static const std::vector<EnvNumeric> kChannels{
        EnvNumeric::beacon_rssi, EnvNumeric::uv_range,  EnvNumeric::ambient_light,
        EnvNumeric::pressure,    EnvNumeric::temperature, EnvNumeric::humidity,
        EnvNumeric::temp_main,   EnvNumeric::cloudiness,  EnvNumeric::wind_speed};
    return kChannels;
}

namespace {

constexpr std::array<const char*, 4> kBeaconNames{"corridor", "desk", "entrance", "window"};
constexpr std::array<std::uint8_t, 16> kBeaconUuid{0xE2, 0xC5, 0x6D, 0xB5, 0xDF, 0xFB, 0x48, 0xD2,
                                                   0xB0, 0x60, 0xD0, 0xF5, 0xA7, 0x10, 0x96, 0xE0};

struct Channel {
    double mean;
    double sd;
};

Channel base_of(EnvNumeric f) {
    switch (f) {
        case EnvNumeric::beacon_rssi: return {-70.0, 8.0};
        case EnvNumeric::uv_range: return {3.0, 1.5};
        case EnvNumeric::ambient_light: return {450.0, 200.0};
        case EnvNumeric::geomag_g1:
        case EnvNumeric::geomag_g2:
        case EnvNumeric::geomag_g3: return {0.0, 0.5};
        case EnvNumeric::geomag_ut1:
        case EnvNumeric::geomag_ut2:
        case EnvNumeric::geomag_ut3: return {30.0, 10.0};
        case EnvNumeric::pressure: return {1008.0, 6.0};
        case EnvNumeric::temperature: return {24.0, 3.0};
        case EnvNumeric::humidity: return {50.0, 10.0};
        case EnvNumeric::weather_pressure: return {1012.0, 5.0};
        case EnvNumeric::temp_main: return {20.0, 5.0};
        case EnvNumeric::weather_humidity: return {60.0, 15.0};
        case EnvNumeric::cloudiness: return {50.0, 20.0};
        case EnvNumeric::wind_speed: return {3.0, 1.2};
        default: return {0.0, 1.0};
    }
}

// Fixed class pattern in roughly [-1.25, 1.25] standard deviations.
double class_shift(std::size_t class7, std::size_t channel) {
    return 1.25 * std::sin(2.1 * static_cast<double>(class7) + 1.3 * static_cast<double>(channel) + 0.4);
}

std::array<std::size_t, 3> signature_minors(std::size_t class7) {
    return {class7, class7 + 7, (3 * class7 + 2) % kMinorCount};
}

double clamp_to_range(EnvNumeric f, double v) {
    const auto r = physical_range(f);
    if (!r) return v;
    const double hi = r->hi_exclusive ? std::nextafter(r->hi, r->lo) : r->hi;
    return std::clamp(v, r->lo, hi);
}

// Exact quotas by largest remainder; ties go to the lower class index.
std::vector<std::size_t> class_quotas(const std::array<double, 7>& p, std::size_t n) {
    std::vector<std::size_t> q(7);
    std::vector<std::pair<double, std::size_t>> rem;
    std::size_t used = 0;
    for (std::size_t c = 0; c < 7; ++c) {
        const double exact = p[c] * static_cast<double>(n);
        q[c] = static_cast<std::size_t>(std::floor(exact));
        used += q[c];
        rem.push_back({exact - static_cast<double>(q[c]), c});
    }
    std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; used < n; ++i, ++used) ++q[rem[i % rem.size()].second];
    return q;
}

std::vector<std::size_t> pick_rows(Rng& rng, std::size_t n, double rate) {
    const auto k = std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(rate * static_cast<double>(n))));
    auto perm = rng.permutation(n);
    perm.resize(k);
    std::sort(perm.begin(), perm.end());
    return perm;
}

std::int64_t day_start(const TimeStamp& t) {
    TimeStamp d = t;
    d.hour = d.minute = d.second = 0;
    return d.epoch_seconds();
}

}  // namespace

std::vector<BehaviorRecord> generate(const SynthConfig& cfg) {
    cfg.validate();
    const std::size_t n = cfg.n_records;

    // Labels.
    Rng label_rng(derive_seed(cfg.seed, {1}));
    std::vector<std::size_t> class7;
    const auto quotas = class_quotas(cfg.class7_distribution, n);
    for (std::size_t c = 0; c < 7; ++c) class7.insert(class7.end(), quotas[c], c);
    label_rng.shuffle(class7);

    // Children and sessions.
    Rng child_rng(derive_seed(cfg.seed, {2}));
    std::vector<ChildCharacteristics> children(cfg.n_children);
    for (auto& ch : children) {
        ch.gender = child_rng.bernoulli(0.5) ? Gender::female : Gender::male;
        ch.condition = child_rng.bernoulli(0.5) ? Condition::severe_profound_id : Condition::pimd_smid;
    }
    const std::size_t n_sessions = cfg.n_children * cfg.sessions_per_child;
    std::vector<TimeStamp> session_start(n_sessions);
    for (auto& s : session_start) {
        s.year = 2019 + static_cast<int>(child_rng.index(2));
        s.month = 1 + static_cast<int>(child_rng.index(12));
        s.day = 1 + static_cast<int>(child_rng.index(28));
        s.hour = 9 + static_cast<int>(child_rng.index(6));
        s.minute = static_cast<int>(child_rng.index(60));
        s.second = static_cast<int>(child_rng.index(60));
    }
    std::vector<std::int64_t> session_clock(n_sessions);
    for (std::size_t s = 0; s < n_sessions; ++s) session_clock[s] = session_start[s].epoch_seconds();

    Rng value_rng(derive_seed(cfg.seed, {3}));
    const auto& informative = informative_env_channels();
    std::vector<BehaviorRecord> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& r = out[i];
        const std::size_t child = i % cfg.n_children;
        const std::size_t session = (i / cfg.n_children) % cfg.sessions_per_child;
        const std::size_t sid = child * cfg.sessions_per_child + session;
        char buf[64];
        std::snprintf(buf, sizeof buf, "R%04zu", i + 1);
        r.record_id = buf;
        r.child_id = static_cast<int>(child + 1);
        std::snprintf(buf, sizeof buf, "C%02zu-S%zu", child + 1, session + 1);
        r.session_id = buf;
        r.characteristics = children[child];
        const auto c7 = class7[i];
        r.labels = cfg.mapping.labels_for(static_cast<Class7>(c7));

        const auto sig = signature_minors(c7);
        for (std::size_t m = 0; m < kMinorCount; ++m) {
            const bool signature = std::find(sig.begin(), sig.end(), m) != sig.end();
            const double p = 0.2 + (signature ? 0.6 * cfg.behavior_signal : 0.0);
            r.minor[m] = value_rng.bernoulli(p) ? 1 : 0;
        }
        r.major = majors_from_minors(r.minor);

        session_clock[sid] += 120 + static_cast<std::int64_t>(value_rng.index(900));
        auto& env = r.env;
        env.stamp = TimeStamp::from_epoch_seconds(session_clock[sid]);

        // Jitter keeps every record's weather fixture key distinct.
        env[EnvNumeric::latitude] = 34.6937 + 1e-4 * static_cast<double>(i);
        env[EnvNumeric::longitude] = 135.5023 + 1e-4 * static_cast<double>(i % 17);

        auto draw = [&](EnvNumeric f) {
            const Channel ch = base_of(f);
            double z = value_rng.normal();
            const auto it = std::find(informative.begin(), informative.end(), f);
            if (it != informative.end())
                z += cfg.env_signal * class_shift(c7, static_cast<std::size_t>(it - informative.begin()));
            return clamp_to_range(f, ch.mean + ch.sd * z);
        };
        for (auto f : {EnvNumeric::uv_range, EnvNumeric::ambient_light, EnvNumeric::geomag_g1, EnvNumeric::geomag_g2,
                       EnvNumeric::geomag_g3, EnvNumeric::geomag_ut1, EnvNumeric::geomag_ut2, EnvNumeric::geomag_ut3,
                       EnvNumeric::pressure, EnvNumeric::temperature, EnvNumeric::humidity,
                       EnvNumeric::weather_pressure, EnvNumeric::temp_main, EnvNumeric::weather_humidity,
                       EnvNumeric::cloudiness, EnvNumeric::wind_speed})
            env[f] = draw(f);
        env[EnvNumeric::beacon_rssi] = std::clamp(std::round(draw(EnvNumeric::beacon_rssi)), -100.0, -30.0);
        const std::size_t beacon = value_rng.index(kBeaconNames.size());
        env[EnvCategorical::beacon_name] = std::string(kBeaconNames[beacon]);
        env.beacon_mac = MacAddress{0xAC, 0x23, 0x3F, 0x00, 0x10, static_cast<std::uint8_t>(beacon + 1)};

        const double temp = *env[EnvNumeric::temp_main];
        env[EnvNumeric::temp_min] = temp - std::fabs(value_rng.normal(1.5, 0.5));
        env[EnvNumeric::temp_max] = temp + std::fabs(value_rng.normal(1.5, 0.5));
        env[EnvNumeric::wind_direction] = clamp_to_range(EnvNumeric::wind_direction, value_rng.uniform(0.0, 360.0));
        const auto midnight = static_cast<double>(day_start(env.stamp));
        env[EnvNumeric::sunrise] = midnight + 5.5 * 3600.0 + value_rng.uniform(0.0, 3600.0);
        env[EnvNumeric::sunset] = midnight + 17.5 * 3600.0 + value_rng.uniform(0.0, 3600.0);
        env[EnvNumeric::current_time] = static_cast<double>(env.stamp.epoch_seconds());
        const double cloud = *env[EnvNumeric::cloudiness];
        const double hum = *env[EnvNumeric::weather_humidity];
        if (hum > 80.0 && cloud > 60.0) {
            env[EnvCategorical::weather_condition] = std::string("Rain");
            env[EnvCategorical::weather_description] = std::string(hum > 90.0 ? "moderate rain" : "light rain");
        } else if (cloud > 25.0) {
            env[EnvCategorical::weather_condition] = std::string("Clouds");
            env[EnvCategorical::weather_description] =
                std::string(cloud > 85.0 ? "overcast clouds" : cloud > 50.0 ? "broken clouds" : "scattered clouds");
        } else {
            env[EnvCategorical::weather_condition] = std::string("Clear");
            env[EnvCategorical::weather_description] = std::string(cloud > 10.0 ? "few clouds" : "clear sky");
        }
    }

    // Missingness, one independent draw per group.
    const auto& m = cfg.missingness;
    Rng miss_rng(derive_seed(cfg.seed, {4}));
    auto clear = [&](const std::vector<std::size_t>& rows, std::initializer_list<EnvNumeric> fields) {
        for (auto r : rows)
            for (auto f : fields) out[r].env[f].reset();
    };
    for (auto r : pick_rows(miss_rng, n, m.beacon)) {
        out[r].env[EnvNumeric::beacon_rssi].reset();
        out[r].env[EnvCategorical::beacon_name].reset();
        out[r].env.beacon_mac.reset();
    }
    clear(pick_rows(miss_rng, n, m.uv_range), {EnvNumeric::uv_range});
    clear(pick_rows(miss_rng, n, m.ambient_light), {EnvNumeric::ambient_light});
    clear(pick_rows(miss_rng, n, m.geomag_range), {EnvNumeric::geomag_g1, EnvNumeric::geomag_g2, EnvNumeric::geomag_g3});
    clear(pick_rows(miss_rng, n, m.geomag_resolution),
          {EnvNumeric::geomag_ut1, EnvNumeric::geomag_ut2, EnvNumeric::geomag_ut3});

    auto drop_weather = [&](std::size_t r) {
        auto& env = out[r].env;
        for (const auto& col : env_columns())
            if (col.source == EnvSource::weather) {
                if (col.categorical) env.categorical[col.slot].reset();
                else env.numeric[col.slot].reset();
            }
    };
    const auto no_gps = pick_rows(miss_rng, n, m.gps);
    std::vector<char> weather_gone(n, 0);
    for (auto r : no_gps) {
        out[r].env[EnvNumeric::latitude].reset();
        out[r].env[EnvNumeric::longitude].reset();
        drop_weather(r);
        weather_gone[r] = 1;
    }
    // Whole-weather gaps beyond those forced by missing GPS.
    const auto weather_target = static_cast<std::size_t>(std::llround(m.weather * static_cast<double>(n)));
    std::vector<std::size_t> candidates;
    for (std::size_t r = 0; r < n; ++r)
        if (!weather_gone[r]) candidates.push_back(r);
    miss_rng.shuffle(candidates);
    const std::size_t already = no_gps.size();
    for (std::size_t i = 0; already + i < weather_target && i < candidates.size(); ++i) {
        drop_weather(candidates[i]);
        weather_gone[candidates[i]] = 1;
    }
    const auto wind_target = static_cast<std::size_t>(std::llround(m.wind_direction * static_cast<double>(n)));
    std::size_t wind_missing = static_cast<std::size_t>(std::count(weather_gone.begin(), weather_gone.end(), 1));
    candidates.clear();
    for (std::size_t r = 0; r < n; ++r)
        if (!weather_gone[r]) candidates.push_back(r);
    miss_rng.shuffle(candidates);
    for (std::size_t i = 0; wind_missing < wind_target && i < candidates.size(); ++i, ++wind_missing)
        out[candidates[i]].env[EnvNumeric::wind_direction].reset();

    validate_records(out);
    return out;
}

void render_sources(const std::vector<BehaviorRecord>& records, const std::string& dir) {
    namespace fs = std::filesystem;
    using nlohmann::json;
    const fs::path root(dir);
    const fs::path weather_dir = root / "weather";
    std::error_code ec;
    fs::create_directories(weather_dir, ec);
    if (ec) throw IoError("cannot create " + weather_dir.string() + ": " + ec.message());

    std::vector<BehaviorRecord> events = records;
    for (auto& r : events) {
        const auto stamp = r.env.stamp;
        r.env = EnvironmentSnapshot{};
        r.env.stamp = stamp;
    }
    write_text_file((root / "events.csv").string(), records_to_csv(events));

    std::string beacons, alps, gps;
    for (const auto& r : records) {
        const auto& env = r.env;
        if (env[EnvNumeric::beacon_rssi]) {
            const int rssi = static_cast<int>(*env[EnvNumeric::beacon_rssi]);
            const auto name = env[EnvCategorical::beacon_name].value_or("");
            const MacAddress mac = env.beacon_mac.value_or(MacAddress{});
            const auto frame = make_ibeacon(kBeaconUuid, static_cast<std::uint16_t>(r.child_id), mac[5], -59, rssi);
            // A weaker decoy first, so the strongest-signal rule is exercised.
            const MacAddress decoy_mac{0xAC, 0x23, 0x3F, 0x00, 0x20, mac[5]};
            const auto decoy = make_ibeacon(kBeaconUuid, 0, 0, -59, std::max(-127, rssi - 12));
            beacons += json{{"record_id", r.record_id}, {"mac", format_mac(decoy_mac)}, {"name", "decoy"},
                            {"rssi", decoy.observed_rssi}, {"frame", to_hex(serialize_ibeacon(decoy))}}
                           .dump() +
                       "\n";
            beacons += json{{"record_id", r.record_id}, {"mac", format_mac(mac)}, {"name", name},
                            {"rssi", rssi}, {"frame", to_hex(serialize_ibeacon(frame))}}
                           .dump() +
                       "\n";
        }
        AlpsFrame a;
        bool any_alps = false;
        for (std::size_t c = 0; c < kAlpsChannelCount; ++c) {
            a.channels[c] = env[kAlpsChannels[c]];
            any_alps = any_alps || a.channels[c].has_value();
        }
        if (any_alps) {
            a.counter = static_cast<std::uint32_t>(std::hash<std::string>{}(r.record_id) & 0xFFFFFFFFu);
            alps += json{{"record_id", r.record_id}, {"frame", to_hex(serialize_alps(a))}}.dump() + "\n";
        }
        const auto& lat = env[EnvNumeric::latitude];
        const auto& lon = env[EnvNumeric::longitude];
        if (lat && lon) {
            gps += json{{"record_id", r.record_id}, {"latitude", *lat}, {"longitude", *lon}}.dump() + "\n";
            WeatherResponse w;
            w.condition = env[EnvCategorical::weather_condition];
            w.sunset = env[EnvNumeric::sunset];
            w.sunrise = env[EnvNumeric::sunrise];
            w.current_time = env[EnvNumeric::current_time];
            w.temp_min = env[EnvNumeric::temp_min];
            w.temp_max = env[EnvNumeric::temp_max];
            w.pressure = env[EnvNumeric::weather_pressure];
            w.temp_main = env[EnvNumeric::temp_main];
            w.humidity = env[EnvNumeric::weather_humidity];
            w.description = env[EnvCategorical::weather_description];
            w.cloudiness = env[EnvNumeric::cloudiness];
            w.wind_direction = env[EnvNumeric::wind_direction];
            w.wind_speed = env[EnvNumeric::wind_speed];
            // No document at all stands for an unavailable weather service.
            if (w.present_count() > 0)
                write_text_file((weather_dir / weather_fixture_name(*lat, *lon, env.stamp)).string(),
                                encode_weather_fixture(w));
        }
    }
    write_text_file((root / "beacons.jsonl").string(), beacons);
    write_text_file((root / "alps.jsonl").string(), alps);
    write_text_file((root / "gps.jsonl").string(), gps);
}

}  // namespace bcbench
