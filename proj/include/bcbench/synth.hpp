#pragma once

#include "bcbench/datamodel.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace bcbench {

// Fraction of records missing each source or field group. Counts are
// round(rate * n), placed on distinct random records.
struct MissingnessProfile {
    double beacon = 0.158;             // rssi, name and MAC together
    double uv_range = 0.336;
    double ambient_light = 0.181;      // UV-sensor resolution channel
    double geomag_range = 0.0514;      // g1..g3 together
    double geomag_resolution = 0.0479; // uT1..uT3 together
    double weather = 0.0479;           // the whole weather document
    double wind_direction = 0.119;     // includes the whole-weather gaps
    double gps = 0.0;                  // no GPS also means no weather
};

struct SynthConfig {
    std::size_t n_records = 292;
    std::size_t n_children = 20;
    std::size_t sessions_per_child = 5;
    std::array<double, 7> class7_distribution{1.0 / 7, 1.0 / 7, 1.0 / 7, 1.0 / 7, 1.0 / 7, 1.0 / 7, 1.0 / 7};
    double env_signal = 0.8;
    double behavior_signal = 0.5;
    MissingnessProfile missingness;
    LabelMapping mapping = LabelMapping::defaults();
    std::uint64_t seed = 1;

    // ConfigError on an infeasible configuration.
    void validate() const;
};

// Records with missing environment cells, deterministic in cfg.seed.
//
// Class-7 labels follow the distribution by largest-remainder quotas, then
// are shuffled. Informative environment channels are Gaussian around a
// base mean, shifted by env_signal * sd * (a fixed per-class pattern);
// minor flags fire with probability 0.2, raised by 0.6 * behavior_signal on
// three signature categories per class. Each record gets its own GPS jitter
// so weather fixtures never collide.
std::vector<BehaviorRecord> generate(const SynthConfig& cfg);

// Environment channels whose class-conditional mean depends on env_signal.
const std::vector<EnvNumeric>& informative_env_channels();

// Writes the ingest directory layout (events.csv, beacons.jsonl, alps.jsonl,
// gps.jsonl, weather/) describing `records`. Beacon-bearing records also get
// a weaker decoy sighting. ingest_directory on the result reproduces the
// records exactly.
void render_sources(const std::vector<BehaviorRecord>& records, const std::string& dir);

}  // namespace bcbench
