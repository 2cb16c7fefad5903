#pragma once

#include "bcbench/config.hpp"
#include "bcbench/matrix.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace bcbench {

inline constexpr std::string_view kToolVersion = "bcbench 0.1.0";

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_partial = 3, exit_io = 4 };

// Everything needed to rerun a reproduction and check its outputs. Contains no
// timestamps, so identical inputs give an identical manifest.
struct RunManifest {
    std::string tool_version = std::string(kToolVersion);
    std::string config_text;  // canonical FlatConfig text
    std::map<std::string, std::uint64_t> seeds;
    std::map<std::string, std::string> artifacts;  // relative path -> SHA-256 hex
    bool complete = false;

    std::string to_json() const;
    static RunManifest from_json(std::string_view text);  // ParseError
};

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::string& path);  // IoError

// Per-stage seeds derived from the master seed.
std::uint64_t synth_seed(std::uint64_t master);
MatrixConfig matrix_config(const RunConfig& cfg);

struct ReproduceResult {
    int exit_code = exit_ok;
    RunManifest manifest;
    std::string message;
};

// synth -> render sources -> ingest -> impute -> grid -> statistics, writing
// everything under out_dir:
//   run.conf, sources/, data.csv, data_imputed.csv, impute_report.json,
//   cells/, boruta/, index.csv, anova.json, anova.txt, manifest.json
// Configuration is validated before any work. A partial grid keeps its
// artifacts, skips the statistics and returns exit_partial.
ReproduceResult reproduce(const RunConfig& cfg, const std::string& out_dir, const ProgressFn& progress = {});

// Accepts either a flat config file or a manifest.json from an earlier run.
RunConfig load_run_config(const std::string& path);

}  // namespace bcbench
