#include "bcbench/reproduce.hpp"

#include "bcbench/dataset_io.hpp"
#include "bcbench/error.hpp"
#include "bcbench/impute.hpp"
#include "bcbench/ingest.hpp"
#include "bcbench/random.hpp"
#include "bcbench/stats.hpp"
#include "bcbench/synth.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <array>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace bcbench {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 digest failed");
    return to_hex({digest.data(), len});
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_text_file(path)); }

std::string RunManifest::to_json() const {
    json doc = {{"tool_version", tool_version}, {"config", config_text}, {"seeds", seeds},
                {"artifacts", artifacts},       {"complete", complete}};
    return doc.dump(2) + "\n";
}

RunManifest RunManifest::from_json(std::string_view text) {
    try {
        const auto doc = json::parse(text);
        RunManifest m;
        m.tool_version = doc.at("tool_version").get<std::string>();
        m.config_text = doc.at("config").get<std::string>();
        m.seeds = doc.at("seeds").get<std::map<std::string, std::uint64_t>>();
        m.artifacts = doc.at("artifacts").get<std::map<std::string, std::string>>();
        m.complete = doc.at("complete").get<bool>();
        return m;
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad manifest: ") + e.what());
    }
}

std::uint64_t synth_seed(std::uint64_t master) { return derive_seed(master, {0x5EED}); }

MatrixConfig matrix_config(const RunConfig& cfg) {
    MatrixConfig m;
    m.seed = cfg.seed;
    m.folds = cfg.folds;
    m.boruta = cfg.boruta;
    m.keep_tentative = cfg.keep_tentative;
    m.select_on_full = cfg.select_on_full;
    m.learner = cfg.learner;
    m.threads = cfg.threads;
    return m;
}

RunConfig load_run_config(const std::string& path) {
    const auto text = read_text_file(path);
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{')
        return RunConfig::from(FlatConfig::parse(RunManifest::from_json(text).config_text));
    return RunConfig::from(FlatConfig::parse(text));
}

namespace {

SynthConfig synth_config(const RunConfig& cfg) {
    SynthConfig s;
    s.n_records = cfg.n_records;
    s.n_children = cfg.n_children;
    s.sessions_per_child = cfg.sessions_per_child;
    s.env_signal = cfg.env_signal;
    s.behavior_signal = cfg.behavior_signal;
    if (!cfg.label_mapping.empty()) s.mapping = LabelMapping::load(cfg.label_mapping);
    s.seed = synth_seed(cfg.seed);
    return s;
}

void hash_tree(const fs::path& root, const fs::path& dir, std::map<std::string, std::string>& out) {
    if (!fs::exists(dir)) return;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        out[fs::relative(entry.path(), root).generic_string()] = sha256_file(entry.path().string());
    }
}

ReproduceResult run(const RunConfig& cfg, const std::string& out_dir, const ProgressFn& progress) {
    auto say = [&](const std::string& m) {
        if (progress) progress(m);
    };
    const fs::path root(out_dir);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw IoError("cannot create " + root.string() + ": " + ec.message());

    ReproduceResult r;
    auto& manifest = r.manifest;
    manifest.config_text = cfg.to_flat().to_text();
    manifest.seeds = {{"master", cfg.seed}, {"synth", synth_seed(cfg.seed)}};
    write_text_file((root / "run.conf").string(), manifest.config_text);

    // Sources stand in for the field recordings; ingest rebuilds the records.
    const auto synth = synth_config(cfg);
    const auto generated = generate(synth);
    const fs::path sources = root / "sources";
    fs::remove_all(sources, ec);
    render_sources(generated, sources.string());
    say("synth: " + std::to_string(generated.size()) + " records rendered to sources/");

    WeatherSource weather = cfg.weather_mode == "live" ? WeatherSource::live_from_environment()
                                                       : WeatherSource::fixtures((sources / "weather").string());
    auto ingested = ingest_directory(sources.string(), weather);
    const auto& c = ingested.counters;
    say("ingest: " + std::to_string(c.retained) + " retained, " + std::to_string(c.discarded) + " discarded, " +
        std::to_string(c.malformed_frames) + " malformed frames, " + std::to_string(c.weather_unavailable) +
        " without weather");
    write_records((root / "data.csv").string(), ingested.records);

    auto imputed = impute_records(std::move(ingested.records), {cfg.impute_k, cfg.session_fill});
    write_records((root / "data_imputed.csv").string(), imputed.records);
    write_text_file((root / "impute_report.json").string(), imputed.report.to_json());
    say("impute: k = " + std::to_string(cfg.impute_k));

    auto table = run_matrix(imputed.records, matrix_config(cfg), progress);
    table.config_hash = sha256_hex(manifest.config_text);
    fs::remove_all(root / "cells", ec);
    fs::remove_all(root / "boruta", ec);
    table.write(root.string());

    fs::remove(root / "anova.json", ec);
    fs::remove(root / "anova.txt", ec);
    manifest.complete = table.complete();
    if (manifest.complete) {
        const auto analysis = analyze(table.index());
        write_text_file((root / "anova.json").string(), analysis.to_json());
        write_text_file((root / "anova.txt").string(), analysis.to_text());
        r.message = "complete: 144 cells and ANOVA written";
    } else {
        std::size_t failed = 0;
        for (const auto& [key, cell] : table.cells) failed += !cell.ok();
        r.exit_code = exit_partial;
        r.message = "partial grid: " + std::to_string(failed) + " failed cells; statistics skipped";
    }

    for (const char* file : {"run.conf", "data.csv", "data_imputed.csv", "impute_report.json", "index.csv",
                             "anova.json", "anova.txt"})
        if (fs::exists(root / file)) manifest.artifacts[file] = sha256_file((root / file).string());
    hash_tree(root, sources, manifest.artifacts);
    hash_tree(root, root / "cells", manifest.artifacts);
    hash_tree(root, root / "boruta", manifest.artifacts);
    write_text_file((root / "manifest.json").string(), manifest.to_json());
    return r;
}

}  // namespace

ReproduceResult reproduce(const RunConfig& cfg, const std::string& out_dir, const ProgressFn& progress) {
    try {
        cfg.validate();
        synth_config(cfg).validate();
    } catch (const Error& e) {
        ReproduceResult r;
        r.exit_code = exit_config;
        r.message = std::string("configuration error: ") + e.what();
        return r;
    }
    try {
        return run(cfg, out_dir, progress);
    } catch (const IoError& e) {
        ReproduceResult r;
        r.exit_code = exit_io;
        r.message = std::string("I/O error: ") + e.what();
        return r;
    } catch (const fs::filesystem_error& e) {
        ReproduceResult r;
        r.exit_code = exit_io;
        r.message = std::string("I/O error: ") + e.what();
        return r;
    }
}

}  // namespace bcbench
