// bcbench command-line driver. Each stage of the pipeline is a subcommand;
// `reproduce` chains them all.

#include "bcbench/agreement.hpp"
#include "bcbench/boruta.hpp"
#include "bcbench/config.hpp"
#include "bcbench/dataset_io.hpp"
#include "bcbench/error.hpp"
#include "bcbench/eval.hpp"
#include "bcbench/impute.hpp"
#include "bcbench/ingest.hpp"
#include "bcbench/learners.hpp"
#include "bcbench/matrix.hpp"
#include "bcbench/reproduce.hpp"
#include "bcbench/stats.hpp"
#include "bcbench/synth.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

using namespace bcbench;

namespace {

struct ConfigOptions {
    std::string path;
    std::vector<std::string> overrides;

    void attach(CLI::App* app) {
        app->add_option("--config", path, "Flat key=value configuration file (or a manifest.json)");
        app->add_option("--set", overrides, "Override one setting, key=value; repeatable");
    }

    RunConfig load() const {
        FlatConfig flat;
        if (!path.empty()) {
            const auto text = read_text_file(path);
            const auto first = text.find_first_not_of(" \t\r\n");
            flat = FlatConfig::parse(first != std::string::npos && text[first] == '{'
                                         ? RunManifest::from_json(text).config_text
                                         : text);
        }
        for (const auto& o : overrides) {
            const auto eq = o.find('=');
            if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + o + "'");
            flat.set(o.substr(0, eq), o.substr(eq + 1));
        }
        auto cfg = RunConfig::from(flat);
        cfg.validate();
        return cfg;
    }
};

void log_line(const std::string& m) { std::cerr << m << "\n"; }

bool has_missing(const std::vector<BehaviorRecord>& records) {
    for (const auto& r : records)
        if (r.env.missing_count() > 0) return true;
    return false;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Behavior-classification benchmark harness"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    // synth
    SynthConfig synth_cfg;
    std::string synth_out, synth_sources;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic behavior dataset");
    synth->add_option("--n", synth_cfg.n_records, "Number of records")->capture_default_str();
    synth->add_option("--children", synth_cfg.n_children, "Number of children")->capture_default_str();
    synth->add_option("--sessions", synth_cfg.sessions_per_child, "Sessions per child")->capture_default_str();
    synth->add_option("--env-signal", synth_cfg.env_signal, "Environment signal strength in [0,1]")
        ->capture_default_str();
    synth->add_option("--behavior-signal", synth_cfg.behavior_signal, "Behavior signal strength in [0,1]")
        ->capture_default_str();
    synth->add_option("--seed", synth_cfg.seed, "Random seed")->capture_default_str();
    synth->add_option("--out", synth_out, "Dataset CSV with missing cells");
    synth->add_option("--sources", synth_sources, "Also write the raw source directory here");

    // ingest
    std::string ingest_dir, ingest_fixtures, ingest_out;
    bool ingest_live = false;
    auto* ingest = app.add_subcommand("ingest", "Assemble records from a source directory");
    ingest->add_option("--sources", ingest_dir, "Directory with events.csv, beacons.jsonl, alps.jsonl, gps.jsonl")
        ->required();
    ingest->add_option("--fixtures", ingest_fixtures, "Weather fixture directory (default <sources>/weather)");
    ingest->add_flag("--live", ingest_live, "Query the live weather service (BCBENCH_WEATHER_URL/KEY)");
    ingest->add_option("--out", ingest_out, "Dataset CSV")->required();

    // impute
    ImputeOptions impute_opts;
    bool no_session_fill = false;
    std::string impute_in, impute_out, impute_report;
    auto* impute = app.add_subcommand("impute", "Fill missing environment cells");
    impute->add_option("--k", impute_opts.k, "Neighbors")->capture_default_str();
    impute->add_flag("--no-session-fill", no_session_fill, "Skip the session-local fill step");
    impute->add_option("--in", impute_in, "Dataset CSV")->required();
    impute->add_option("--out", impute_out, "Imputed dataset CSV")->required();
    impute->add_option("--report", impute_report, "Imputation report JSON");

    // kappa
    std::string kappa_a, kappa_b;
    auto* kappa = app.add_subcommand("kappa", "Cohen's kappa between two raters");
    kappa->add_option("--a", kappa_a, "Ratings CSV of rater A")->required();
    kappa->add_option("--b", kappa_b, "Ratings CSV of rater B")->required();

    // combo
    std::string combo_in, combo_out, combo_id;
    int combo_level = 7;
    auto* combo = app.add_subcommand("combo", "Build the feature matrix of one dataset combination");
    combo->add_option("--in", combo_in, "Imputed dataset CSV")->required();
    combo->add_option("--combo", combo_id, "Combination a-f")->required();
    combo->add_option("--class", combo_level, "Class level 2, 3 or 7")->capture_default_str();
    combo->add_option("--out", combo_out, "Feature matrix CSV")->required();

    // select
    BorutaConfig boruta_cfg;
    bool select_keep_tentative = false;
    std::string select_in, select_report, select_out;
    auto* select = app.add_subcommand("select", "Boruta feature selection on a feature matrix");
    select->add_option("--alpha", boruta_cfg.alpha, "Significance level")->capture_default_str();
    select->add_option("--max-runs", boruta_cfg.max_runs, "Maximum importance runs")->capture_default_str();
    select->add_option("--trees", boruta_cfg.forest.n_trees, "Trees per importance forest")->capture_default_str();
    select->add_option("--seed", boruta_cfg.seed, "Random seed")->capture_default_str();
    select->add_flag("--keep-tentative", select_keep_tentative, "Keep Tentative features in --out");
    select->add_option("--in", select_in, "Feature matrix CSV")->required();
    select->add_option("--report", select_report, "Report JSON")->required();
    select->add_option("--out", select_out, "Reduced feature matrix CSV");

    // train
    ConfigOptions train_cfg;
    std::string train_learner, train_in, train_model;
    std::uint64_t train_seed = 1;
    auto* train = app.add_subcommand("train", "Fit one learner on a feature matrix");
    train->add_option("--learner", train_learner, "xgb, svm, rf or nn")->required();
    train->add_option("--in", train_in, "Feature matrix CSV")->required();
    train->add_option("--model", train_model, "Output model file")->required();
    train->add_option("--seed", train_seed, "Learner seed")->capture_default_str();
    train_cfg.attach(train);

    // predict
    std::string predict_model, predict_in, predict_out;
    auto* predict = app.add_subcommand("predict", "Score a feature matrix with a saved model");
    predict->add_option("--model", predict_model, "Model file")->required();
    predict->add_option("--in", predict_in, "Feature matrix CSV")->required();
    predict->add_option("--out", predict_out, "Predictions CSV (stdout when omitted)");

    // cv
    ConfigOptions cv_cfg;
    std::string cv_learner, cv_in, cv_out;
    std::uint64_t cv_seed = 1;
    std::size_t cv_folds = 10;
    auto* cv = app.add_subcommand("cv", "Stratified k-fold evaluation of one learner on a feature matrix");
    cv->add_option("--learner", cv_learner, "xgb, svm, rf or nn")->required();
    cv->add_option("--in", cv_in, "Feature matrix CSV")->required();
    cv->add_option("--folds", cv_folds, "Folds")->capture_default_str();
    cv->add_option("--seed", cv_seed, "Seed for folds and learner")->capture_default_str();
    cv->add_option("--out", cv_out, "RunResult JSON (stdout when omitted)");
    cv_cfg.attach(cv);

    // matrix
    ConfigOptions matrix_cfg;
    std::string matrix_in, matrix_out;
    auto* matrix = app.add_subcommand("matrix", "Evaluate the 144-cell experiment grid");
    matrix->add_option("--in", matrix_in, "Dataset CSV (imputed first when cells are missing)")->required();
    matrix->add_option("--out", matrix_out, "Results directory")->required();
    matrix_cfg.attach(matrix);

    // stats
    std::string stats_results, stats_out, stats_text;
    auto* stats = app.add_subcommand("stats", "ANOVA over a complete results index");
    stats->add_option("--results", stats_results, "index.csv of a results directory")->required();
    stats->add_option("--out", stats_out, "ANOVA JSON")->required();
    stats->add_option("--text", stats_text, "Aligned text table (stdout when omitted)");

    // reproduce
    ConfigOptions repro_cfg;
    std::string repro_out;
    auto* repro = app.add_subcommand("reproduce", "Run the whole workflow into one directory");
    repro->add_option("--out", repro_out, "Output directory")->required();
    repro_cfg.attach(repro);

    // config
    ConfigOptions show_cfg;
    auto* show = app.add_subcommand("config", "Print every configuration key with its effective value");
    show_cfg.attach(show);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        if (*synth) {
            synth_cfg.validate();
            const auto records = generate(synth_cfg);
            if (!synth_out.empty()) write_records(synth_out, records);
            if (!synth_sources.empty()) render_sources(records, synth_sources);
            if (synth_out.empty() && synth_sources.empty()) std::cout << records_to_csv(records);
            log_line("synth: " + std::to_string(records.size()) + " records");
        } else if (*ingest) {
            WeatherSource weather =
                ingest_live ? WeatherSource::live_from_environment()
                            : WeatherSource::fixtures(ingest_fixtures.empty()
                                                          ? (std::filesystem::path(ingest_dir) / "weather").string()
                                                          : ingest_fixtures);
            const auto result = ingest_directory(ingest_dir, weather);
            write_records(ingest_out, result.records);
            const auto& c = result.counters;
            log_line("ingest: " + std::to_string(c.records_in) + " events, " + std::to_string(c.retained) +
                     " retained, " + std::to_string(c.discarded) + " discarded, " +
                     std::to_string(c.malformed_frames) + " malformed frames, " +
                     std::to_string(c.weather_unavailable) + " without weather");
        } else if (*impute) {
            impute_opts.session_fill = !no_session_fill;
            auto result = impute_records(read_records(impute_in), impute_opts);
            write_records(impute_out, result.records);
            if (!impute_report.empty()) write_text_file(impute_report, result.report.to_json());
        } else if (*kappa) {
            auto ratings = [](const std::string& path) {
                const auto t = read_csv(path);
                const auto header = t.header;
                std::size_t col = header.size() - 1;
                for (std::size_t i = 0; i < header.size(); ++i)
                    if (header[i] == "rating") col = i;
                std::vector<std::string> out;
                for (const auto& row : t.rows) out.push_back(row.at(col));
                return out;
            };
            const double k = cohen_kappa({ratings(kappa_a), ratings(kappa_b)});
            std::cout << "kappa " << format_number(k) << " (" << interpret_kappa(k) << ")\n";
        } else if (*combo) {
            const auto records = read_records(combo_in);
            if (has_missing(records)) throw MissingDataError("dataset has missing cells; run impute first");
            write_matrix(combo_out, build_combination(records, parse_combo(combo_id), combo_level));
        } else if (*select) {
            const auto m = read_matrix(select_in);
            const auto report = boruta_select(m, boruta_cfg);
            write_text_file(select_report, report.to_json());
            if (!select_out.empty()) write_matrix(select_out, apply_selection(m, report, select_keep_tentative));
            log_line("select: " + std::to_string(report.count(BorutaDecision::confirmed)) + " confirmed, " +
                     std::to_string(report.count(BorutaDecision::tentative)) + " tentative, " +
                     std::to_string(report.count(BorutaDecision::rejected)) + " rejected after " +
                     std::to_string(report.runs.size()) + " runs");
        } else if (*train) {
            auto spec = train_cfg.load().learner;
            spec.kind = parse_learner(train_learner);
            spec.seed = train_seed;
            save_model(fit(spec, read_matrix(train_in)), train_model);
        } else if (*predict) {
            const auto model = load_model(predict_model);
            const auto m = read_matrix(predict_in);
            const auto scores = predict_scores(model, m);
            CsvTable t;
            t.header = {"row", "label", "predicted"};
            for (int c = 0; c < model.n_classes; ++c) t.header.push_back("score_" + std::to_string(c));
            for (std::size_t i = 0; i < m.rows(); ++i) {
                std::vector<std::string> row{std::to_string(i), std::to_string(m.labels()[i]),
                                             std::to_string(argmax(scores[i]))};
                for (double s : scores[i]) row.push_back(format_number(s));
                t.rows.push_back(std::move(row));
            }
            if (predict_out.empty())
                std::cout << to_csv(t);
            else
                write_text_file(predict_out, to_csv(t));
        } else if (*cv) {
            auto spec = cv_cfg.load().learner;
            spec.kind = parse_learner(cv_learner);
            spec.seed = cv_seed;
            const auto m = read_matrix(cv_in);
            const auto result = cross_validate(spec, m, kfold_plan(m, cv_folds, cv_seed));
            if (cv_out.empty())
                std::cout << result.to_json();
            else
                write_text_file(cv_out, result.to_json());
        } else if (*matrix) {
            const auto cfg = matrix_cfg.load();
            auto records = read_records(matrix_in);
            if (has_missing(records)) {
                log_line("matrix: input has missing cells; imputing with k = " + std::to_string(cfg.impute_k));
                records = impute_records(std::move(records), {cfg.impute_k, cfg.session_fill}).records;
            }
            auto table = run_matrix(records, matrix_config(cfg), log_line);
            table.config_hash = sha256_hex(cfg.to_flat().to_text());
            table.write(matrix_out);
            if (!table.complete()) {
                log_line("matrix: partial grid; see failed cells in index.csv");
                return exit_partial;
            }
        } else if (*stats) {
            const auto rows = index_from_csv(read_text_file(stats_results));
            for (const auto& r : rows)
                if (!r.ok) {
                    log_line("stats: results are incomplete (" + r.key.id() + " failed)");
                    return exit_partial;
                }
            const auto analysis = analyze(rows);
            write_text_file(stats_out, analysis.to_json());
            if (stats_text.empty())
                std::cout << analysis.to_text();
            else
                write_text_file(stats_text, analysis.to_text());
        } else if (*show) {
            const auto flat = show_cfg.load().to_flat();
            for (const auto& [key, help] : run_config_keys()) {
                std::cout << "# " << help << "\n";
                std::cout << key << " = " << flat.get_string(key, "") << "\n";
            }
        } else if (*repro) {
            const auto cfg = repro_cfg.load();
            const auto result = reproduce(cfg, repro_out, log_line);
            log_line("reproduce: " + result.message);
            return result.exit_code;
        }
    } catch (const ConfigError& e) {
        log_line(std::string("configuration error: ") + e.what());
        return exit_config;
    } catch (const IoError& e) {
        log_line(std::string("I/O error: ") + e.what());
        return exit_io;
    } catch (const ParseError& e) {
        log_line(std::string("input error: ") + e.what());
        return exit_io;
    } catch (const SchemaError& e) {
        log_line(std::string("input error: ") + e.what());
        return exit_io;
    } catch (const SourceUnavailable& e) {
        log_line(std::string("source unavailable: ") + e.what());
        return exit_io;
    } catch (const std::exception& e) {
        log_line(std::string("error: ") + e.what());
        return 1;
    }
    return exit_ok;
}
