#include "bcbench/matrix.hpp"

#include "bcbench/dataset_io.hpp"
#include "bcbench/error.hpp"
#include "bcbench/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <thread>

namespace bcbench {

using nlohmann::json;

std::string_view to_string(FeatureSelection fs) { return fs == FeatureSelection::boruta ? "boruta" : "none"; }

FeatureSelection parse_feature_selection(std::string_view s) {
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "boruta" || lower == "1") return FeatureSelection::boruta;
    if (lower == "none" || lower == "0") return FeatureSelection::none;
    throw ConfigError("unknown feature selection '" + std::string(s) + "'");
}

std::string CellKey::id() const {
    return "c" + std::to_string(class_level) + "_" + to_char(combo) + "_" + std::string(to_string(fs)) + "_" +
           std::string(to_string(learner));
}

std::vector<CellKey> all_cells() {
    std::vector<CellKey> out;
    for (int level : kClassLevels)
        for (auto combo : kAllCombos)
            for (auto fs : {FeatureSelection::none, FeatureSelection::boruta})
                for (auto learner : kAllLearners) out.push_back({combo, fs, learner, level});
    return out;
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

namespace {

// Runs fn(0..n-1) on a bounded pool; results land in caller-owned slots so
// the outcome does not depend on scheduling.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    for (auto& th : pool) th.join();
}

std::size_t level_slot(int level) {
    const auto it = std::find(kClassLevels.begin(), kClassLevels.end(), level);
    if (it == kClassLevels.end()) throw ConfigError("class level must be 2, 3 or 7");
    return static_cast<std::size_t>(it - kClassLevels.begin());
}

std::string describe(const std::exception& e) {
    std::string msg = e.what();
    try {
        std::rethrow_if_nested(e);
    } catch (const std::exception& inner) {
        msg += " [" + std::string(inner.what()) + "]";
    } catch (...) {
    }
    return msg;
}

}  // namespace

FoldSelection select_in_fold(const FeatureMatrix& train, const BorutaConfig& cfg, bool keep_tentative) {
    const auto report = boruta_select(train, cfg);
    FoldSelection s;
    s.confirmed = report.count(BorutaDecision::confirmed);
    s.tentative = report.count(BorutaDecision::tentative);
    s.rejected = report.count(BorutaDecision::rejected);
    s.columns = selected_columns(report, keep_tentative);
    s.report_json = report.to_json();
    if (s.columns.empty()) {
        // An empty model is not evaluable; keep the features the shadow
        // contest favored most often.
        std::size_t best = 0;
        for (const auto& f : report.features) best = std::max(best, f.hits);
        for (std::size_t i = 0; i < report.features.size(); ++i)
            if (report.features[i].hits == best) s.columns.push_back(i);
        s.fallback = true;
    }
    return s;
}

ResultsTable run_matrix(const std::vector<BehaviorRecord>& records, const MatrixConfig& cfg,
                        const ProgressFn& progress) {
    if (records.empty()) throw EmptyInput("no records for the experiment grid");
    cfg.boruta.validate();
    std::mutex log_mutex;
    auto log = [&](const std::string& m) {
        if (!progress) return;
        std::lock_guard lock(log_mutex);
        progress(m);
    };

    // Matrices per (combo, level).
    constexpr std::size_t kLevels = kClassLevels.size();
    std::vector<std::optional<FeatureMatrix>> matrices(kAllCombos.size() * kLevels);
    std::vector<std::string> matrix_errors(matrices.size());
    auto mslot = [](ComboId c, int level) { return static_cast<std::size_t>(c) * kLevels + level_slot(level); };
    std::set<std::size_t> needed;
    for (const auto& k : cfg.cells) needed.insert(mslot(k.combo, k.class_level));
    for (auto slot : needed) {
        const auto combo = kAllCombos[slot / kLevels];
        const int level = kClassLevels[slot % kLevels];
        try {
            matrices[slot] = build_combination(records, combo, level, cfg.encoding);
        } catch (const Error& e) {
            matrix_errors[slot] = e.what();
        }
    }

    // Fold plans per level, shared by every combination.
    std::vector<std::optional<FoldPlan>> plans(kLevels);
    std::vector<std::string> plan_errors(kLevels);
    for (std::size_t l = 0; l < kLevels; ++l) {
        for (auto slot : needed) {
            if (slot % kLevels != l || !matrices[slot]) continue;
            try {
                plans[l] = kfold_plan(*matrices[slot], cfg.folds,
                                      derive_seed(cfg.seed, {0xF01D, static_cast<std::uint64_t>(kClassLevels[l])}));
            } catch (const Error& e) {
                plan_errors[l] = e.what();
            }
            break;
        }
    }

    // Boruta jobs, one per (combo, level, fold) or per (combo, level).
    struct SelectionJob {
        std::size_t slot;
        std::size_t fold;
        std::optional<FoldSelection> result;
        std::string error;
    };
    std::vector<SelectionJob> jobs;
    std::set<std::size_t> boruta_slots;
    for (const auto& k : cfg.cells)
        if (k.fs == FeatureSelection::boruta) boruta_slots.insert(mslot(k.combo, k.class_level));
    for (auto slot : boruta_slots) {
        if (!matrices[slot] || !plans[slot % kLevels]) continue;
        const std::size_t n_jobs = cfg.select_on_full ? 1 : cfg.folds;
        for (std::size_t f = 0; f < n_jobs; ++f) jobs.push_back({slot, f, std::nullopt, {}});
    }
    parallel_for(jobs.size(), cfg.threads, [&](std::size_t j) {
        auto& job = jobs[j];
        const auto& m = *matrices[job.slot];
        const auto combo = kAllCombos[job.slot / kLevels];
        const int level = kClassLevels[job.slot % kLevels];
        BorutaConfig bc = cfg.boruta;
        bc.seed = derive_seed(cfg.seed, {0xB0, static_cast<std::uint64_t>(combo), static_cast<std::uint64_t>(level),
                                         static_cast<std::uint64_t>(job.fold)});
        try {
            const FeatureMatrix train =
                cfg.select_on_full ? m : m.select_rows(plans[job.slot % kLevels]->training_rows(job.fold));
            job.result = select_in_fold(train, bc, cfg.keep_tentative);
        } catch (const std::exception& e) {
            job.error = describe(e);
        }
        log(std::string("boruta ") + to_char(combo) + " class " + std::to_string(level) + " fold " +
            std::to_string(job.fold) + (job.error.empty() ? "" : " failed: " + job.error));
    });
    std::map<std::size_t, std::vector<const SelectionJob*>> selections_for;
    for (const auto& job : jobs) selections_for[job.slot].push_back(&job);

    // Cells.
    std::vector<CellResult> results(cfg.cells.size());
    parallel_for(cfg.cells.size(), cfg.threads, [&](std::size_t i) {
        const auto& key = cfg.cells[i];
        auto& cell = results[i];
        cell.key = key;
        cell.seed = derive_seed(cfg.seed, {0xCE, static_cast<std::uint64_t>(key.combo),
                                           static_cast<std::uint64_t>(key.fs), static_cast<std::uint64_t>(key.learner),
                                           static_cast<std::uint64_t>(key.class_level)});
        const auto slot = mslot(key.combo, key.class_level);
        try {
            if (!matrices[slot]) throw SchemaError("dataset combination unavailable: " + matrix_errors[slot]);
            const auto& plan = plans[slot % kLevels];
            if (!plan) throw FoldError("no fold plan: " + plan_errors[slot % kLevels]);
            const auto& m = *matrices[slot];
            cell.n_features = m.cols();
            LearnerSpec spec = cfg.learner;
            spec.kind = key.learner;
            spec.seed = cell.seed;
            if (key.fs == FeatureSelection::boruta) {
                std::vector<std::vector<std::size_t>> columns;
                for (std::size_t f = 0; f < plan->k; ++f) {
                    const auto* job = selections_for.at(slot)[cfg.select_on_full ? 0 : f];
                    if (!job->result) throw EmptySelection("feature selection failed: " + job->error);
                    columns.push_back(job->result->columns);
                    cell.selections.push_back(*job->result);
                }
                cell.result = cross_validate(spec, m, *plan, &columns);
            } else {
                cell.result = cross_validate(spec, m, *plan);
            }
        } catch (const std::exception& e) {
            cell.error = describe(e);
        }
        log("cell " + key.id() +
            (cell.ok() ? " accuracy " + format_number(std::round(cell.result->mean.accuracy * 1e4) / 1e2) + "%"
                       : " failed: " + cell.error));
    });

    ResultsTable table;
    table.seed = cfg.seed;
    table.learner = cfg.learner;
    for (auto& c : results) table.cells.emplace(c.key, std::move(c));
    for (const auto& job : jobs) {
        if (!job.result) continue;
        char name[64];
        const auto combo = kAllCombos[job.slot / kLevels];
        const int level = kClassLevels[job.slot % kLevels];
        if (cfg.select_on_full)
            std::snprintf(name, sizeof name, "c%d_%c_full", level, to_char(combo));
        else
            std::snprintf(name, sizeof name, "c%d_%c_fold%02zu", level, to_char(combo), job.fold);
        table.boruta_reports.emplace(name, job.result->report_json);
    }
    return table;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

std::string CellResult::to_json(const LearnerSpec& base) const {
    LearnerSpec spec = base;
    spec.kind = key.learner;
    json sel = json::array();
    for (const auto& s : selections)
        sel.push_back({{"columns", s.columns},
                       {"confirmed", s.confirmed},
                       {"tentative", s.tentative},
                       {"rejected", s.rejected},
                       {"fallback", s.fallback}});
    json doc = {{"cell", key.id()},
                {"class_level", key.class_level},
                {"combo", std::string(1, to_char(key.combo))},
                {"env", key.env() ? 1 : 0},
                {"feature_selection", to_string(key.fs)},
                {"learner", to_string(key.learner)},
                {"learner_code", static_cast<int>(key.learner)},
                {"seed", seed},
                {"n_features", n_features},
                {"hyperparameters", json::parse(spec.hyperparameters_json())},
                {"selections", sel},
                {"status", ok() ? "ok" : "failed"},
                {"error", error},
                {"result", ok() ? json::parse(result->to_json()) : json()}};
    return doc.dump(2) + "\n";
}

bool ResultsTable::complete() const {
    for (const auto& k : all_cells()) {
        const auto it = cells.find(k);
        if (it == cells.end() || !it->second.ok()) return false;
    }
    return true;
}

std::vector<IndexRow> ResultsTable::index() const {
    std::vector<IndexRow> rows;
    for (const auto& [key, c] : cells) {
        IndexRow r;
        r.key = key;
        r.ok = c.ok();
        if (r.ok) {
            const auto& res = *c.result;
            r.accuracy_pct = res.mean.accuracy * 100.0;
            r.accuracy_sd_pct = res.sd.accuracy * 100.0;
            r.precision = res.mean.precision;
            r.recall = res.mean.recall;
            r.specificity = res.mean.specificity;
            r.f1 = res.mean.f1;
            r.auc = res.mean.auc;
        }
        rows.push_back(r);
    }
    return rows;
}

std::string index_to_csv(const std::vector<IndexRow>& rows) {
    CsvTable t;
    t.header = {"cell", "class_level", "combo", "env", "feature_selection", "learner", "status", "accuracy_pct",
                "accuracy_sd_pct", "precision", "recall", "specificity", "f1", "auc"};
    for (const auto& r : rows) {
        auto num = [&](double v) { return r.ok ? format_number(v) : std::string(); };
        t.rows.push_back({r.key.id(), std::to_string(r.key.class_level), std::string(1, to_char(r.key.combo)),
                          r.key.env() ? "1" : "0", std::string(to_string(r.key.fs)),
                          std::string(to_string(r.key.learner)), r.ok ? "ok" : "failed", num(r.accuracy_pct),
                          num(r.accuracy_sd_pct), num(r.precision), num(r.recall), num(r.specificity), num(r.f1),
                          num(r.auc)});
    }
    return to_csv(t);
}

std::vector<IndexRow> index_from_csv(std::string_view text) {
    const auto t = parse_csv(text);
    auto col = [&](const std::string& name) { return t.column(name); };
    const auto c_level = col("class_level"), c_combo = col("combo"), c_fs = col("feature_selection"),
               c_learner = col("learner"), c_status = col("status"), c_acc = col("accuracy_pct"),
               c_sd = col("accuracy_sd_pct"), c_p = col("precision"), c_r = col("recall"), c_s = col("specificity"),
               c_f1 = col("f1"), c_auc = col("auc");
    std::vector<IndexRow> rows;
    for (const auto& row : t.rows) {
        IndexRow r;
        r.key.class_level = std::stoi(row.at(c_level));
        level_slot(r.key.class_level);
        r.key.combo = parse_combo(row.at(c_combo));
        r.key.fs = parse_feature_selection(row.at(c_fs));
        r.key.learner = parse_learner(row.at(c_learner));
        r.ok = row.at(c_status) == "ok";
        if (r.ok) {
            r.accuracy_pct = parse_number(row.at(c_acc));
            r.accuracy_sd_pct = parse_number(row.at(c_sd));
            r.precision = parse_number(row.at(c_p));
            r.recall = parse_number(row.at(c_r));
            r.specificity = parse_number(row.at(c_s));
            r.f1 = parse_number(row.at(c_f1));
            r.auc = parse_number(row.at(c_auc));
        }
        rows.push_back(r);
    }
    return rows;
}

std::vector<std::string> ResultsTable::write(const std::string& dir) const {
    namespace fs = std::filesystem;
    const fs::path root(dir);
    const fs::path cell_dir = root / "cells";
    std::error_code ec;
    fs::create_directories(cell_dir, ec);
    if (ec) throw IoError("cannot create " + cell_dir.string() + ": " + ec.message());
    std::vector<std::string> written;
    for (const auto& [key, c] : cells) {
        const auto name = "cells/" + key.id() + ".json";
        write_text_file((root / name).string(), c.to_json(learner));
        written.push_back(name);
    }
    if (!boruta_reports.empty()) {
        fs::create_directories(root / "boruta", ec);
        if (ec) throw IoError("cannot create " + (root / "boruta").string() + ": " + ec.message());
        for (const auto& [name, text] : boruta_reports) {
            const auto file = "boruta/" + name + ".json";
            write_text_file((root / file).string(), text);
            written.push_back(file);
        }
    }
    write_text_file((root / "index.csv").string(), index_to_csv(index()));
    written.push_back("index.csv");
    return written;
}

// ---------------------------------------------------------------------------
// Summaries and analysis
// ---------------------------------------------------------------------------

std::string_view to_string(GroupBy g) {
    switch (g) {
        case GroupBy::env: return "env";
        case GroupBy::feature_selection: return "feature_selection";
        case GroupBy::learner: return "learner";
        case GroupBy::class_level: return "class_level";
        case GroupBy::combo: return "combo";
    }
    return "?";
}

namespace {

std::string group_value(const CellKey& k, GroupBy g) {
    switch (g) {
        case GroupBy::env: return k.env() ? "1" : "0";
        case GroupBy::feature_selection: return std::string(to_string(k.fs));
        case GroupBy::learner: return std::string(to_string(k.learner));
        case GroupBy::class_level: return std::to_string(k.class_level);
        case GroupBy::combo: return std::string(1, to_char(k.combo));
    }
    return {};
}

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<IndexRow>& rows, const std::set<GroupBy>& by) {
    std::map<std::map<GroupBy, std::string>, std::vector<double>> groups;
    for (const auto& r : rows) {
        if (!r.ok) continue;
        std::map<GroupBy, std::string> g;
        for (auto d : by) g[d] = group_value(r.key, d);
        groups[g].push_back(r.accuracy_pct);
    }
    std::vector<SummaryRow> out;
    for (const auto& [g, values] : groups) out.push_back({g, aggregate_mean_sd(values)});
    return out;
}

FactorialDesign study_design(const std::vector<IndexRow>& rows) {
    std::map<CellKey, const IndexRow*> by_key;
    for (const auto& r : rows) by_key[r.key] = &r;
    FactorialDesign d;
    d.factors = {"Dataset", "Feature selection", "Classifier", "Class"};
    d.levels = {2, 2, 4, 3};
    for (const auto& key : all_cells()) {
        const auto it = by_key.find(key);
        if (it == by_key.end() || !it->second->ok)
            throw SchemaError("results table is incomplete: missing or failed cell " + key.id());
        FactorialDesign::Observation o;
        o.cell = {key.env() ? 1u : 0u, key.fs == FeatureSelection::boruta ? 1u : 0u,
                  static_cast<std::size_t>(key.learner) - 1, level_slot(key.class_level)};
        o.response = it->second->accuracy_pct;
        o.replicate = std::string("variant") + std::to_string(combo_behavior_variant(key.combo));
        d.observations.push_back(std::move(o));
    }
    return d;
}

StudyAnalysis analyze(const std::vector<IndexRow>& rows) {
    StudyAnalysis a;
    a.design = study_design(rows);
    a.factorial = factorial_anova(a.design);

    auto stage = [&](const std::string& scope, const std::vector<std::string>& labels,
                     const std::vector<std::vector<double>>& groups) {
        StageOneTest t;
        t.scope = scope;
        t.groups = labels;
        for (const auto& g : groups) t.group_stats.push_back(aggregate_mean_sd(g));
        t.anova = one_way_anova(groups);
        t.posthoc = bonferroni_posthoc(groups, 0.05);
        return t;
    };
    for (int level : kClassLevels) {
        std::vector<std::string> labels;
        std::vector<std::vector<double>> groups;
        for (auto combo : kAllCombos) {
            labels.push_back(std::string(1, to_char(combo)));
            groups.emplace_back();
            for (const auto& r : rows)
                if (r.key.class_level == level && r.key.combo == combo) groups.back().push_back(r.accuracy_pct);
        }
        a.within_class.push_back(stage("class " + std::to_string(level), labels, groups));
    }
    for (auto combo : kAllCombos) {
        std::vector<std::string> labels;
        std::vector<std::vector<double>> groups;
        for (int level : kClassLevels) {
            labels.push_back("class " + std::to_string(level));
            groups.emplace_back();
            for (const auto& r : rows)
                if (r.key.class_level == level && r.key.combo == combo) groups.back().push_back(r.accuracy_pct);
        }
        a.between_class.push_back(stage(std::string("combo ") + to_char(combo), labels, groups));
    }
    return a;
}

namespace {

json nullable(double v) { return std::isfinite(v) ? json(v) : json(); }

json stage_json(const StageOneTest& t) {
    json groups = json::array();
    for (std::size_t i = 0; i < t.groups.size(); ++i)
        groups.push_back({{"group", t.groups[i]}, {"mean", t.group_stats[i].mean}, {"sd", t.group_stats[i].sd},
                          {"n", t.group_stats[i].n}});
    json pairs = json::array();
    for (const auto& p : t.posthoc.pairs)
        pairs.push_back({{"a", t.groups[p.a]},
                         {"b", t.groups[p.b]},
                         {"mean_difference", p.mean_difference},
                         {"t", nullable(p.t)},
                         {"p", p.p_raw},
                         {"p_adjusted", p.p_adjusted},
                         {"significant", p.significant}});
    return {{"scope", t.scope},
            {"groups", groups},
            {"anova",
             {{"F", nullable(t.anova.f)},
              {"df_between", t.anova.df_between},
              {"df_within", t.anova.df_within},
              {"p", t.anova.p}}},
            {"bonferroni",
             {{"comparisons", t.posthoc.comparisons}, {"alpha", t.posthoc.alpha}, {"threshold", t.posthoc.threshold},
              {"pairs", pairs}}}};
}

json row_json(const AnovaRow& r) {
    return {{"effect", r.effect}, {"df", r.df},          {"ss", r.ss}, {"ms", r.ms},
            {"F", nullable(r.f)}, {"p", nullable(r.p)}, {"partial_eta_sq", nullable(r.partial_eta_sq)}};
}

}  // namespace

std::string StudyAnalysis::to_json() const {
    json within = json::array(), between = json::array(), effects = json::array();
    for (const auto& t : within_class) within.push_back(stage_json(t));
    for (const auto& t : between_class) between.push_back(stage_json(t));
    for (const auto& r : factorial.effects) effects.push_back(row_json(r));
    json doc = {
        {"stage1", {{"within_class", within}, {"between_class", between}}},
        {"stage2",
         {{"title", "Two-stage three-way ANOVA (fitted as a four-factor full factorial)"},
          {"factors", design.factors},
          {"levels", design.levels},
          {"replicates", factorial.replicates},
          {"replicate_definition", "behavior-category variant: a/b major, c/d minor, e/f both"},
          {"effects", effects},
          {"error", row_json(factorial.error)},
          {"total", {{"df", factorial.df_total}, {"ss", factorial.ss_total}}}}},
    };
    return doc.dump(2) + "\n";
}

std::string StudyAnalysis::to_text() const {
    std::ostringstream out;
    char buf[256];
    auto stage_text = [&](const std::vector<StageOneTest>& tests, const std::string& heading) {
        out << heading << "\n";
        for (const auto& t : tests) {
            std::snprintf(buf, sizeof buf, "  %-9s F(%zu, %zu) = %8.3f  p = %.4g%s\n", t.scope.c_str(),
                          t.anova.df_between, t.anova.df_within, t.anova.f, t.anova.p,
                          significance_stars(t.anova.p).c_str());
            out << buf;
            for (std::size_t i = 0; i < t.groups.size(); ++i) {
                std::snprintf(buf, sizeof buf, "      %-8s %6.2f (%.2f)\n", t.groups[i].c_str(),
                              t.group_stats[i].mean, t.group_stats[i].sd);
                out << buf;
            }
            std::size_t sig = 0;
            for (const auto& p : t.posthoc.pairs) sig += p.significant;
            std::snprintf(buf, sizeof buf, "      Bonferroni: %zu of %zu pairs significant (threshold %.4g)\n", sig,
                          t.posthoc.comparisons, t.posthoc.threshold);
            out << buf;
        }
        out << "\n";
    };
    stage_text(within_class, "Stage 1a: one-way ANOVA of combinations within each class");
    stage_text(between_class, "Stage 1b: one-way ANOVA of class levels for each combination");
    out << render_anova_table(factorial,
                              "Stage 2: two-stage three-way ANOVA, fitted as a four-factor full factorial "
                              "(replicates = behavior-category variants)");
    return out.str();
}

}  // namespace bcbench
