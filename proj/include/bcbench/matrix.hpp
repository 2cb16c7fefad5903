#pragma once

#include "bcbench/boruta.hpp"
#include "bcbench/datamodel.hpp"
#include "bcbench/eval.hpp"
#include "bcbench/learners.hpp"
#include "bcbench/stats.hpp"

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace bcbench {

enum class FeatureSelection { none, boruta };
std::string_view to_string(FeatureSelection fs);
FeatureSelection parse_feature_selection(std::string_view s);

inline constexpr std::array<int, 3> kClassLevels{2, 3, 7};

struct CellKey {
    ComboId combo = ComboId::a;
    FeatureSelection fs = FeatureSelection::none;
    LearnerKind learner = LearnerKind::xgb;
    int class_level = 2;

    bool env() const { return combo_has_env(combo); }
    // e.g. "c7_a_boruta_rf"
    std::string id() const;
    auto operator<=>(const CellKey&) const = default;
};

// All 144 keys ordered by (class level, combo, selection, learner).
std::vector<CellKey> all_cells();

struct MatrixConfig {
    std::uint64_t seed = 0;
    std::size_t folds = 10;
    BorutaConfig boruta;
    bool keep_tentative = false;
    bool select_on_full = false;
    LearnerSpec learner;  // kind and seed are overwritten per cell
    std::size_t threads = 0;
    EncodingOptions encoding;
    std::vector<CellKey> cells = all_cells();
};

// Selection shared by every learner of one (combo, class level, fold).
struct FoldSelection {
    std::vector<std::size_t> columns;
    std::size_t confirmed = 0;
    std::size_t tentative = 0;
    std::size_t rejected = 0;
    bool fallback = false;  // nothing kept; top hit-count features used instead
    std::string report_json;  // full Boruta report; not repeated in cell files
};

struct CellResult {
    CellKey key;
    std::uint64_t seed = 0;
    std::optional<RunResult> result;
    std::string error;
    std::vector<FoldSelection> selections;  // per fold, Boruta cells only
    std::size_t n_features = 0;             // before selection

    bool ok() const { return result.has_value(); }
    std::string to_json(const LearnerSpec& spec) const;
};

struct IndexRow {
    CellKey key;
    bool ok = false;
    double accuracy_pct = 0.0;
    double accuracy_sd_pct = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double specificity = 0.0;
    double f1 = 0.0;
    double auc = 0.0;
};

struct ResultsTable {
    std::map<CellKey, CellResult> cells;
    std::uint64_t seed = 0;
    std::string config_hash;
    LearnerSpec learner;
    // Boruta report per selection run, keyed like "c7_a_fold03" or "c7_a_full".
    std::map<std::string, std::string> boruta_reports;

    bool complete() const;  // all 144 keys present and successful
    std::vector<IndexRow> index() const;
    // cells/*.json, boruta/*.json and index.csv; returns the written file names.
    std::vector<std::string> write(const std::string& dir) const;
};

std::string index_to_csv(const std::vector<IndexRow>& rows);
std::vector<IndexRow> index_from_csv(std::string_view text);

using ProgressFn = std::function<void(const std::string& message)>;

// Runs every configured cell. Fold plans come from (seed, class level) so all
// combinations of one level share folds. Cell failures are recorded, never
// thrown.
ResultsTable run_matrix(const std::vector<BehaviorRecord>& records, const MatrixConfig& cfg,
                        const ProgressFn& progress = {});

// Selection inside one fold: Boruta on the training rows only.
FoldSelection select_in_fold(const FeatureMatrix& train, const BorutaConfig& cfg, bool keep_tentative);

// Grouping dimensions for summarize.
enum class GroupBy { env, feature_selection, learner, class_level, combo };

struct SummaryRow {
    std::map<GroupBy, std::string> group;
    MeanSd accuracy;  // over the cells' mean accuracies, in percent
};

// Mean and sample SD of cell mean accuracies per group; failed cells skipped.
std::vector<SummaryRow> summarize(const std::vector<IndexRow>& rows, const std::set<GroupBy>& by);
std::string_view to_string(GroupBy g);

// Two-stage analysis of a complete index.
struct StageOneTest {
    std::string scope;                // e.g. "class 2" or "combo a"
    std::vector<std::string> groups;  // group labels
    std::vector<MeanSd> group_stats;
    OneWayResult anova;
    BonferroniResult posthoc;
};

struct StudyAnalysis {
    std::vector<StageOneTest> within_class;   // combos compared inside each class level
    std::vector<StageOneTest> between_class;  // class levels compared for each combo
    AnovaTable factorial;
    FactorialDesign design;

    std::string to_json() const;
    std::string to_text() const;
};

// Dataset (env), feature selection, classifier and class as factors; the
// behavior variant (a/b, c/d, e/f) is the replicate. Throws SchemaError on a
// partial index.
FactorialDesign study_design(const std::vector<IndexRow>& rows);
StudyAnalysis analyze(const std::vector<IndexRow>& rows);

}  // namespace bcbench
