#include "bcbench/eval.hpp"

#include "bcbench/error.hpp"
#include "bcbench/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <numeric>
#include <sstream>

namespace bcbench {

namespace {

// Row indices per class label, ascending, for the labels that occur.
std::map<int, std::vector<std::size_t>> rows_by_class(std::span<const int> labels) {
    std::map<int, std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < labels.size(); ++i) out[labels[i]].push_back(i);
    return out;
}

}  // namespace

SplitIndices stratified_split(std::span<const int> labels, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("split ratio must lie in (0, 1)");
    if (labels.empty()) throw EmptyInput("cannot split an empty label vector");
    SplitIndices out;
    for (auto& [label, rows] : rows_by_class(labels)) {
        if (rows.size() < 2)
            throw StratificationError("class " + std::to_string(label) + " has a single row");
        Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(label)}));
        rng.shuffle(rows);
        const auto want = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(rows.size())));
        const std::size_t n_train = std::clamp<std::size_t>(want, 1, rows.size() - 1);
        out.train.insert(out.train.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
        out.test.insert(out.test.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

TrainTest stratified_split(const FeatureMatrix& m, double ratio, std::uint64_t seed) {
    const auto s = stratified_split(m.labels(), ratio, seed);
    return {m.select_rows(s.train), m.select_rows(s.test)};
}

std::size_t FoldPlan::rows() const {
    std::size_t n = 0;
    for (const auto& f : folds) n += f.size();
    return n;
}

std::vector<std::size_t> FoldPlan::training_rows(std::size_t f) const {
    std::vector<std::size_t> out;
    for (std::size_t g = 0; g < folds.size(); ++g)
        if (g != f) out.insert(out.end(), folds[g].begin(), folds[g].end());
    std::sort(out.begin(), out.end());
    return out;
}

void FoldPlan::validate(std::size_t n) const {
    if (folds.size() != k) throw FoldError("plan holds a different number of folds than k");
    std::vector<char> seen(n, 0);
    for (const auto& f : folds)
        for (auto r : f) {
            if (r >= n) throw FoldError("fold row index out of range");
            if (seen[r]) throw FoldError("row " + std::to_string(r) + " appears in two folds");
            seen[r] = 1;
        }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw FoldError("folds do not cover every row");
}

FoldPlan kfold_plan(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
    const std::size_t n = labels.size();
    if (k < 2) throw FoldError("k must be at least 2");
    if (k > n) throw FoldError("k=" + std::to_string(k) + " exceeds the row count " + std::to_string(n));
    auto classes = rows_by_class(labels);
    for (const auto& [label, rows] : classes)
        if (rows.size() < k)
            throw FoldError("class " + std::to_string(label) + " has " + std::to_string(rows.size()) +
                            " rows, fewer than k=" + std::to_string(k));
    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.folds.assign(k, {});
    std::size_t position = 0;
    for (auto& [label, rows] : classes) {
        Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(label)}));
        rng.shuffle(rows);
        for (auto r : rows) plan.folds[position++ % k].push_back(r);
    }
    for (auto& f : plan.folds) std::sort(f.begin(), f.end());
    return plan;
}

FoldPlan kfold_plan(const FeatureMatrix& m, std::size_t k, std::uint64_t seed) {
    return kfold_plan(m.labels(), k, seed);
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
    if (other.n_ != n_) throw SchemaError("confusion matrices differ in size");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::size_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0}); }

std::size_t ConfusionMatrix::trace() const {
    std::size_t t = 0;
    for (std::size_t c = 0; c < n_; ++c) t += at(c, c);
    return t;
}

std::string ConfusionMatrix::to_csv(std::span<const std::string_view> names) const {
    auto name = [&](std::size_t c) { return c < names.size() ? std::string(names[c]) : std::to_string(c); };
    std::ostringstream out;
    out << "truth\\predicted";
    for (std::size_t c = 0; c < n_; ++c) out << ',' << name(c);
    out << '\n';
    for (std::size_t t = 0; t < n_; ++t) {
        out << name(t);
        for (std::size_t p = 0; p < n_; ++p) out << ',' << at(t, p);
        out << '\n';
    }
    return out.str();
}

ConfusionMatrix ConfusionMatrix::from(std::span<const int> truth, std::span<const int> predicted, std::size_t classes) {
    if (truth.size() != predicted.size()) throw SchemaError("truth and prediction lengths differ");
    ConfusionMatrix cm(classes);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || predicted[i] < 0 || static_cast<std::size_t>(truth[i]) >= classes ||
            static_cast<std::size_t>(predicted[i]) >= classes)
            throw SchemaError("label outside the confusion matrix");
        cm.add(static_cast<std::size_t>(truth[i]), static_cast<std::size_t>(predicted[i]));
    }
    return cm;
}

namespace {
double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }
}  // namespace

ClassMetrics class_metrics(const ConfusionMatrix& cm, std::size_t c) {
    double tp = static_cast<double>(cm.at(c, c)), row = 0.0, col = 0.0;
    for (std::size_t j = 0; j < cm.classes(); ++j) {
        row += static_cast<double>(cm.at(c, j));
        col += static_cast<double>(cm.at(j, c));
    }
    const double fn = row - tp, fp = col - tp;
    const double tn = static_cast<double>(cm.total()) - tp - fn - fp;
    ClassMetrics m;
    m.precision = ratio(tp, tp + fp);
    m.recall = ratio(tp, tp + fn);
    m.specificity = ratio(tn, tn + fp);
    m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
    return m;
}

MetricSet compute_metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw EmptyInput("confusion matrix is empty");
    MetricSet m;
    m.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
    const auto C = static_cast<double>(cm.classes());
    for (std::size_t c = 0; c < cm.classes(); ++c) {
        const auto k = class_metrics(cm, c);
        m.precision += k.precision / C;
        m.recall += k.recall / C;
        m.specificity += k.specificity / C;
    }
    m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
    return m;
}

double auc_binary(std::span<const double> scores, std::span<const std::uint8_t> positive) {
    if (scores.size() != positive.size()) throw SchemaError("score and label lengths differ");
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    // Sum of midranks of the positives.
    double rank_sum = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t)
            if (positive[order[t]]) {
                rank_sum += midrank;
                ++n_pos;
            }
        i = j;
    }
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw EmptyInput("AUC needs both positives and negatives");
    const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
    return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

AucResult auc_ovr(const std::vector<std::vector<double>>& scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw SchemaError("score and label counts differ");
    if (scores.empty()) throw EmptyInput("no rows to score");
    const std::size_t C = scores.front().size();
    AucResult out;
    double sum = 0.0;
    std::size_t used = 0;
    std::vector<double> s(scores.size());
    std::vector<std::uint8_t> pos(scores.size());
    for (std::size_t c = 0; c < C; ++c) {
        std::size_t n_pos = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (scores[i].size() != C) throw SchemaError("ragged score rows");
            s[i] = scores[i][c];
            pos[i] = static_cast<std::size_t>(labels[i]) == c;
            n_pos += pos[i];
        }
        if (n_pos == 0 || n_pos == scores.size()) {
            out.excluded.push_back(c);
            continue;
        }
        sum += auc_binary(s, pos);
        ++used;
    }
    if (used == 0) throw EmptyInput("no class has both positives and negatives");
    out.auc = sum / static_cast<double>(used);
    return out;
}

namespace {

nlohmann::json metrics_json(const MetricSet& m) {
    return {{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall},
            {"specificity", m.specificity}, {"f1", m.f1}, {"auc", m.auc}};
}

}  // namespace

std::string RunResult::to_json() const {
    nlohmann::json folds_j = nlohmann::json::array();
    for (const auto& f : folds) folds_j.push_back(metrics_json(f));
    nlohmann::json cm = nlohmann::json::array();
    for (std::size_t t = 0; t < confusion.classes(); ++t) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t p = 0; p < confusion.classes(); ++p) row.push_back(confusion.at(t, p));
        cm.push_back(row);
    }
    nlohmann::json doc = {{"folds", folds_j}, {"mean", metrics_json(mean)}, {"sd", metrics_json(sd)},
                          {"confusion", cm},  {"fold_columns", fold_columns}, {"warnings", warnings}};
    return doc.dump(2) + "\n";
}

void summarize_folds(RunResult& r) {
    auto field = [&](double MetricSet::*f) {
        std::vector<double> v;
        for (const auto& m : r.folds) v.push_back(m.*f);
        const auto s = aggregate_mean_sd(v);
        r.mean.*f = s.mean;
        r.sd.*f = s.sd;
    };
    for (auto f : {&MetricSet::accuracy, &MetricSet::precision, &MetricSet::recall, &MetricSet::specificity,
                   &MetricSet::f1, &MetricSet::auc})
        field(f);
}

namespace {

MetricSet evaluate_fold(const LearnerSpec& spec, const FeatureMatrix& train, const FeatureMatrix& test,
                        ConfusionMatrix& total, std::vector<std::string>& warnings, std::size_t fold) {
    const auto model = fit(spec, train);
    const auto scores = predict_scores(model, test);
    std::vector<int> predicted;
    predicted.reserve(scores.size());
    for (const auto& s : scores) predicted.push_back(argmax(s));
    const auto cm = ConfusionMatrix::from(test.labels(), predicted, static_cast<std::size_t>(test.n_classes()));
    total.merge(cm);
    MetricSet m = compute_metrics(cm);
    const auto auc = auc_ovr(scores, test.labels());
    m.auc = auc.auc;
    for (auto c : auc.excluded)
        warnings.push_back("fold " + std::to_string(fold) + ": class " + std::to_string(c) +
                           " excluded from AUC (no positives or no negatives)");
    return m;
}

}  // namespace

RunResult cross_validate(const LearnerSpec& spec, const FeatureMatrix& m, const FoldPlan& plan,
                         const std::vector<std::vector<std::size_t>>* fold_columns) {
    plan.validate(m.rows());
    if (fold_columns && fold_columns->size() != plan.k) throw FoldError("one column selection per fold required");
    RunResult r;
    r.confusion = ConfusionMatrix(static_cast<std::size_t>(m.n_classes()));
    for (std::size_t f = 0; f < plan.k; ++f) {
        try {
            FeatureMatrix train = m.select_rows(plan.training_rows(f));
            FeatureMatrix test = m.select_rows(plan.folds[f]);
            if (fold_columns) {
                train = train.select_columns((*fold_columns)[f]);
                test = test.select_columns((*fold_columns)[f]);
                r.fold_columns.push_back(train.column_names());
            }
            LearnerSpec fold_spec = spec;
            fold_spec.seed = derive_seed(spec.seed, {f});
            r.folds.push_back(evaluate_fold(fold_spec, train, test, r.confusion, r.warnings, f));
        } catch (const Error& e) {
            std::throw_with_nested(FoldFailure(f, e.what()));
        }
    }
    summarize_folds(r);
    return r;
}

RunResult holdout_evaluate(const LearnerSpec& spec, const FeatureMatrix& m, double ratio, std::uint64_t seed) {
    const auto split = stratified_split(m, ratio, seed);
    RunResult r;
    r.confusion = ConfusionMatrix(static_cast<std::size_t>(m.n_classes()));
    r.folds.push_back(evaluate_fold(spec, split.train, split.test, r.confusion, r.warnings, 0));
    summarize_folds(r);
    return r;
}

}  // namespace bcbench
