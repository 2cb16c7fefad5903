#pragma once

#include "bcbench/datamodel.hpp"
#include "bcbench/forest.hpp"
#include "bcbench/gbt.hpp"
#include "bcbench/mlp.hpp"
#include "bcbench/svm.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace bcbench {

// Numeric codes follow the analysis coding: XGB 1, SVM 2, RF 3, NN 4.
enum class LearnerKind { xgb = 1, svm = 2, rf = 3, nn = 4 };

inline constexpr std::array<LearnerKind, 4> kAllLearners{LearnerKind::xgb, LearnerKind::svm, LearnerKind::rf,
                                                         LearnerKind::nn};

std::string_view to_string(LearnerKind k);  // "xgb", "svm", "rf", "nn"
LearnerKind parse_learner(std::string_view s);  // case-insensitive; ConfigError

struct LearnerSpec {
    LearnerKind kind = LearnerKind::rf;
    ForestParams rf;
    GbtParams gbt;
    SvmParams svm;
    NnParams nn;
    std::uint64_t seed = 0;

    // ConfigError on invalid hyperparameters.
    void validate() const;
    // Hyperparameters of this kind as a flat JSON object string.
    std::string hyperparameters_json() const;
};

struct TrainedModel {
    LearnerKind kind = LearnerKind::rf;
    int n_classes = 0;
    int class_level = 0;
    std::vector<std::string> columns;
    std::variant<RandomForest, GbtModel, SvmModel, MlpModel> model;
};

// Throws InvalidLabels when fewer than two classes are present, NumericError
// on non-finite features.
TrainedModel fit(const LearnerSpec& spec, const FeatureMatrix& train);

// Throws SchemaError when the columns differ from the training signature.
std::vector<std::vector<double>> predict_scores(const TrainedModel& model, const FeatureMatrix& rows);
std::vector<double> predict_row_scores(const TrainedModel& model, std::span<const double> row);
std::vector<int> predict_labels(const TrainedModel& model, const FeatureMatrix& rows);
// Lowest index among the maxima.
int argmax(std::span<const double> scores);

// Versioned JSON document.
std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(std::string_view json);
void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

}  // namespace bcbench
