#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bcbench {

// Two raters' category assignments for the same n items.
struct RatingPair {
    std::vector<std::string> rater_a;
    std::vector<std::string> rater_b;
};

// Cohen's kappa, (p_o - p_e) / (1 - p_e). When chance agreement is 1 (both
// raters constant on the same category) the raters agree perfectly and the
// result is 1. Throws EmptyInput for n < 2 and SchemaError on length mismatch.
double cohen_kappa(const RatingPair& pair);

// Mean of Cohen's kappa over every pair of raters.
double mean_pairwise_kappa(std::span<const std::vector<std::string>> raters);

// Landis-Koch style bands: poor, slight, fair, moderate, substantial,
// almost perfect, perfect.
std::string_view interpret_kappa(double kappa);

}  // namespace bcbench
