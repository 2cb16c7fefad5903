#include "bcbench/agreement.hpp"

#include "bcbench/error.hpp"

#include <map>

namespace bcbench {

double cohen_kappa(const RatingPair& pair) {
    const auto& a = pair.rater_a;
    const auto& b = pair.rater_b;
    if (a.size() != b.size()) throw SchemaError("raters scored different numbers of items");
    if (a.size() < 2) throw EmptyInput("kappa needs at least two rated items");
    const double n = static_cast<double>(a.size());

    std::map<std::string, std::pair<double, double>> marginals;
    double agree = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        agree += a[i] == b[i];
        marginals[a[i]].first += 1.0;
        marginals[b[i]].second += 1.0;
    }
    const double p_o = agree / n;
    double p_e = 0.0;
    for (const auto& [category, m] : marginals) p_e += (m.first / n) * (m.second / n);
    if (p_e >= 1.0) {
        if (p_o == 1.0) return 1.0;
        throw DegenerateAgreement("chance agreement is 1 but observed agreement is not");
    }
    return (p_o - p_e) / (1.0 - p_e);
}

double mean_pairwise_kappa(std::span<const std::vector<std::string>> raters) {
    if (raters.size() < 2) throw EmptyInput("need at least two raters");
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < raters.size(); ++i)
        for (std::size_t j = i + 1; j < raters.size(); ++j) {
            sum += cohen_kappa({raters[i], raters[j]});
            ++pairs;
        }
    return sum / static_cast<double>(pairs);
}

std::string_view interpret_kappa(double kappa) {
    if (kappa >= 1.0) return "perfect";
    if (kappa <= 0.0) return "poor";
    if (kappa <= 0.20) return "slight";
    if (kappa <= 0.40) return "fair";
    if (kappa <= 0.60) return "moderate";
    if (kappa <= 0.80) return "substantial";
    return "almost perfect";
}

}  // namespace bcbench
