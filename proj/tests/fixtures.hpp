#pragma once

#include "bcbench/datamodel.hpp"
#include "bcbench/random.hpp"

#include <string>
#include <vector>

namespace fixture {

// Gaussian blobs, one per class, centers `spread` apart on a diagonal.
inline bcbench::FeatureMatrix blobs(std::size_t per_class, int classes, std::size_t dims, double spread,
                                    std::uint64_t seed, std::size_t noise_dims = 0) {
    bcbench::Rng rng(seed);
    std::vector<std::string> names;
    for (std::size_t d = 0; d < dims; ++d) names.push_back("x" + std::to_string(d));
    for (std::size_t d = 0; d < noise_dims; ++d) names.push_back("noise" + std::to_string(d));
    std::vector<double> values;
    std::vector<int> labels;
    for (std::size_t i = 0; i < per_class; ++i)
        for (int c = 0; c < classes; ++c) {
            for (std::size_t d = 0; d < dims; ++d)
                values.push_back(rng.normal(spread * static_cast<double>((c + static_cast<int>(d)) % classes), 1.0));
            for (std::size_t d = 0; d < noise_dims; ++d) values.push_back(rng.normal());
            labels.push_back(c);
        }
    return {names, per_class * static_cast<std::size_t>(classes), values, labels, classes};
}

inline bcbench::FeatureMatrix xor_points(std::size_t copies, double jitter, std::uint64_t seed) {
    bcbench::Rng rng(seed);
    std::vector<double> values;
    std::vector<int> labels;
    for (std::size_t i = 0; i < copies; ++i)
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                values.push_back(a + rng.normal(0.0, jitter));
                values.push_back(b + rng.normal(0.0, jitter));
                labels.push_back(a ^ b);
            }
    return {{"a", "b"}, copies * 4, values, labels, 2};
}

inline double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hit += predicted[i] == truth[i];
    return static_cast<double>(hit) / static_cast<double>(truth.size());
}

}  // namespace fixture
