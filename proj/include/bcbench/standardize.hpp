#pragma once

#include "bcbench/datamodel.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace bcbench {

// Column z-scoring fitted on training rows (n-1 SD; constant columns keep SD 1).
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> sd;

    static Standardizer fit(const FeatureMatrix& m) {
        Standardizer s;
        const std::size_t p = m.cols(), n = m.rows();
        s.mean.assign(p, 0.0);
        s.sd.assign(p, 1.0);
        for (std::size_t c = 0; c < p; ++c) {
            double sum = 0.0;
            for (std::size_t r = 0; r < n; ++r) sum += m.at(r, c);
            const double mu = n ? sum / static_cast<double>(n) : 0.0;
            double ss = 0.0;
            for (std::size_t r = 0; r < n; ++r) ss += (m.at(r, c) - mu) * (m.at(r, c) - mu);
            s.mean[c] = mu;
            if (n >= 2 && ss > 0.0) s.sd[c] = std::sqrt(ss / static_cast<double>(n - 1));
        }
        return s;
    }

    void apply(std::span<const double> row, std::span<double> out) const {
        for (std::size_t c = 0; c < row.size(); ++c) out[c] = (row[c] - mean[c]) / sd[c];
    }

    std::vector<double> apply(std::span<const double> row) const {
        std::vector<double> out(row.size());
        apply(row, out);
        return out;
    }

    // Row-major standardized copy of the whole matrix.
    std::vector<double> apply_all(const FeatureMatrix& m) const {
        std::vector<double> out(m.rows() * m.cols());
        for (std::size_t r = 0; r < m.rows(); ++r)
            apply(m.row(r), std::span<double>(out.data() + r * m.cols(), m.cols()));
        return out;
    }
};

}  // namespace bcbench
