#pragma once

#include "bcbench/datamodel.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace bcbench {

// Row-major numeric matrix where NaN marks a missing cell.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    bool missing(std::size_t r, std::size_t c) const;
    std::size_t missing_count() const;
};

struct ColumnImputation {
    std::string column;
    std::size_t missing_before = 0;
    std::size_t filled_by_session = 0;
    std::size_t filled_by_knn = 0;
};

struct ImputationReport {
    std::vector<ColumnImputation> columns;
    std::size_t k = 0;
    // Euclidean distance over z-scored columns, restricted to dimensions seen
    // in both rows and rescaled by total/shared dimensions.
    std::string distance = "zscore-euclidean-partial-v1";

    std::string to_json() const;
};

// Pairwise distance used by the k-NN step. `scale` holds per-column
// (mean, sd) used for z-scoring; infinity when the rows share no observed
// dimension.
struct PartialDistance {
    std::vector<double> mean;
    std::vector<double> sd;

    static PartialDistance fit(const DenseMatrix& m);
    double operator()(const DenseMatrix& m, std::size_t a, std::size_t b) const;
};

// Indices of the k rows nearest to `row` among rows with column `col`
// observed, ordered by (distance, row index).
std::vector<std::size_t> nearest_observed(const DenseMatrix& m, std::span<const double> distances_from_row, std::size_t row,
                                          std::size_t col, std::size_t k);

struct KnnResult {
    DenseMatrix matrix;
    ImputationReport report;
};

// Replaces each missing cell with the mean of its column over the k nearest
// rows (by PartialDistance on the input snapshot) that observe the column.
// Throws InvalidK for k == 0, InsufficientNeighbors when a column with a
// missing cell has fewer than k observed rows.
KnnResult knn_impute(const DenseMatrix& m, std::size_t k, std::span<const std::string> column_names = {});

// Session-local fill: a missing environment value takes the value of the
// temporally nearest record in the same session that observes it, earlier
// record on ties. Returns per-column fill counts (column order of
// env_columns()).
std::vector<std::size_t> fill_within_session(std::vector<BehaviorRecord>& records);

struct ImputeOptions {
    std::size_t k = 14;
    bool session_fill = true;
};

struct RecordImputation {
    std::vector<BehaviorRecord> records;
    ImputationReport report;
};

// Full pipeline on records: session fill, then k-NN. Numeric environment
// columns take the neighbor mean; categorical ones take the most frequent
// level among the same neighbors (lowest level on ties). Distances use the
// numeric environment columns only.
RecordImputation impute_records(std::vector<BehaviorRecord> records, const ImputeOptions& options = {});

}  // namespace bcbench
