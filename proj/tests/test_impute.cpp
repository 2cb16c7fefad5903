#include "bcbench/error.hpp"
#include "bcbench/impute.hpp"
#include "bcbench/random.hpp"
#include "bcbench/synth.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace bcbench;

namespace {

DenseMatrix masked_matrix(Rng& rng, std::size_t rows, std::size_t cols, double rate) {
    DenseMatrix m{rows, cols, std::vector<double>(rows * cols)};
    for (auto& v : m.values) v = rng.normal(0.0, 1.0);
    // Integer-valued columns create distance ties.
    for (std::size_t r = 0; r < rows; ++r) m.at(r, 0) = std::round(m.at(r, 0) * 2.0);
    for (auto& v : m.values)
        if (rng.bernoulli(rate)) v = std::numeric_limits<double>::quiet_NaN();
    return m;
}

}  // namespace

TEST_CASE("k-NN imputation matches the exhaustive oracle") {
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const auto m = masked_matrix(rng, 40 + rng.index(60), 3 + rng.index(5), 0.1);
        const auto got = knn_impute(m, 14);
        const auto want = oracle::knn_impute(m, 14);
        for (std::size_t i = 0; i < m.values.size(); ++i) CHECK(got.matrix.values[i] == doctest::Approx(want.values[i]).epsilon(1e-12));
        CHECK(got.matrix.missing_count() == 0);
    }
}

TEST_CASE("k-NN imputation never changes observed cells and reports fills") {
    Rng rng(3);
    const auto m = masked_matrix(rng, 50, 4, 0.15);
    const auto out = knn_impute(m, 5, std::vector<std::string>{"a", "b", "c", "d"});
    for (std::size_t i = 0; i < m.values.size(); ++i)
        if (!std::isnan(m.values[i])) CHECK(out.matrix.values[i] == m.values[i]);
    std::size_t filled = 0;
    for (const auto& c : out.report.columns) {
        CHECK(c.missing_before == c.filled_by_knn);
        filled += c.filled_by_knn;
    }
    CHECK(filled == m.missing_count());
    CHECK(out.report.columns[2].column == "c");
}

TEST_CASE("k-NN imputation error cases") {
    DenseMatrix m{3, 1, {1.0, std::numeric_limits<double>::quiet_NaN(), 2.0}};
    CHECK_THROWS_AS(knn_impute(m, 0), InvalidK);
    CHECK_THROWS_AS(knn_impute(m, 3), InsufficientNeighbors);
    CHECK(knn_impute(m, 2).matrix.at(1, 0) == 1.5);
}

TEST_CASE("partial distance rescales by shared dimensions") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    DenseMatrix m{2, 4, {0, 0, nan, 0, 1, 1, 5, nan}};
    PartialDistance d;
    d.mean.assign(4, 0.0);
    d.sd.assign(4, 1.0);
    CHECK(d(m, 0, 1) == doctest::Approx(std::sqrt(2.0 * 4.0 / 2.0)));
    DenseMatrix disjoint{2, 2, {1, nan, nan, 2}};
    d.sd.assign(2, 1.0);
    CHECK(std::isinf(d(disjoint, 0, 1)));
}

TEST_CASE("session fill copies the temporally nearest value within a session") {
    SynthConfig cfg;
    cfg.n_records = 40;
    auto records = generate(cfg);
    for (auto& r : records) r.session_id = "S";
    for (auto& r : records) r.env[EnvNumeric::temperature] = 20.0;
    records[0].env.stamp = {2020, 1, 1, 10, 0, 0};
    records[1].env.stamp = {2020, 1, 1, 10, 5, 0};
    records[2].env.stamp = {2020, 1, 1, 10, 9, 0};
    for (std::size_t i = 3; i < records.size(); ++i) records[i].session_id = "other";
    records[0].env[EnvNumeric::temperature] = 10.0;
    records[2].env[EnvNumeric::temperature] = 30.0;
    records[1].env[EnvNumeric::temperature].reset();
    const auto filled = fill_within_session(records);
    CHECK(records[1].env[EnvNumeric::temperature] == 30.0);
    std::size_t total = 0;
    for (auto f : filled) total += f;
    CHECK(total >= 1);
}

TEST_CASE("record imputation leaves no environment cell missing and keeps MACs as metadata") {
    SynthConfig cfg;
    cfg.seed = 21;
    auto records = generate(cfg);
    std::size_t missing = 0;
    for (const auto& r : records) missing += r.env.missing_count();
    REQUIRE(missing > 0);
    const auto before = records;
    const auto out = impute_records(records, {14, true});
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(out.records[i].env.missing_count() == 0);
        CHECK(out.records[i].env.beacon_mac == before[i].env.beacon_mac);
        CHECK(out.records[i].labels == before[i].labels);
    }
    std::size_t reported = 0;
    for (const auto& c : out.report.columns) {
        CHECK(c.filled_by_session + c.filled_by_knn == c.missing_before);
        reported += c.missing_before;
    }
    CHECK(reported == missing);
    CHECK_THROWS_AS(impute_records(records, {0, true}), InvalidK);
}
