#include "bcbench/forest.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace bcbench;

TEST_CASE("binned matrix codes follow value order") {
    const FeatureMatrix m({"a", "b"}, 4, {3.0, 1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 1.0}, {0, 1, 0, 1}, 2);
    const BinnedMatrix b(m);
    CHECK(b.distinct(0) == 3);
    CHECK(b.distinct(1) == 1);
    CHECK(b.code(0, 0) == 2);
    CHECK(b.code(1, 0) == 0);
    CHECK(b.code(2, 0) == 1);
    CHECK(b.code(3, 0) == 0);
    const auto order = b.sorted_rows(0);
    CHECK(std::vector<std::uint32_t>(order.begin(), order.end()) == std::vector<std::uint32_t>{1, 3, 2, 0});
    CHECK(b.threshold(0, 0, 1) == 1.5);
}

TEST_CASE("bootstrap draws cover about 63.2% of rows") {
    const auto m = fixture::blobs(500, 2, 2, 2.0, 1);
    ForestParams p;
    p.n_trees = 200;
    const auto rf = RandomForest::fit(m, p, 11);
    const auto& cov = rf.bootstrap_coverage();
    REQUIRE(cov.size() == 200);
    const double mean = std::accumulate(cov.begin(), cov.end(), 0.0) / 200.0;
    CHECK(std::abs(mean - (1.0 - std::exp(-1.0))) < 0.005);
    for (std::size_t t = 0; t < 200; ++t)
        CHECK(rf.oob_rows()[t].size() == static_cast<std::size_t>(std::llround((1.0 - cov[t]) * 1000.0)));
}

TEST_CASE("a single unrestricted tree fits separable training data") {
    const auto m = fixture::blobs(50, 3, 2, 6.0, 2);
    const BinnedMatrix b(m);
    std::vector<std::uint32_t> sample(m.rows());
    std::iota(sample.begin(), sample.end(), 0u);
    Rng rng(3);
    std::vector<double> importance(m.cols(), 0.0);
    const auto tree = grow_classification_tree(b, m.labels(), 3, sample, {}, rng, &importance);
    for (std::size_t r = 0; r < m.rows(); ++r) CHECK(tree.predict(m.row(r)) == m.labels()[r]);
    CHECK(importance[0] + importance[1] > 0.0);
    // Gini of three balanced classes is 2/3; a pure tree removes all of it.
    CHECK(importance[0] + importance[1] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("tree depth limit and pure node") {
    const auto m = fixture::blobs(40, 2, 3, 1.0, 4);
    const BinnedMatrix b(m);
    std::vector<std::uint32_t> sample(m.rows());
    std::iota(sample.begin(), sample.end(), 0u);
    Rng rng(5);
    ClassificationTreeParams p;
    p.max_depth = 2;
    CHECK(grow_classification_tree(b, m.labels(), 2, sample, p, rng).depth() <= 2);

    const FeatureMatrix pure({"a"}, 3, {1.0, 2.0, 3.0}, {1, 1, 1}, 2);
    const BinnedMatrix pb(pure);
    const std::vector<std::uint32_t> all{0, 1, 2};
    const auto leaf = grow_classification_tree(pb, pure.labels(), 2, all, {}, rng);
    CHECK(leaf.nodes().size() == 1);
    CHECK(leaf.predict(pure.row(0)) == 1.0);
}

TEST_CASE("gradient tree leaf weight is -G/(H+lambda)") {
    const FeatureMatrix m({"a"}, 4, {0.0, 1.0, 2.0, 3.0}, {0, 0, 1, 1}, 2);
    const BinnedMatrix b(m);
    const std::vector<double> g{1.0, 1.0, -1.0, -1.0}, h{1.0, 1.0, 1.0, 1.0};
    GradientTreeParams p;
    p.max_depth = 1;
    p.lambda = 1.0;
    const auto t = grow_gradient_tree(b, g, h, p, 0.5);
    CHECK(t.predict(m.row(0)) == doctest::Approx(-0.5 * 2.0 / 3.0));
    CHECK(t.predict(m.row(3)) == doctest::Approx(0.5 * 2.0 / 3.0));
    GradientTreeParams stump = p;
    stump.gamma = 100.0;
    CHECK(grow_gradient_tree(b, g, h, stump, 1.0).nodes().size() == 1);
}

TEST_CASE("forest fit is deterministic in the seed") {
    const auto m = fixture::blobs(60, 3, 4, 1.5, 6);
    ForestParams p;
    p.n_trees = 30;
    const auto a = RandomForest::fit(m, p, 99), b = RandomForest::fit(m, p, 99);
    for (std::size_t r = 0; r < m.rows(); ++r) CHECK(a.predict_scores(m.row(r)) == b.predict_scores(m.row(r)));
    CHECK(a.oob_error(m) < 0.2);
    CHECK(default_mtry(75) == 8);
    CHECK(default_mtry(1) == 1);
}
