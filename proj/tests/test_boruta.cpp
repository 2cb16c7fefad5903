#include "bcbench/boruta.hpp"
#include "bcbench/error.hpp"
#include "bcbench/eval.hpp"
#include "bcbench/matrix.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <algorithm>

using namespace bcbench;

namespace {

BorutaConfig fast_config(std::uint64_t seed) {
    BorutaConfig c;
    c.max_runs = 40;
    c.forest.n_trees = 60;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("planted signal is confirmed and noise is not") {
    const auto m = fixture::blobs(60, 3, 3, 2.0, 31, 6);
    const auto report = boruta_select(m, fast_config(1));
    REQUIRE(report.features.size() == 9);
    for (std::size_t i = 0; i < 3; ++i) CHECK(report.features[i].decision == BorutaDecision::confirmed);
    std::size_t noise_confirmed = 0;
    for (std::size_t i = 3; i < 9; ++i) noise_confirmed += report.features[i].decision == BorutaDecision::confirmed;
    CHECK(noise_confirmed == 0);
    CHECK(report.count(BorutaDecision::confirmed) + report.count(BorutaDecision::tentative) +
              report.count(BorutaDecision::rejected) ==
          9);
    CHECK(selected_columns(report, false) == std::vector<std::size_t>{0, 1, 2});
    CHECK(report.runs.size() <= 40);
    for (const auto& f : report.features) {
        CHECK(f.hits <= f.runs);
        if (f.decision != BorutaDecision::tentative) CHECK(f.decided_at_run.has_value());
    }
}

TEST_CASE("Boruta is deterministic in its seed") {
    const auto m = fixture::blobs(40, 2, 2, 1.0, 32, 4);
    CHECK(boruta_select(m, fast_config(5)).to_json() == boruta_select(m, fast_config(5)).to_json());
}

TEST_CASE("empty selections are reported, not silently applied") {
    const auto m = fixture::blobs(20, 2, 1, 2.0, 33, 2);
    BorutaReport r;
    for (const auto& n : m.column_names()) r.features.push_back({n, BorutaDecision::rejected, 0, 1, 1, 0.0});
    CHECK_THROWS_AS(apply_selection(m, r, true), EmptySelection);
    r.features[1].decision = BorutaDecision::tentative;
    CHECK_THROWS_AS(apply_selection(m, r, false), EmptySelection);
    CHECK(apply_selection(m, r, true).column_names() == std::vector<std::string>{"noise0"});
    r.features.pop_back();
    CHECK_THROWS_AS(apply_selection(m, r, true), SchemaError);

    // Inside a fold an empty selection falls back to the most frequent hitters.
    const auto noise = fixture::blobs(30, 2, 0, 0.0, 34, 5);
    auto cfg = fast_config(2);
    cfg.max_runs = 12;
    const auto sel = select_in_fold(noise, cfg, false);
    CHECK(!sel.columns.empty());
    if (sel.confirmed == 0) CHECK(sel.fallback);
    CHECK(sel.confirmed + sel.tentative + sel.rejected == 5);
}

TEST_CASE("bad inputs and settings") {
    const FeatureMatrix one_class({"a", "b"}, 3, {1, 2, 3, 4, 5, 6}, {0, 0, 0}, 2);
    CHECK_THROWS_AS(boruta_select(one_class, fast_config(1)), InvalidLabels);
    const FeatureMatrix narrow({"a"}, 2, {1, 2}, {0, 1}, 2);
    CHECK_THROWS_AS(boruta_select(narrow, fast_config(1)), EmptyInput);
    auto c = fast_config(1);
    c.alpha = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.alpha = 0.01;
    c.max_runs = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("selection sees only the training rows of its fold") {
    // "leak" equals the label on the held-out fold and is noise elsewhere.
    Rng rng(35);
    const std::size_t n = 120;
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % 2);
    const auto plan = kfold_plan(labels, 4, 36);
    std::vector<bool> held(n, false);
    for (auto r : plan.folds[0]) held[r] = true;
    std::vector<double> values;
    for (std::size_t i = 0; i < n; ++i) {
        values.push_back(labels[i] + rng.normal(0.0, 0.3));  // genuine signal
        values.push_back(held[i] ? labels[i] * 10.0 : rng.normal());
        values.push_back(rng.normal());
    }
    const FeatureMatrix m({"signal", "leak", "noise"}, n, values, labels, 2);
    const auto train = m.select_rows(plan.training_rows(0));
    const auto sel = select_in_fold(train, fast_config(3), false);
    CHECK(std::find(sel.columns.begin(), sel.columns.end(), 0) != sel.columns.end());
    CHECK(std::find(sel.columns.begin(), sel.columns.end(), 1) == sel.columns.end());
    // On all rows the leak survives the contest, which is the failure the
    // per-fold selection exists to avoid.
    const auto full = boruta_select(m, fast_config(3));
    CHECK(full.features[1].decision != BorutaDecision::rejected);
}

namespace {

FeatureMatrix label_plus_noise(std::uint64_t seed, bool duplicate_signal) {
    Rng rng(seed);
    const std::size_t n = 292, noise = 30;
    std::vector<std::string> names{"label_copy"};
    if (duplicate_signal) names.push_back("label_copy_2");
    for (std::size_t i = 0; i < noise; ++i) names.push_back("noise" + std::to_string(i));
    std::vector<double> values;
    std::vector<int> labels;
    for (std::size_t r = 0; r < n; ++r) {
        const int y = static_cast<int>(rng.index(3));
        labels.push_back(y);
        values.push_back(y);
        if (duplicate_signal) values.push_back(y);
        for (std::size_t i = 0; i < noise; ++i) values.push_back(rng.normal());
    }
    return {names, n, values, labels, 3};
}

}  // namespace

TEST_CASE("a copy of the label is confirmed across seeds") {
    std::size_t confirmed = 0;
    for (std::uint64_t s = 1; s <= 20; ++s) {
        BorutaConfig c;
        c.seed = s;
        c.forest.n_trees = 30;
        confirmed += boruta_select(label_plus_noise(100 + s, false), c).features[0].decision == BorutaDecision::confirmed;
    }
    CHECK(confirmed >= 19);
}

TEST_CASE("rejected features leave the contest for good") {
    const auto m = fixture::blobs(60, 2, 2, 1.5, 37, 8);
    const auto r = boruta_select(m, fast_config(4));
    for (std::size_t f = 0; f < r.features.size(); ++f) {
        const auto& feat = r.features[f];
        std::size_t tested = 0;
        for (const auto& run : r.runs) {
            const bool in = std::find(run.tested.begin(), run.tested.end(), f) != run.tested.end();
            tested += in;
            if (feat.decided_at_run && run.run > *feat.decided_at_run) CHECK_FALSE(in);
        }
        CHECK(tested == feat.runs);
    }
    for (const auto& run : r.runs) CHECK(run.shadows == std::max<std::size_t>(run.tested.size(), 5));
}

TEST_CASE("duplicating a confirmed column never gets the original rejected") {
    for (std::uint64_t s = 1; s <= 5; ++s) {
        BorutaConfig c;
        c.seed = s;
        c.forest.n_trees = 30;
        const auto r = boruta_select(label_plus_noise(200 + s, true), c);
        CHECK(r.features[0].decision != BorutaDecision::rejected);
        CHECK(r.features[1].decision != BorutaDecision::rejected);
    }
}

TEST_CASE("decision names") {
    CHECK(to_string(BorutaDecision::confirmed) == "Confirmed");
    CHECK(to_string(BorutaDecision::tentative) == "Tentative");
    CHECK(to_string(BorutaDecision::rejected) == "Rejected");
}
