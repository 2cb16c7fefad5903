#include "bcbench/error.hpp"
#include "bcbench/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <set>

using namespace bcbench;

namespace {

std::size_t missing(const std::vector<BehaviorRecord>& rs, EnvNumeric f) {
    std::size_t n = 0;
    for (const auto& r : rs) n += !r.env[f].has_value();
    return n;
}

}  // namespace

TEST_CASE("default missingness matches the target counts") {
    const auto rs = generate(SynthConfig{});
    REQUIRE(rs.size() == 292);
    auto near = [](std::size_t got, long want) { return std::labs(static_cast<long>(got) - want) <= 1; };
    CHECK(near(missing(rs, EnvNumeric::beacon_rssi), 46));
    CHECK(near(missing(rs, EnvNumeric::uv_range), 98));
    CHECK(near(missing(rs, EnvNumeric::ambient_light), 53));
    CHECK(near(missing(rs, EnvNumeric::geomag_g1), 15));
    CHECK(near(missing(rs, EnvNumeric::geomag_ut1), 14));
    CHECK(near(missing(rs, EnvNumeric::temp_main), 14));
    CHECK(near(missing(rs, EnvNumeric::wind_direction), 35));
    // Grouped channels go missing together.
    CHECK(missing(rs, EnvNumeric::geomag_g2) == missing(rs, EnvNumeric::geomag_g1));
    CHECK(missing(rs, EnvNumeric::geomag_ut3) == missing(rs, EnvNumeric::geomag_ut1));
    for (const auto& r : rs) {
        CHECK(r.env[EnvNumeric::beacon_rssi].has_value() == r.env[EnvCategorical::beacon_name].has_value());
        if (!r.env[EnvNumeric::temp_main]) CHECK(!r.env[EnvNumeric::wind_direction]);
        CHECK(r.env.has_any_source());
    }
}

TEST_CASE("generation is deterministic and valid") {
    SynthConfig c;
    c.seed = 9;
    const auto a = generate(c), b = generate(c);
    CHECK(a == b);
    CHECK_NOTHROW(validate_records(a));
    c.seed = 10;
    CHECK(generate(c) != a);
    std::set<int> children;
    std::set<std::string> sessions;
    for (const auto& r : a) {
        children.insert(r.child_id);
        sessions.insert(r.session_id);
        CHECK(r.labels.class3 == map_class7_to_class3(r.labels.class7));
        CHECK(r.labels.class2 == map_class3_to_class2(r.labels.class3));
    }
    CHECK(children.size() == 20);
    CHECK(sessions.size() <= 100);
}

TEST_CASE("class quotas follow the configured distribution") {
    SynthConfig c;
    c.n_records = 100;
    c.class7_distribution = {0.5, 0.2, 0.1, 0.1, 0.05, 0.05, 0.0};
    const auto rs = generate(c);
    std::vector<std::size_t> n(7, 0);
    for (const auto& r : rs) ++n[static_cast<std::size_t>(r.labels.class7)];
    CHECK(n == std::vector<std::size_t>{50, 20, 10, 10, 5, 5, 0});
}

TEST_CASE("infeasible settings are rejected") {
    SynthConfig c;
    c.n_records = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = SynthConfig{};
    c.missingness.uv_range = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = SynthConfig{};
    c.class7_distribution[0] = -1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("environment signal moves the informative channel means") {
    SynthConfig c;
    c.n_records = 700;
    c.missingness = MissingnessProfile{0, 0, 0, 0, 0, 0, 0, 0};
    c.env_signal = 0.0;
    const auto flat = generate(c);
    c.env_signal = 1.0;
    const auto strong = generate(c);
    const auto ch = informative_env_channels().front();
    auto spread = [&](const std::vector<BehaviorRecord>& rs) {
        std::vector<double> sum(7, 0.0), cnt(7, 0.0);
        for (const auto& r : rs) {
            sum[static_cast<std::size_t>(r.labels.class7)] += *r.env[ch];
            cnt[static_cast<std::size_t>(r.labels.class7)] += 1.0;
        }
        double lo = INFINITY, hi = -INFINITY;
        for (std::size_t i = 0; i < 7; ++i) {
            lo = std::min(lo, sum[i] / cnt[i]);
            hi = std::max(hi, sum[i] / cnt[i]);
        }
        return hi - lo;
    };
    CHECK(spread(strong) > 2.0 * spread(flat));
}
