#include "bcbench/datamodel.hpp"
#include "bcbench/error.hpp"
#include "bcbench/synth.hpp"

#include <doctest.h>

#include <cmath>

using namespace bcbench;

TEST_CASE("majors are the OR of their minors") {
    MinorCategoryFlags minor{};
    CHECK(majors_from_minors(minor) == MajorCategoryFlags{});
    minor[4] = 1;   // smiling -> facial expression
    minor[15] = 1;  // injurious -> non-communicative
    const auto major = majors_from_minors(minor);
    CHECK(major == MajorCategoryFlags{0, 1, 0, 0, 0, 1});
}

TEST_CASE("default label mapping keeps response and sends the rest to action-bearing classes") {
    const auto m = LabelMapping::defaults();
    CHECK(m.to_class3(Class7::response) == Class3::response);
    for (auto c : {Class7::calling, Class7::emotions, Class7::interest, Class7::negative, Class7::selecting,
                   Class7::physiological_response})
        CHECK(m.to_class3(c) != Class3::response);
    CHECK(m.to_class2(Class3::response_or_action) == Class2::action);
    CHECK(m.labels_for(Class7::response) == OutcomeLabels{Class7::response, Class3::response, Class2::response});
}

TEST_CASE("label mapping text overrides single entries and round-trips") {
    const auto m = LabelMapping::parse("# custom\ncalling = response\nresponse_or_action=response\n");
    CHECK(m.to_class3(Class7::calling) == Class3::response);
    CHECK(m.to_class2(Class3::response_or_action) == Class2::response);
    CHECK(m.to_class3(Class7::selecting) == Class3::action);
    const auto again = LabelMapping::parse(m.to_text());
    for (int c = 0; c < 7; ++c) CHECK(again.to_class3(Class7(c)) == m.to_class3(Class7(c)));
    CHECK_THROWS_AS(LabelMapping::parse("calling=nonsense"), Error);
}

TEST_CASE("label levels and class counts") {
    const OutcomeLabels l{Class7::selecting, Class3::action, Class2::action};
    CHECK(label_at_level(l, 7) == 5);
    CHECK(label_at_level(l, 3) == 1);
    CHECK(label_at_level(l, 2) == 1);
    CHECK_THROWS_AS(label_at_level(l, 4), ConfigError);
}

TEST_CASE("timestamps round-trip through epoch seconds") {
    for (const TimeStamp t : {TimeStamp{2019, 2, 28, 23, 59, 59}, TimeStamp{2020, 2, 29, 12, 0, 0},
                              TimeStamp{1970, 1, 1, 0, 0, 0}, TimeStamp{2021, 12, 31, 6, 30, 5}})
        CHECK(TimeStamp::from_epoch_seconds(t.epoch_seconds()) == t);
    CHECK(TimeStamp{1970, 1, 2, 0, 0, 0}.epoch_seconds() == 86400);
    CHECK_THROWS(TimeStamp{2019, 2, 29, 0, 0, 0}.validate());
    CHECK(season_for_month(3) == Season::spring);
    CHECK(season_for_month(8) == Season::summer);
    CHECK(season_for_month(11) == Season::autumn);
    CHECK(season_for_month(1) == Season::winter);
}

TEST_CASE("MAC addresses format and parse") {
    const MacAddress mac{0xAC, 0x23, 0x3F, 0x00, 0x10, 0x0B};
    CHECK(format_mac(mac) == "AC:23:3F:00:10:0B");
    CHECK(parse_mac("ac:23:3f:00:10:0b") == mac);
    CHECK_THROWS(parse_mac("AC:23:3F:00:10"));
}

TEST_CASE("environment ranges reject impossible values") {
    EnvironmentSnapshot env;
    env[EnvNumeric::humidity] = 55.0;
    CHECK_NOTHROW(env.validate());
    env[EnvNumeric::humidity] = 130.0;
    CHECK_THROWS_AS(env.validate(), RangeError);
}

TEST_CASE("categorical encoding gives a code column and sorted indicators") {
    RawColumn col{"beacon", true, {}, {std::string("desk"), std::nullopt, std::string("corridor")}};
    RawColumn num{"rssi", false, {-60.0, -70.0, NAN}, {}};
    const std::vector<RawColumn> cols{col, num};
    const auto enc = encode_columns(cols);
    REQUIRE(enc.names == std::vector<std::string>{"beacon", "beacon=corridor", "beacon=desk", "rssi"});
    CHECK(enc.columns[0][0] == 1.0);
    CHECK(std::isnan(enc.columns[0][1]));
    CHECK(enc.columns[1][2] == 1.0);
    CHECK(enc.columns[2][2] == 0.0);
    CHECK(std::isnan(enc.columns[3][2]));
    CHECK_THROWS_AS(encode_columns(cols, {false, false}), ConfigError);
}

TEST_CASE("combinations include exactly their feature groups") {
    SynthConfig cfg;
    cfg.n_records = 60;
    cfg.missingness = {0, 0, 0, 0, 0, 0, 0, 0};
    const auto records = generate(cfg);
    std::size_t widths[6];
    for (auto combo : kAllCombos) {
        const auto m = build_combination(records, combo, 3);
        widths[static_cast<int>(combo)] = m.cols();
        CHECK(m.rows() == 60);
        CHECK(m.n_classes() == 3);
        const bool has_env = m.column_index("temperature").has_value();
        CHECK(has_env == combo_has_env(combo));
        CHECK(m.column_index("major_vocalization").has_value() == combo_has_major(combo));
        CHECK(m.column_index("minor_gazing").has_value() == combo_has_minor(combo));
        CHECK(m.column_index("gender").has_value());
        CHECK_FALSE(m.column_index("beacon_mac").has_value());
    }
    CHECK(widths[1] == 2 + 6);
    CHECK(widths[3] == 2 + 16);
    CHECK(widths[5] == 2 + 6 + 16);
    CHECK(widths[0] - widths[1] == widths[2] - widths[3]);
    CHECK(combo_behavior_variant(ComboId::a) == 0);
    CHECK(combo_behavior_variant(ComboId::d) == 1);
    CHECK(combo_behavior_variant(ComboId::f) == 2);
}

TEST_CASE("feature matrix row and column selection") {
    FeatureMatrix m({"x", "y"}, 3, {1, 2, 3, 4, 5, 6}, {0, 1, 0}, 2);
    const std::vector<std::size_t> rows{2, 0};
    const auto r = m.select_rows(rows);
    CHECK(r.at(0, 1) == 6);
    CHECK(r.labels() == std::vector<int>{0, 0});
    const std::vector<std::size_t> cols{1};
    const auto c = m.select_columns(cols);
    CHECK(c.column_names() == std::vector<std::string>{"y"});
    CHECK(c.column(0) == std::vector<double>{2, 4, 6});
}

TEST_CASE("record validation catches schema problems") {
    SynthConfig cfg;
    cfg.n_records = 30;
    auto records = generate(cfg);
    CHECK_NOTHROW(validate_records(records));
    auto bad = records;
    bad[3].child_id = 21;
    CHECK_THROWS_AS(validate_records(bad), SchemaError);
    bad = records;
    bad[4].record_id = bad[5].record_id;
    CHECK_THROWS_AS(validate_records(bad), SchemaError);
    bad = records;
    bad[0].major = MajorCategoryFlags{};
    bad[0].minor[0] = 1;
    CHECK_THROWS(validate_records(bad));
}
