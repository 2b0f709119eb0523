#include "soilest/error.hpp"
#include "soilest/scenario.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace soilest;
using nlohmann::json;
using soilest::test::TempDir;

TEST(Scenario, DefaultsDescribeTheSimulatedStudy) {
    const Scenario s;
    EXPECT_EQ(s.grid.build().size(), 6 * 40 * 22);
    EXPECT_EQ(horizon_seconds(s), 6 * 86400.0);
    EXPECT_EQ(s.simulation.dt_s, 720.0);
    EXPECT_EQ(s.filter.process_std, 1e-6);
    EXPECT_EQ(s.filter.measurement_std, 6e-2);
    EXPECT_EQ(s.filter.initial_mismatch, 0.2);
    EXPECT_TRUE(validation_issues(s).empty());
    const Forcing f = build_forcing(s);
    EXPECT_NEAR(f.irrigation.field_rate(3600.0), 3.6e-3 / 86400.0, 1e-22);
    EXPECT_EQ(f.irrigation.field_rate(9 * 3600.0), 0.0);
    EXPECT_NEAR(f.irrigation.field_rate(5 * 86400.0 + 60.0), 3.6e-3 / 86400.0, 1e-22);
}

TEST(Scenario, JsonRoundTrip) {
    Scenario s;
    s.seed = 123456789012345ULL;
    s.grid.n_r = 4;
    s.forcing.daily.reset();
    s.forcing.events.push_back({"2019-06-20", 12.0, 6.0, 4.0});
    s.model.bottom = BottomBoundary::no_flux;
    s.filter.transition = TransitionMode::first_order;
    s.soil.variogram = VariogramKind::spherical;
    const Scenario back = scenario_from_json(to_json(s));
    EXPECT_EQ(back, s);
    EXPECT_EQ(scenario_hash(back), scenario_hash(s));
    EXPECT_NE(scenario_hash(Scenario{}), scenario_hash(s));
}

TEST(Scenario, PartialDocumentKeepsDefaults) {
    const Scenario s = scenario_from_json(json::parse(R"({"grid": {"n_r": 4, "n_az": 8, "n_z": 10}})"));
    EXPECT_EQ(s.grid.n_az, 8);
    EXPECT_EQ(s.grid.radius_m, 50.0);
    EXPECT_EQ(s.filter.sigma0_m, 1e3);
}

TEST(Scenario, ReportsEveryProblem) {
    const json j = json::parse(R"({"grdi": {}, "grid": {"n_r": "four", "n_z": 0},
                                   "filter": {"measurement_std": -1}, "model": {"bottom": "leaky"}})");
    try {
        (void)scenario_from_json(j);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_GE(e.issues().size(), 5U);
        const std::string all = e.what();
        EXPECT_NE(all.find("grdi"), std::string::npos);
        EXPECT_NE(all.find("n_r"), std::string::npos);
        EXPECT_NE(all.find("bottom"), std::string::npos);
    }
}

TEST(Scenario, FileLoadResolvesRelativePaths) {
    TempDir dir;
    std::filesystem::create_directories(dir / "cfg");
    dir.write("cfg/s.json", R"({"soil": {"samples_csv": "samples.csv"}})");
    const Scenario s = load_scenario(dir / "cfg/s.json");
    EXPECT_EQ(std::filesystem::path(s.soil.samples_csv), dir / "cfg/samples.csv");
    EXPECT_THROW((void)load_scenario(dir / "nope.json"), IoError);
    dir.write("broken.json", "{ not json");
    EXPECT_THROW((void)load_scenario(dir / "broken.json"), ValidationError);

    Scenario saved;
    saved.seed = 9;
    save_scenario(dir / "saved.json", saved);
    EXPECT_EQ(load_scenario(dir / "saved.json"), saved);
}

TEST(Scenario, RngStreamsAreIndependentAndReproducible) {
    auto a = make_rng(1, rng_stream::measurement_noise);
    auto b = make_rng(1, rng_stream::measurement_noise);
    auto c = make_rng(1, rng_stream::process_noise);
    auto d = make_rng(2, rng_stream::measurement_noise);
    const auto va = a();
    EXPECT_EQ(va, b());
    EXPECT_NE(va, c());
    EXPECT_NE(va, d());
}

TEST(Scenario, DatedEventsUseTheirOwnWindow) {
    Scenario s;
    s.forcing.daily.reset();
    s.forcing.events.push_back({"2019-06-20", 8.0, 2.0, 4.0});
    const Forcing f = build_forcing(s);
    EXPECT_EQ(f.irrigation.field_rate(86400.0 + 3 * 3600.0), 8e-3 / (4 * 3600.0));
    EXPECT_EQ(f.irrigation.field_rate(86400.0 + 1 * 3600.0), 0.0);
    EXPECT_FALSE(season_irrigation_log().empty());
}
