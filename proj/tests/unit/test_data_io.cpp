#include "soilest/data_io.hpp"
#include "soilest/error.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace soilest;
using soilest::test::TempDir;

TEST(Format, DoublesRoundTripExactly) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
        EXPECT_EQ(parse_double(format_double(v), "v"), v);
    }
    EXPECT_EQ(format_double(-0.0), "0");
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_THROW((void)parse_double("1.5x", "v"), ValidationError);
    EXPECT_THROW((void)parse_double("", "v"), ValidationError);
}

TEST(Iso8601, ParsesVariantsAsUtc) {
    EXPECT_EQ(parse_iso8601("1970-01-02"), 86400.0);
    EXPECT_EQ(parse_iso8601("2019-06-19T00:00:00Z"), 1560902400.0);
    EXPECT_EQ(parse_iso8601("2019-06-19 01:30"), 1560902400.0 + 5400.0);
    EXPECT_EQ(parse_iso8601("2019-06-19T02:00:00+02:00"), 1560902400.0);
    EXPECT_DOUBLE_EQ(parse_iso8601("2019-06-19T00:00:00.250Z"), 1560902400.25);
    EXPECT_EQ(format_iso8601(1560902400.0), "2019-06-19T00:00:00Z");
    EXPECT_THROW((void)parse_iso8601("2019-13-01"), ValidationError);
    EXPECT_THROW((void)parse_iso8601("19-06-2019"), ValidationError);
}

TEST(Csv, ParseAndWrite) {
    const CsvTable t = parse_csv("a,b\n1,2\n\n3,4\n");
    EXPECT_EQ(t.header, (std::vector<std::string>{"a", "b"}));
    ASSERT_EQ(t.rows.size(), 2U);
    EXPECT_EQ(t.lines[1], 4U);
    EXPECT_EQ(t.column("b"), 1U);
    EXPECT_THROW((void)t.column("c"), ValidationError);
    EXPECT_THROW((void)parse_csv("a,b\n1\n"), ValidationError);

    CsvWriter w({"x", "y"});
    const std::vector<double> row = {0.5, -2.0};
    w.add_row(row);
    EXPECT_EQ(w.str(), "x,y\n0.5,-2\n");
}

TEST(Files, AtomicWriteAndMissingFile) {
    TempDir dir;
    write_file_atomic(dir / "a.txt", "hello");
    EXPECT_EQ(read_file(dir / "a.txt"), "hello");
    write_file_atomic(dir / "a.txt", "again");
    EXPECT_EQ(read_file(dir / "a.txt"), "again");
    EXPECT_EQ(std::distance(std::filesystem::directory_iterator(dir.path()), {}), 1);
    EXPECT_THROW((void)read_file(dir / "missing.csv"), IoError);
}

TEST(Conversion, TensionAndHead) {
    EXPECT_NEAR(tension_to_head(9.80665), -1.0, 1e-15);
    EXPECT_EQ(tension_to_head(0.0), 0.0);
    EXPECT_NEAR(head_to_tension(tension_to_head(33.0)), 33.0, 1e-12);
    EXPECT_EQ(head_to_tension(0.2), 0.0);
    EXPECT_THROW((void)tension_to_head(-1.0), DomainError);
    EXPECT_THROW((void)tension_to_head(std::numeric_limits<double>::infinity()), DomainError);
}

TEST(Conversion, MinMaxNormalisation) {
    const std::vector<double> v = {2.0, 4.0, 3.0};
    const NormalizedSeries n = minmax_normalize(v);
    EXPECT_EQ(n.values, (std::vector<double>{0.0, 1.0, 0.5}));
    EXPECT_EQ(minmax_denormalize(n), v);
    const std::vector<double> c = {7.0, 7.0};
    const NormalizedSeries nc = minmax_normalize(c);
    EXPECT_EQ(nc.values, (std::vector<double>{0.5, 0.5}));
    EXPECT_FALSE(nc.warnings.empty());
    EXPECT_EQ(minmax_denormalize(nc), c);
}

TEST(SoilSamples, RoundTripAndReportsEveryBadRow) {
    TempDir dir;
    const std::vector<SoilSample> samples = {{{1.0, 2.0, 0.1}, loam()}, {{-3.0, 0.5, 0.4}, loam()}};
    save_soil_samples(dir / "s.csv", samples);
    const auto back = load_soil_samples(dir / "s.csv");
    ASSERT_EQ(back.size(), 2U);
    EXPECT_EQ(back[1].position.x, -3.0);
    EXPECT_EQ(back[1].params.n, loam().n);

    const auto bad = dir.write("bad.csv", "x_m,y_m,depth_m,theta_s,theta_r,K_s_m_per_s,alpha_per_m,n\n"
                                          "0,0,0.1,0.43,0.078,2.89e-6,3.6,0.9\n"
                                          "0,0,0.1,0.43,0.078,abc,3.6,1.5\n");
    try {
        (void)load_soil_samples(bad);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.issues().size(), 2U);
    }
}

TEST(Weather, DailyTotalsBecomeUniformRain) {
    TempDir dir;
    const auto p = dir.write("w.csv", "date,precipitation_mm\n2019-06-20,8.64\n2019-06-19,0\n");
    const auto weather = load_weather(p);
    ASSERT_EQ(weather.size(), 2U);
    const double start = parse_iso8601("2019-06-19");
    const IrrigationSchedule rain = rain_schedule(weather, start);
    ASSERT_EQ(rain.events().size(), 1U);
    EXPECT_EQ(rain.field_rate(86400.0 + 10.0), 8.64e-3 / 86400.0);
    EXPECT_EQ(rain.field_rate(10.0), 0.0);
}

TEST(SensorMap, ValidatesNodesAndDepthLabels) {
    TempDir dir;
    const CylindricalGrid grid(2, 2, 10, 10.0, 1.0); // layers 10 cm thick
    const Index top = grid.node_index(1, 0, 9);      // centre 5 cm below the surface
    const auto ok = dir.write("m.csv", "sensor_id,node_index,depth_cm\nA," + std::to_string(top) + ",5\n");
    const SensorMap map = load_sensor_map(ok, grid);
    EXPECT_EQ(map.nodes(), (std::vector<Index>{top}));

    const auto bad = dir.write("bad.csv", "sensor_id,node_index,depth_cm\nA," + std::to_string(top) +
                                              ",45\nB,999,5\nC," + std::to_string(top) + ",5\n");
    try {
        (void)load_sensor_map(bad, grid);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.issues().size(), 3U);
    }
}

TEST(Measurements, LoadDropsMissingValuesAndMapsSensors) {
    TempDir dir;
    const auto p = dir.write("y.csv", "timestamp,sensor_id,tension_kpa\n"
                                      "2019-06-19T00:12:00Z,A,9.80665\n"
                                      "2019-06-19T00:00:00Z,B,\n"
                                      "2019-06-19T00:00:00Z,Z,5\n"
                                      "2019-06-19T00:00:00Z,A,-3\n");
    const MeasurementLog log = load_measurements(p);
    EXPECT_EQ(log.records.size(), 2U);
    EXPECT_EQ(log.dropped_rows, 2);
    SensorMap map;
    map.entries["A"] = {7, 5};
    const ObservationSet obs = to_observations(log, map, parse_iso8601("2019-06-19"));
    ASSERT_EQ(obs.observations.size(), 1U);
    EXPECT_EQ(obs.unknown_sensor, 1);
    EXPECT_EQ(obs.observations[0].time_s, 720.0);
    EXPECT_NEAR(obs.observations[0].head_m, -1.0, 1e-15);

    save_measurements(dir / "out.csv", obs.observations, map, parse_iso8601("2019-06-19"));
    const MeasurementLog again = load_measurements(dir / "out.csv");
    ASSERT_EQ(again.records.size(), 1U);
    EXPECT_NEAR(again.records[0].tension_kpa, 9.80665, 1e-12);
}

TEST(Trajectories, RoundTripBitExact) {
    TempDir dir;
    Trajectory t;
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g(-1.0, 0.3);
    for (int k = 0; k < 3; ++k) {
        t.times.push_back(720.0 * k);
        Eigen::VectorXd x(5);
        for (int i = 0; i < 5; ++i) x(i) = g(rng);
        t.states.push_back(x);
    }
    save_trajectory(dir / "t.csv", t);
    const Trajectory back = load_trajectory(dir / "t.csv");
    EXPECT_EQ(back.times, t.times);
    for (int k = 0; k < 3; ++k) EXPECT_EQ(back.states[k], t.states[k]);
}

TEST(ParameterFiles, RoundTrip) {
    TempDir dir;
    const CylindricalGrid grid(2, 3, 2, 5.0, 0.4);
    ParameterField f = uniform_field(grid, loam());
    f[3].K_s = 1.234e-6;
    save_parameter_field(dir / "p.csv", grid, f);
    const ParameterField back = load_parameter_field(dir / "p.csv", grid);
    ASSERT_EQ(back.size(), f.size());
    EXPECT_EQ(back[3].K_s, 1.234e-6);
    EXPECT_THROW((void)load_parameter_field(dir / "p.csv", CylindricalGrid(3, 3, 2, 5.0, 0.4)), ValidationError);

    save_layout(dir / "l.csv", SensorLayout({5, 2}, grid.size()));
    EXPECT_EQ(load_layout(dir / "l.csv", grid.size()).nodes(), (std::vector<Index>{5, 2}));
}

TEST(Digest, Fnv1aReferenceValues) {
    EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(hex_digest(0xabcULL), "0000000000000abc");
}
