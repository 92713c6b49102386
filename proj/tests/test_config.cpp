#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "qrwr/config.hpp"

using namespace qrwr;

namespace {

std::string config_error_of(const std::string& text, std::vector<std::string> sets = {}) {
    try {
        parse_config(text, sets);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

const char* full_text = R"(; a complete scenario
[background]
temperature_k = 5000
frequency_hz = 2e10
mode_count = 4
total = 1e4
variance = poisson

[signal]
mu = 0.003
modes = 50

[link]
eta_det = 0.7
eta_idler = 0.9
rcs_m2 = 5
detector_area_m2 = 0.02

[atmosphere]
good = 10:0.99, 100:0.9, 300:0.5
bad = 50:0.3

[detection]
protocol = sp
p_err = 0.01
trials = 1000
form = exact
undetectable_threshold = 1e8

[efficiency]
mode = direct
range_km = 60
weather = bad
eta_t = 0.001
eta_r = 1e-9
eta_anc = 0.5

[scenario]
ranges_km = 10, 20, 40
weathers = bad

[sweep]
x = n_b
x_min = 1
x_max = 1e6
x_points = 7
x_scale = log
y = eta_anc
y_min = 0
y_max = 1
y_points = 5
y_scale = linear
quantity = snr_radar
workers = 2

[mc]
experiment = erfc
seed = 42
shots = 5000
trials_per_shot = 3
threshold_rule = optimal
snr_grid = 2, 8
workers = 2
)";

}  // namespace

TEST(Config, EmptyFileGivesDefaults) {
    const auto c = parse_config("");
    EXPECT_EQ(c, ScenarioConfig{});
    EXPECT_EQ(c.link.eta_det, 0.5);
    EXPECT_EQ(c.link.rcs_m2, 2.0);
    EXPECT_EQ(c.link.detector_area_m2, 0.01);
    EXPECT_EQ(c.background.temperature_k, 6273.0);
    EXPECT_EQ(c.p_err, 0.0455);
    EXPECT_EQ(c.protocol, Protocol::QiGaussian);
    EXPECT_EQ(c.link.eta_idler, 0.8);
    EXPECT_EQ(c.signal.total(), 0.01);
}

TEST(Config, FullFileParsed) {
    const auto c = parse_config(full_text);
    EXPECT_EQ(c.background.mode_count, 4);
    EXPECT_EQ(*c.background.occupancy_override, 2500.0);
    EXPECT_EQ(c.background.variance_model, VarianceModel::Poisson);
    EXPECT_EQ(c.signal, (SignalModel{0.003, 50}));
    EXPECT_EQ(c.link.atmosphere.good.size(), 3u);
    EXPECT_EQ(c.link.atmosphere.bad[0].transmission, 0.3);
    EXPECT_EQ(c.protocol, Protocol::QiSinglePhoton);
    EXPECT_EQ(c.form, SnrForm::Exact);
    EXPECT_EQ(c.efficiency, EfficiencySource::Direct);
    EXPECT_EQ(c.weather, Weather::Bad);
    EXPECT_EQ(c.ranges_km, (std::vector<double>{10, 20, 40}));
    EXPECT_EQ(c.weathers, (std::vector<Weather>{Weather::Bad}));
    EXPECT_EQ(c.sweep_y, (Axis{"eta_anc", 0.0, 1.0, 5, AxisScale::Linear}));
    EXPECT_EQ(c.sweep_quantity, Quantity::SnrRadar);
    EXPECT_EQ(c.mc.experiment, McExperiment::Erfc);
    EXPECT_EQ(c.mc.seed, 42u);
    EXPECT_EQ(c.mc.threshold_rule, ThresholdRule::Optimal);
    EXPECT_EQ(c.mc.snr_grid, (std::vector<double>{2, 8}));
}

TEST(Config, RoundTrip) {
    for (const std::string text : {std::string(""), std::string(full_text)}) {
        const auto c = parse_config(text);
        const auto again = parse_config(serialize(c));
        EXPECT_EQ(again, c);
        EXPECT_EQ(serialize(again), serialize(c));
    }
}

TEST(Config, RoundTripKeepsAwkwardNumbers) {
    ScenarioConfig c;
    c.signal.mu = 0.1 + 0.2;
    c.eta_r = 1.0 / 3.0 * 1e-9;
    c.efficiency = EfficiencySource::Direct;
    EXPECT_EQ(parse_config(serialize(c)), c);
}

TEST(Config, HashIgnoresOrdering) {
    const auto a = parse_config("[signal]\nmu = 0.001\nmodes = 10\n[detection]\np_err = 0.01\n");
    const auto b = parse_config("[detection]\np_err=0.01\n\n[signal]\nmodes=10\nmu=1e-3\n");
    EXPECT_EQ(a, b);
    EXPECT_EQ(config_hash(a), config_hash(b));
    EXPECT_NE(config_hash(a), config_hash(ScenarioConfig{}));
}

TEST(Config, DuplicateKeyRejected) {
    const auto msg = config_error_of("[signal]\nmu = 0.1\nmu = 0.2\n");
    EXPECT_NE(msg.find("duplicate"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
    EXPECT_FALSE(config_error_of("[signal]\nmu = 0.1\n[signal]\nmodes = 3\n").empty());
}

TEST(Config, UnknownKeyReportsLine) {
    const auto msg = config_error_of("[link]\neta_det = 0.5\nrcs = 2\n");
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[link] rcs"), std::string::npos) << msg;
    EXPECT_NE(msg.find("unknown key"), std::string::npos) << msg;
}

TEST(Config, UnknownSectionAndStrayKey) {
    EXPECT_NE(config_error_of("[radar]\nx = 1\n").find("unknown section"), std::string::npos);
    EXPECT_NE(config_error_of("mu = 1\n").find("outside any section"), std::string::npos);
}

TEST(Config, TypeMismatch) {
    const auto msg = config_error_of("\n[detection]\np_err = two sigma\n");
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("expected a finite number"), std::string::npos) << msg;
    EXPECT_NE(config_error_of("[signal]\nmodes = 2.5\n").find("integer"), std::string::npos);
    EXPECT_NE(config_error_of("[detection]\nprotocol = qi\n").find("one of"), std::string::npos);
    EXPECT_FALSE(config_error_of("[signal]\nmu = 1e-3x\n").empty());
    EXPECT_FALSE(config_error_of("[signal]\nmu = inf\n").empty());
    EXPECT_FALSE(config_error_of("[atmosphere]\ngood = 25=0.9\n").empty());
}

TEST(Config, OutOfRangeValues) {
    EXPECT_NE(config_error_of("[detection]\np_err = 0.7\n").find("[detection]"), std::string::npos);
    EXPECT_FALSE(config_error_of("[link]\neta_det = 1.5\n").empty());
    EXPECT_FALSE(config_error_of("[background]\ntemperature_k = -1\n").empty());
    EXPECT_FALSE(config_error_of("[atmosphere]\ngood = 25:0.5, 10:0.9\n").empty());
    EXPECT_FALSE(config_error_of("[scenario]\nranges_km = 50, 25\n").empty());
    EXPECT_FALSE(config_error_of("[sweep]\nx = eta_bogus\n").empty());
    EXPECT_FALSE(config_error_of("[sweep]\nx = eta_ratio\n").empty());  // same as y
    EXPECT_FALSE(config_error_of("[mc]\nsnr_grid = 1, 0\n").empty());
    EXPECT_FALSE(config_error_of("[mc]\nshots = 0\n").empty());
}

TEST(Config, ConflictingTotals) {
    EXPECT_FALSE(config_error_of("[background]\noccupancy = 3\ntotal = 5\n").empty());
    EXPECT_FALSE(config_error_of("[signal]\nmu = 3\ntotal = 5\n").empty());
    EXPECT_EQ(parse_config("[signal]\nmodes = 4\ntotal = 2\n").signal.mu, 0.5);
}

TEST(Config, Overrides) {
    const std::vector<std::string> sets{"detection.protocol=sp", "signal.mu = 0.02"};
    const auto c = parse_config("[detection]\nprotocol = gs\n", sets);
    EXPECT_EQ(c.protocol, Protocol::QiSinglePhoton);
    EXPECT_EQ(c.signal.mu, 0.02);
    EXPECT_FALSE(config_error_of("", {"detection.bogus=1"}).empty());
    EXPECT_FALSE(config_error_of("", {"no_dot=1"}).empty());
    EXPECT_FALSE(config_error_of("", {"signal.mu"}).empty());
}

TEST(Config, CommentsAndBlankLines) {
    const auto c = parse_config("; top\n# hash comment\n\n[signal]\n  mu = 0.5  \n");
    EXPECT_EQ(c.signal.mu, 0.5);
    EXPECT_NO_THROW(parse_config("[mc]\n"));
}

TEST(Config, LinkModeUsesTheBudget) {
    const auto c = parse_config("[efficiency]\nrange_km = 200\nweather = bad\n");
    const auto e = compose_efficiencies(link_factors(200.0, Weather::Bad, LinkParameters{}));
    const auto op = c.operating_point();
    EXPECT_EQ(op.eta_t, e.eta_t);
    EXPECT_EQ(op.eta_r, e.eta_r);
    EXPECT_EQ(op.eta_anc, e.eta_anc);
    EXPECT_DOUBLE_EQ(op.resolved_eta_r() / op.eta_t, e.ratio);
}

TEST(Config, McConfigPicksEfficiencyByExperiment) {
    auto c = parse_config("[efficiency]\nmode = direct\neta_t = 0.1\neta_r = 0.2\neta_anc = 0.3\n");
    EXPECT_EQ(c.mc_config().efficiency, 0.1);
    c.mc.experiment = McExperiment::SinglePhoton;
    EXPECT_EQ(c.mc_config().efficiency, 0.2);
    EXPECT_EQ(c.mc_config().ancilla_efficiency, 0.3);
}

TEST(Config, MissingFile) { EXPECT_THROW(load_config("/nonexistent/qrwr.ini"), ConfigError); }
