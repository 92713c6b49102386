#ifndef QRWR_CONFIG_HPP
#define QRWR_CONFIG_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "qrwr/background.hpp"
#include "qrwr/detection.hpp"
#include "qrwr/errors.hpp"
#include "qrwr/hash.hpp"
#include "qrwr/linkbudget.hpp"
#include "qrwr/mc_oracle.hpp"
#include "qrwr/sweep.hpp"

namespace qrwr {

// Scenario files are INI: [section] headers, `key = value` lines, `;` or `#`
// comments on their own line. Every key is optional; anything not listed in
// config_keys() is rejected.

enum class EfficiencySource { Link, Direct };

inline std::string_view to_string(EfficiencySource s) { return s == EfficiencySource::Link ? "link" : "direct"; }

enum class McExperiment { Direct, SinglePhoton, Erfc };

inline std::string_view to_string(McExperiment e) {
    switch (e) {
        case McExperiment::Direct: return "direct";
        case McExperiment::SinglePhoton: return "sp";
        case McExperiment::Erfc: return "erfc";
    }
    return "?";
}

struct McSection {
    McExperiment experiment = McExperiment::Direct;
    std::uint64_t seed = 1;
    long shots = 100000;
    long trials_per_shot = 1;
    ThresholdRule threshold_rule = ThresholdRule::Midpoint;
    std::vector<double> snr_grid{1.0, 4.0, 8.0, 16.0};
    unsigned workers = 1;

    bool operator==(const McSection&) const = default;
};

struct ScenarioConfig {
    RadiationBackground background{};
    SignalModel signal{};
    LinkParameters link{};

    Protocol protocol = Protocol::QiGaussian;
    double p_err = constants::two_sigma_p_err;
    double trials = 1.0;
    SnrForm form = SnrForm::Approximate;
    double undetectable_threshold = default_undetectable_threshold;

    // Where eta_T, eta_R and eta_anc come from for snr/rm/mc: the link budget
    // at (range_km, weather), or the three values given directly.
    EfficiencySource efficiency = EfficiencySource::Link;
    double range_km = 25.0;
    Weather weather = Weather::Good;
    double eta_t = 1.0e-4;
    double eta_r = 1.0e-8;
    double eta_anc = 0.8;

    std::vector<double> ranges_km{25.0, 50.0, 75.0, 100.0, 125.0, 150.0, 175.0, 200.0};
    std::vector<Weather> weathers{Weather::Good, Weather::Bad};

    Axis sweep_x{"n_s", 1e-4, 10.0, 41};
    Axis sweep_y{"eta_ratio", 1e-8, 1.0, 41};
    Quantity sweep_quantity = Quantity::Rm;
    unsigned sweep_workers = 1;

    McSection mc{};

    bool operator==(const ScenarioConfig&) const = default;

    EfficiencyTriple efficiencies() const {
        if (efficiency == EfficiencySource::Direct) return {eta_t, eta_r, eta_anc};
        const auto c = compose_efficiencies(link_factors(range_km, weather, link));
        return {c.eta_t, c.eta_r, c.eta_anc};
    }

    OperatingPoint operating_point() const {
        const auto e = efficiencies();
        OperatingPoint op;
        op.radar_protocol = protocol;
        op.signal = signal;
        op.background = background;
        op.eta_t = e.eta_t;
        op.eta_r = e.eta_r;
        op.eta_anc = e.eta_anc;
        op.p_err = p_err;
        op.trials = trials;
        op.target_form = form;
        op.undetectable_threshold = undetectable_threshold;
        return op;
    }

    SweepSpec sweep_spec() const { return {sweep_x, sweep_y, operating_point(), sweep_quantity}; }

    McConfig mc_config() const {
        const auto e = efficiencies();
        McConfig c;
        c.seed = mc.seed;
        c.shots = mc.shots;
        c.trials_per_shot = mc.trials_per_shot;
        c.signal = signal;
        c.background = background;
        c.efficiency = mc.experiment == McExperiment::SinglePhoton ? e.eta_r : e.eta_t;
        c.ancilla_efficiency = e.eta_anc;
        c.threshold_rule = mc.threshold_rule;
        c.workers = mc.workers;
        return c;
    }
};

/// Accepted keys per section.
inline const std::map<std::string, std::set<std::string>, std::less<>>& config_keys() {
    static const std::map<std::string, std::set<std::string>, std::less<>> keys{
        {"background", {"temperature_k", "frequency_hz", "mode_count", "occupancy", "total", "variance"}},
        {"signal", {"mu", "modes", "total"}},
        {"link", {"eta_det", "eta_idler", "rcs_m2", "detector_area_m2"}},
        {"atmosphere", {"good", "bad"}},
        {"detection", {"protocol", "p_err", "trials", "form", "undetectable_threshold"}},
        {"efficiency", {"mode", "range_km", "weather", "eta_t", "eta_r", "eta_anc"}},
        {"scenario", {"ranges_km", "weathers"}},
        {"sweep",
         {"x", "x_min", "x_max", "x_points", "x_scale", "y", "y_min", "y_max", "y_points", "y_scale", "quantity",
          "workers"}},
        {"mc", {"experiment", "seed", "shots", "trials_per_shot", "threshold_rule", "snr_grid", "workers"}},
    };
    return keys;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// 1-based line of `key` inside `[section]`, 0 if not found.
inline int find_key_line(std::string_view text, std::string_view section, std::string_view key) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::string current;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        const auto t = trim(line);
        if (t.empty() || t.front() == ';' || t.front() == '#') continue;
        if (t.front() == '[') {
            const auto close = t.find(']');
            current = std::string(trim(t.substr(1, close == std::string_view::npos ? t.size() - 1 : close - 1)));
            continue;
        }
        const auto eq = t.find('=');
        if (current == section && trim(t.substr(0, eq)) == key) return n;
    }
    return 0;
}

class Reader {
public:
    Reader(std::string_view text, const boost::property_tree::ptree& tree) : text_(text), tree_(tree) {}

    std::string where(std::string_view section, std::string_view key) const {
        std::string w = "[" + std::string(section) + "] " + std::string(key);
        if (const int line = find_key_line(text_, section, key); line > 0) w = "line " + std::to_string(line) + ": " + w;
        return w;
    }

    std::optional<std::string> raw(std::string_view section, std::string_view key) const {
        const auto sec = tree_.find(std::string(section));
        if (sec == tree_.not_found()) return std::nullopt;
        const auto it = sec->second.find(std::string(key));
        if (it == sec->second.not_found()) return std::nullopt;
        return std::string(trim(it->second.data()));
    }

    double number(std::string_view section, std::string_view key, std::string_view text) const {
        double v = 0.0;
        const auto t = trim(text);
        const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(v))
            throw ConfigError(where(section, key), "expected a finite number, got '" + std::string(t) + "'");
        return v;
    }

    void get(std::string_view section, std::string_view key, double& out) const {
        if (auto r = raw(section, key)) out = number(section, key, *r);
    }

    template <class Int>
    void get_integer(std::string_view section, std::string_view key, Int& out, double lo, double hi) const {
        if (auto r = raw(section, key)) {
            const double v = number(section, key, *r);
            if (v != std::floor(v) || v < lo || v > hi)
                throw ConfigError(where(section, key), "expected an integer in [" + format(lo) + ", " + format(hi) +
                                                           "], got '" + *r + "'");
            out = static_cast<Int>(v);
        }
    }

    void get_list(std::string_view section, std::string_view key, std::vector<double>& out) const {
        if (auto r = raw(section, key)) {
            out.clear();
            for (const auto& item : split(*r)) out.push_back(number(section, key, item));
        }
    }

    template <class Enum, std::size_t N>
    Enum choice(std::string_view section, std::string_view key, std::string_view text,
                const std::pair<std::string_view, Enum> (&options)[N]) const {
        std::string allowed;
        for (const auto& [name, value] : options) {
            if (text == name) return value;
            allowed += (allowed.empty() ? "" : ", ") + std::string(name);
        }
        throw ConfigError(where(section, key), "expected one of {" + allowed + "}, got '" + std::string(text) + "'");
    }

    template <class Enum, std::size_t N>
    void get_choice(std::string_view section, std::string_view key, Enum& out,
                    const std::pair<std::string_view, Enum> (&options)[N]) const {
        if (auto r = raw(section, key)) out = choice(section, key, *r, options);
    }

    static std::vector<std::string> split(std::string_view s) {
        std::vector<std::string> items;
        while (true) {
            const auto comma = s.find(',');
            const auto item = trim(s.substr(0, comma));
            if (!item.empty()) items.emplace_back(item);
            if (comma == std::string_view::npos) break;
            s.remove_prefix(comma + 1);
        }
        return items;
    }

    static std::string format(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%g", v);
        return buf;
    }

private:
    std::string_view text_;
    const boost::property_tree::ptree& tree_;
};

inline constexpr std::pair<std::string_view, VarianceModel> variance_options[] = {
    {"thermal", VarianceModel::ThermalMultimode}, {"poisson", VarianceModel::Poisson}};
inline constexpr std::pair<std::string_view, Protocol> protocol_options[] = {
    {"gs", Protocol::QiGaussian}, {"sp", Protocol::QiSinglePhoton}, {"target", Protocol::TargetDirect}};
inline constexpr std::pair<std::string_view, SnrForm> form_options[] = {{"approximate", SnrForm::Approximate},
                                                                        {"exact", SnrForm::Exact}};
inline constexpr std::pair<std::string_view, EfficiencySource> source_options[] = {
    {"link", EfficiencySource::Link}, {"direct", EfficiencySource::Direct}};
inline constexpr std::pair<std::string_view, Weather> weather_options[] = {{"good", Weather::Good},
                                                                           {"bad", Weather::Bad}};
inline constexpr std::pair<std::string_view, AxisScale> scale_options[] = {{"log", AxisScale::Log},
                                                                           {"linear", AxisScale::Linear}};
inline constexpr std::pair<std::string_view, Quantity> quantity_options[] = {{"rm", Quantity::Rm},
                                                                             {"snr_target", Quantity::SnrTarget},
                                                                             {"snr_radar", Quantity::SnrRadar},
                                                                             {"perr", Quantity::Perr}};
inline constexpr std::pair<std::string_view, McExperiment> experiment_options[] = {
    {"direct", McExperiment::Direct}, {"sp", McExperiment::SinglePhoton}, {"erfc", McExperiment::Erfc}};
inline constexpr std::pair<std::string_view, ThresholdRule> rule_options[] = {
    {"midpoint", ThresholdRule::Midpoint}, {"optimal", ThresholdRule::Optimal}};

inline std::vector<AttenuationAnchor> parse_anchors(const Reader& r, std::string_view key, const std::string& text) {
    std::vector<AttenuationAnchor> out;
    for (const auto& item : Reader::split(text)) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw ConfigError(r.where("atmosphere", key), "expected 'range_km:transmission' pairs, got '" + item + "'");
        out.push_back({r.number("atmosphere", key, item.substr(0, colon)),
                       r.number("atmosphere", key, item.substr(colon + 1))});
    }
    return out;
}

inline void read_axis(const Reader& r, char prefix, Axis& axis) {
    const std::string p(1, prefix);
    if (auto name = r.raw("sweep", p)) axis.name = *name;
    r.get("sweep", p + "_min", axis.min);
    r.get("sweep", p + "_max", axis.max);
    r.get_integer("sweep", p + "_points", axis.points, 1, 100000);
    r.get_choice("sweep", p + "_scale", axis.scale, scale_options);
}

}  // namespace detail

/// Parses scenario text. `overrides` are "section.key=value" strings applied
/// on top of the file before validation. Throws ConfigError with the line
/// and key on any problem.
inline ScenarioConfig parse_config(std::string_view text, std::span<const std::string> overrides = {}) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in{std::string(text)};
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(e.line() > 0 ? "line " + std::to_string(e.line()) : "", e.message());
    }

    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        const auto dot = o.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq)
            throw ConfigError("--set " + o, "expected section.key=value");
        const std::string section(detail::trim(std::string_view(o).substr(0, dot)));
        const std::string key(detail::trim(std::string_view(o).substr(dot + 1, eq - dot - 1)));
        tree.put(pt::ptree::path_type(section + "/" + key, '/'), std::string(detail::trim(std::string_view(o).substr(eq + 1))));
    }

    const auto& known = config_keys();
    for (const auto& [section, body] : tree) {
        const auto sec = known.find(section);
        if (body.empty() && !body.data().empty()) throw ConfigError("", "key '" + section + "' outside any section");
        if (sec == known.end()) throw ConfigError("", "unknown section [" + section + "]");
        for (const auto& [key, value] : body) {
            if (!sec->second.contains(key)) {
                const int line = detail::find_key_line(text, section, key);
                throw ConfigError((line > 0 ? "line " + std::to_string(line) + ": " : std::string("--set: ")) + "[" +
                                      section + "] " + key,
                                  "unknown key");
            }
            if (!value.empty())
                throw ConfigError("[" + section + "] " + key, "nested keys are not supported");
        }
    }

    const detail::Reader r(text, tree);
    ScenarioConfig c;

    r.get("background", "temperature_k", c.background.temperature_k);
    r.get("background", "frequency_hz", c.background.frequency_hz);
    r.get_integer("background", "mode_count", c.background.mode_count, 1, 1e12);
    r.get_choice("background", "variance", c.background.variance_model, detail::variance_options);
    if (auto occ = r.raw("background", "occupancy")) c.background.occupancy_override = r.number("background", "occupancy", *occ);
    if (auto total = r.raw("background", "total")) {
        if (c.background.occupancy_override)
            throw ConfigError(r.where("background", "total"), "give either occupancy or total, not both");
        c.background.occupancy_override =
            r.number("background", "total", *total) / static_cast<double>(c.background.mode_count);
    }

    r.get("signal", "mu", c.signal.mu);
    r.get_integer("signal", "modes", c.signal.modes, 1, 1e12);
    if (auto total = r.raw("signal", "total")) {
        if (r.raw("signal", "mu")) throw ConfigError(r.where("signal", "total"), "give either mu or total, not both");
        c.signal.mu = r.number("signal", "total", *total) / static_cast<double>(c.signal.modes);
    }

    r.get("link", "eta_det", c.link.eta_det);
    r.get("link", "eta_idler", c.link.eta_idler);
    r.get("link", "rcs_m2", c.link.rcs_m2);
    r.get("link", "detector_area_m2", c.link.detector_area_m2);
    if (auto good = r.raw("atmosphere", "good")) c.link.atmosphere.good = detail::parse_anchors(r, "good", *good);
    if (auto bad = r.raw("atmosphere", "bad")) c.link.atmosphere.bad = detail::parse_anchors(r, "bad", *bad);

    r.get_choice("detection", "protocol", c.protocol, detail::protocol_options);
    r.get("detection", "p_err", c.p_err);
    r.get("detection", "trials", c.trials);
    r.get_choice("detection", "form", c.form, detail::form_options);
    r.get("detection", "undetectable_threshold", c.undetectable_threshold);

    r.get_choice("efficiency", "mode", c.efficiency, detail::source_options);
    r.get("efficiency", "range_km", c.range_km);
    r.get_choice("efficiency", "weather", c.weather, detail::weather_options);
    r.get("efficiency", "eta_t", c.eta_t);
    r.get("efficiency", "eta_r", c.eta_r);
    r.get("efficiency", "eta_anc", c.eta_anc);

    r.get_list("scenario", "ranges_km", c.ranges_km);
    if (auto ws = r.raw("scenario", "weathers")) {
        c.weathers.clear();
        for (const auto& w : detail::Reader::split(*ws))
            c.weathers.push_back(r.choice("scenario", "weathers", w, detail::weather_options));
    }

    detail::read_axis(r, 'x', c.sweep_x);
    detail::read_axis(r, 'y', c.sweep_y);
    r.get_choice("sweep", "quantity", c.sweep_quantity, detail::quantity_options);
    r.get_integer("sweep", "workers", c.sweep_workers, 1, 1024);

    r.get_choice("mc", "experiment", c.mc.experiment, detail::experiment_options);
    r.get_integer("mc", "seed", c.mc.seed, 0, 9007199254740992.0);
    r.get_integer("mc", "shots", c.mc.shots, 1, 1e10);
    r.get_integer("mc", "trials_per_shot", c.mc.trials_per_shot, 1, 1e10);
    r.get_choice("mc", "threshold_rule", c.mc.threshold_rule, detail::rule_options);
    r.get_list("mc", "snr_grid", c.mc.snr_grid);
    r.get_integer("mc", "workers", c.mc.workers, 1, 1024);

    // Range checks, reported against the section that owns the value.
    auto check = [](const char* where, auto&& fn) {
        try {
            fn();
        } catch (const DomainError& e) {
            throw ConfigError(where, e.what());
        }
    };
    check("[background]", [&] { c.background.validate(); });
    check("[signal]", [&] { c.signal.validate(); });
    check("[link]", [&] {
        detail::require(c.link.eta_det > 0.0 && c.link.eta_det <= 1.0, "eta_det must lie in (0, 1]");
        detail::require(c.link.eta_idler >= 0.0 && c.link.eta_idler <= 1.0, "eta_idler must lie in [0, 1]");
        detail::require(c.link.rcs_m2 > 0.0, "rcs_m2 must be > 0");
        detail::require(c.link.detector_area_m2 > 0.0, "detector_area_m2 must be > 0");
    });
    check("[atmosphere]", [&] { c.link.atmosphere.validate(); });
    check("[detection]", [&] {
        detail::require(c.p_err > 0.0 && c.p_err < 0.5, "p_err must lie in (0, 0.5)");
        detail::require(c.trials > 0.0, "trials must be > 0");
        detail::require(c.undetectable_threshold >= 1.0, "undetectable_threshold must be >= 1");
    });
    check("[efficiency]", [&] {
        detail::require(c.range_km >= 0.0, "range_km must be >= 0");
        for (double e : {c.eta_t, c.eta_r, c.eta_anc})
            detail::require(e >= 0.0 && e <= 1.0, "eta_t, eta_r and eta_anc must lie in [0, 1]");
    });
    check("[scenario]", [&] {
        for (std::size_t i = 0; i < c.ranges_km.size(); ++i) {
            detail::require(c.ranges_km[i] >= 0.0, "ranges_km must be >= 0");
            detail::require(i == 0 || c.ranges_km[i] > c.ranges_km[i - 1], "ranges_km must be strictly increasing");
        }
    });
    c.sweep_spec().validate();
    check("[mc]", [&] {
        for (double s : c.mc.snr_grid) detail::require(s > 0.0, "every snr_grid value must be > 0");
    });
    return c;
}

inline ScenarioConfig load_config(const std::string& path, std::span<const std::string> overrides = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open config file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), overrides);
}

/// Every field, in a fixed order, with round-trip number formatting. Parsing
/// the result yields an equal config.
inline std::string serialize(const ScenarioConfig& c) {
    auto num = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    auto list = [&](const std::vector<double>& xs) {
        std::string s;
        for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + num(xs[i]);
        return s;
    };
    auto anchors = [&](const std::vector<AttenuationAnchor>& as) {
        std::string s;
        for (std::size_t i = 0; i < as.size(); ++i)
            s += (i ? ", " : "") + num(as[i].range_km) + ":" + num(as[i].transmission);
        return s;
    };
    auto axis = [&](std::ostringstream& o, char p, const Axis& a) {
        o << p << " = " << a.name << '\n'
          << p << "_min = " << num(a.min) << '\n'
          << p << "_max = " << num(a.max) << '\n'
          << p << "_points = " << a.points << '\n'
          << p << "_scale = " << to_string(a.scale) << '\n';
    };

    std::ostringstream o;
    o << "[background]\n"
      << "temperature_k = " << num(c.background.temperature_k) << '\n'
      << "frequency_hz = " << num(c.background.frequency_hz) << '\n'
      << "mode_count = " << c.background.mode_count << '\n';
    if (c.background.occupancy_override) o << "occupancy = " << num(*c.background.occupancy_override) << '\n';
    o << "variance = " << to_string(c.background.variance_model) << "\n\n";

    o << "[signal]\nmu = " << num(c.signal.mu) << "\nmodes = " << c.signal.modes << "\n\n";

    o << "[link]\n"
      << "eta_det = " << num(c.link.eta_det) << '\n'
      << "eta_idler = " << num(c.link.eta_idler) << '\n'
      << "rcs_m2 = " << num(c.link.rcs_m2) << '\n'
      << "detector_area_m2 = " << num(c.link.detector_area_m2) << "\n\n";

    o << "[atmosphere]\ngood = " << anchors(c.link.atmosphere.good) << "\nbad = " << anchors(c.link.atmosphere.bad)
      << "\n\n";

    o << "[detection]\n"
      << "protocol = " << to_string(c.protocol) << '\n'
      << "p_err = " << num(c.p_err) << '\n'
      << "trials = " << num(c.trials) << '\n'
      << "form = " << to_string(c.form) << '\n'
      << "undetectable_threshold = " << num(c.undetectable_threshold) << "\n\n";

    o << "[efficiency]\n"
      << "mode = " << to_string(c.efficiency) << '\n'
      << "range_km = " << num(c.range_km) << '\n'
      << "weather = " << to_string(c.weather) << '\n'
      << "eta_t = " << num(c.eta_t) << '\n'
      << "eta_r = " << num(c.eta_r) << '\n'
      << "eta_anc = " << num(c.eta_anc) << "\n\n";

    o << "[scenario]\nranges_km = " << list(c.ranges_km) << "\nweathers = ";
    for (std::size_t i = 0; i < c.weathers.size(); ++i) o << (i ? ", " : "") << to_string(c.weathers[i]);
    o << "\n\n[sweep]\n";
    axis(o, 'x', c.sweep_x);
    axis(o, 'y', c.sweep_y);
    o << "quantity = " << to_string(c.sweep_quantity) << "\nworkers = " << c.sweep_workers << "\n\n";

    o << "[mc]\n"
      << "experiment = " << to_string(c.mc.experiment) << '\n'
      << "seed = " << c.mc.seed << '\n'
      << "shots = " << c.mc.shots << '\n'
      << "trials_per_shot = " << c.mc.trials_per_shot << '\n'
      << "threshold_rule = " << to_string(c.mc.threshold_rule) << '\n'
      << "snr_grid = " << list(c.mc.snr_grid) << '\n'
      << "workers = " << c.mc.workers << '\n';
    return o.str();
}

/// Hash of the canonical form, so reordering keys or sections in the source
/// file does not change it.
inline std::uint64_t config_hash(const ScenarioConfig& c) { return fnv1a64(serialize(c)); }

}  // namespace qrwr

#endif  // QRWR_CONFIG_HPP
