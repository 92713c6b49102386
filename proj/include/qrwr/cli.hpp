#ifndef QRWR_CLI_HPP
#define QRWR_CLI_HPP

#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "qrwr/config.hpp"
#include "qrwr/detection.hpp"
#include "qrwr/errors.hpp"
#include "qrwr/io.hpp"
#include "qrwr/mc_oracle.hpp"
#include "qrwr/selfcheck.hpp"
#include "qrwr/sweep.hpp"

namespace qrwr {

// Exit statuses.
inline constexpr int exit_ok = 0;
inline constexpr int exit_domain_error = 1;
inline constexpr int exit_config_error = 2;

namespace detail {

struct CliOptions {
    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> sets;
};

inline ScenarioConfig resolve_config(const CliOptions& o) {
    ScenarioConfig c = o.config_path.empty() ? parse_config("", o.sets) : load_config(o.config_path, o.sets);
    if (o.seed) c.mc.seed = *o.seed;
    return c;
}

/// Writes `text` to `path`, or to `out` when no path was given.
inline void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError(path, "cannot open output file for writing");
    f << text;
    if (!f) throw ConfigError(path, "write failed");
}

inline nlohmann::json efficiency_json(const OperatingPoint& op) {
    return {{"eta_t", op.eta_t}, {"eta_r", op.resolved_eta_r()}, {"eta_anc", op.eta_anc}};
}

inline std::string cmd_snr(const ScenarioConfig& c, std::optional<double> trials) {
    OperatingPoint op = c.operating_point();
    if (trials) op.trials = *trials;
    const auto target = detect(Protocol::TargetDirect, op.trials, op.target_channel());
    const auto radar = detect(op.radar_protocol, op.trials, op.radar_channel());
    ResultEnvelope env{"snr", config_hash(c)};
    env.payload = {{"target", to_json(target)},
                   {"radar", to_json(radar)},
                   {"efficiencies", efficiency_json(op)},
                   {"n_s", op.resolved_signal().total()},
                   {"background_variance", background_variance(op.resolved_background())},
                   {"form", to_string(op.target_form)}};
    return env.dump();
}

inline std::string cmd_perr(const ScenarioConfig& c, std::optional<double> snr_value, std::optional<double> p) {
    if (snr_value.has_value() == p.has_value()) throw ConfigError("perr", "give exactly one of --snr or --p-err");
    ResultEnvelope env{"perr", config_hash(c)};
    if (snr_value)
        env.payload = {{"snr", *snr_value}, {"p_err", error_probability(*snr_value)}};
    else
        env.payload = {{"p_err", *p}, {"required_snr", required_snr(*p)}};
    return env.dump();
}

inline std::string cmd_rm(const ScenarioConfig& c) {
    const OperatingPoint op = c.operating_point();
    const RmResult r = op.rm();
    ResultEnvelope env{"rm", config_hash(c)};
    env.payload = to_json(r);
    env.payload["protocol"] = to_string(op.radar_protocol);
    env.payload["p_err"] = op.p_err;
    env.payload["efficiencies"] = efficiency_json(op);
    env.payload["n_s"] = op.resolved_signal().total();
    env.payload["n_b"] = background_counts(op.resolved_background());
    return env.dump();
}

inline void cmd_sweep(const ScenarioConfig& c, const std::string& out_path, std::ostream& out) {
    const SweepSpec spec = c.sweep_spec();
    const SweepResult r = sweep_grid(spec, c.sweep_workers);
    std::ostringstream csv;
    write_sweep_csv(csv, r);
    emit(out_path, csv.str(), out);
    if (out_path.empty()) return;

    std::size_t infeasible = 0;
    for (const auto& n : r.grid) infeasible += n.feasible ? 0 : 1;
    ResultEnvelope env{"sweep", config_hash(c)};
    env.payload = {{"x", to_json(r.x)},
                   {"y", to_json(r.y)},
                   {"quantity", to_string(r.quantity)},
                   {"protocol", to_string(spec.fixed.radar_protocol)},
                   {"scenario_hash", hex64(r.scenario_hash)},
                   {"nodes", r.grid.size()},
                   {"infeasible_nodes", infeasible},
                   {"csv", out_path}};
    if (r.quantity == Quantity::Rm) env.payload["rm_unity_contour"] = to_json(contour_rm_unity(spec));
    emit(out_path + ".json", env.dump(), out);
}

inline void cmd_scenario(const ScenarioConfig& c, const std::string& out_path, std::ostream& out) {
    std::vector<ScenarioLine> lines;
    for (Weather w : c.weathers)
        lines.push_back(scenario_line(c.ranges_km, w, c.link, c.background, c.protocol, c.signal, c.p_err,
                                      c.undetectable_threshold));
    std::ostringstream csv;
    write_scenario_csv(csv, lines);
    emit(out_path, csv.str(), out);
    if (out_path.empty()) return;

    nlohmann::json rows = nlohmann::json::array();
    for (const auto& line : lines)
        for (const auto& p : line.points) {
            auto row = to_json(p.rm);
            row["range_km"] = p.range_km;
            row["weather"] = to_string(p.weather);
            row["eta_anc"] = p.eta_anc;
            rows.push_back(row);
        }
    ResultEnvelope env{"scenario", config_hash(c)};
    env.payload = {{"protocol", to_string(c.protocol)},
                   {"n_s", c.signal.total()},
                   {"n_b", background_counts(c.background)},
                   {"p_err", c.p_err},
                   {"rows", rows},
                   {"csv", out_path}};
    emit(out_path + ".json", env.dump(), out);
}

inline std::string cmd_mc(const ScenarioConfig& c) {
    const McConfig cfg = c.mc_config();
    ResultEnvelope env{"mc", config_hash(c)};
    env.payload = {{"experiment", to_string(c.mc.experiment)},
                   {"seed", cfg.seed},
                   {"shots", cfg.shots},
                   {"trials_per_shot", cfg.trials_per_shot},
                   {"threshold_rule", to_string(cfg.threshold_rule)}};
    switch (c.mc.experiment) {
        case McExperiment::Direct: env.payload["report"] = to_json(simulate_direct_detection(cfg)); break;
        case McExperiment::SinglePhoton: {
            env.payload["report"] = to_json(simulate_sp_covariance(cfg));
            const auto model = sp_model_prediction(cfg);
            env.payload["pair_model"] = {{"covariance", model.covariance}, {"snr", model.snr}};
            break;
        }
        case McExperiment::Erfc: {
            nlohmann::json reps = nlohmann::json::array();
            const auto out = validate_erfc(c.mc.snr_grid, cfg);
            for (std::size_t i = 0; i < out.size(); ++i) {
                auto j = to_json(out[i]);
                j["configured_snr"] = c.mc.snr_grid[i];
                reps.push_back(j);
            }
            env.payload["reports"] = reps;
            break;
        }
    }
    return env.dump();
}

inline int cmd_selfcheck(const ScenarioConfig& c, bool quick, const std::string& out_path, std::ostream& out) {
    const auto results = run_selfcheck(!quick);
    bool all = true;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : results) {
        all = all && r.pass;
        out << (r.pass ? "PASS" : "FAIL") << "  [" << r.id << "] " << r.name << ": " << r.detail << '\n';
        arr.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
    }
    if (!out_path.empty()) {
        ResultEnvelope env{"selfcheck", config_hash(c)};
        env.payload = {{"checks", arr}, {"all_pass", all}};
        emit(out_path, env.dump(), out);
    }
    return all ? exit_ok : exit_domain_error;
}

}  // namespace detail

/// Runs one command line (without the program name). Results go to `out`,
/// diagnostics to `err`. Returns 0 on success, 1 on a domain error, 2 on a
/// config or usage error.
inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Quantum-illumination radar warning receiver calculator", "qrwr"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(engine_version));

    detail::CliOptions o;
    app.add_option("--config", o.config_path, "Scenario INI file")->check(CLI::ExistingFile);
    app.add_option("--out", o.out_path, "Output file (sweep/scenario: CSV, plus <out>.json)");
    app.add_option("--seed", o.seed, "Monte Carlo seed");
    app.add_option("--set", o.sets, "Override a config value: section.key=value")->take_all();

    std::optional<double> trials;
    auto* snr_cmd = app.add_subcommand("snr", "SNR of the target and the radar at the configured point");
    snr_cmd->add_option("--trials", trials, "K, overriding [detection] trials");

    std::optional<double> snr_value;
    std::optional<double> p_value;
    auto* perr_cmd = app.add_subcommand("perr", "Error probability for an SNR, or the SNR for an error");
    perr_cmd->add_option("--snr", snr_value, "SNR to map to P_err");
    perr_cmd->add_option("--p-err", p_value, "P_err to invert");

    auto* rm_cmd = app.add_subcommand("rm", "R_M = K_target / K_radar at the configured point");
    auto* sweep_cmd = app.add_subcommand("sweep", "Grid sweep to CSV");
    auto* scenario_cmd = app.add_subcommand("scenario", "Range and weather lines to CSV");
    auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo experiment from [mc]");
    bool quick = false;
    auto* selfcheck_cmd = app.add_subcommand("selfcheck", "Built-in reference checks");
    selfcheck_cmd->add_flag("--quick", quick, "Skip the Monte Carlo check");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_config_error;
    }

    try {
        const ScenarioConfig c = detail::resolve_config(o);
        if (snr_cmd->parsed()) detail::emit(o.out_path, detail::cmd_snr(c, trials), out);
        else if (perr_cmd->parsed()) detail::emit(o.out_path, detail::cmd_perr(c, snr_value, p_value), out);
        else if (rm_cmd->parsed()) detail::emit(o.out_path, detail::cmd_rm(c), out);
        else if (sweep_cmd->parsed()) detail::cmd_sweep(c, o.out_path, out);
        else if (scenario_cmd->parsed()) detail::cmd_scenario(c, o.out_path, out);
        else if (mc_cmd->parsed()) detail::emit(o.out_path, detail::cmd_mc(c), out);
        else if (selfcheck_cmd->parsed()) return detail::cmd_selfcheck(c, quick, o.out_path, out);
        return exit_ok;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config_error;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << '\n';
        return exit_domain_error;
    }
}

}  // namespace qrwr

#endif  // QRWR_CLI_HPP
