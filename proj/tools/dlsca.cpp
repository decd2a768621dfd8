/*
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dlsca/errors.hpp"
#include "dlsca/export.hpp"
#include "dlsca/scenario.hpp"

namespace {

using namespace dlsca;

struct CommonOptions {
    std::string config_path;
    std::string scenario_name;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int traces = 0;
    std::vector<std::string> countermeasures;
    bool svg = false;
};

void add_common(CLI::App *cmd, CommonOptions &opt) {
    cmd->add_option("--config", opt.config_path, "JSON config file");
    cmd->add_option("--scenario", opt.scenario_name,
                    "preset name (ap_vs_ap, ap_vs_mcu, mcu_vs_ap, temp_demo, "
                    "strcmp_demo)");
    cmd->add_option("--out", opt.out_dir, "output directory");
    cmd->add_option("--seed", opt.seed, "override master seed")
        ->each([&](const std::string &) { opt.seed_set = true; });
    cmd->add_option("--traces", opt.traces, "override acquisition count");
    cmd->add_option("--countermeasure", opt.countermeasures,
                    "NAME=on|off with NAME in random_delays, throttle, "
                    "dll_jitter");
    cmd->add_flag("--svg", opt.svg, "also render SVG curves");
}

ScenarioConfig resolve_config(const CommonOptions &opt,
                              ScenarioKind fallback_kind,
                              bool use_fallback) {
    ScenarioConfig config;
    if (!opt.config_path.empty()) {
        config = ScenarioConfig::from_json_file(opt.config_path);
    } else if (!opt.scenario_name.empty()) {
        bool found = false;
        for (auto kind :
             {ScenarioKind::ApVsAp, ScenarioKind::ApVsMcu,
              ScenarioKind::McuVsAp, ScenarioKind::TempDemo,
              ScenarioKind::StrcmpDemo}) {
            if (to_string(kind) == opt.scenario_name) {
                config = ScenarioConfig::preset(kind);
                found = true;
                break;
            }
        }
        if (!found)
            throw ConfigError("unknown scenario: " + opt.scenario_name);
    } else if (use_fallback) {
        config = ScenarioConfig::preset(fallback_kind);
    } else {
        throw ConfigError("pass --config or --scenario");
    }

    if (opt.seed_set)
        config.master_seed = opt.seed;
    if (opt.traces > 0)
        config.n_acq = opt.traces;

    for (const auto &cm : opt.countermeasures) {
        const auto eq = cm.find('=');
        const std::string name = eq == std::string::npos ? cm : cm.substr(0, eq);
        const std::string value =
            eq == std::string::npos ? "on" : cm.substr(eq + 1);
        const bool on = value == "on" || value == "1" || value == "true";
        if (name == "random_delays")
            config.random_delays = on;
        else if (name == "throttle")
            config.throttle_hz = on ? std::optional<double>(10e3) : std::nullopt;
        else if (name == "dll_jitter")
            config.dll_phase_jitter_s = on ? 0.05e-9 : 0.0;
        else
            throw ConfigError("unknown countermeasure: " + name);
    }
    config.validate();
    return config;
}

void print_report_summary(const ScenarioConfig &config,
                          const AttackOutcome &outcome) {
    std::printf("scenario %s, sensor %s: %llu/%d retained (%.1f%%), "
                "%d in-window samples\n",
                to_string(config.scenario).c_str(),
                to_string(config.sensor).c_str(),
                static_cast<unsigned long long>(outcome.n_retained),
                config.n_acq, 100.0 * outcome.retained_fraction,
                outcome.in_window_samples);
    std::printf("recovered key: %s\n",
                key_to_hex(outcome.report.best_key).c_str());
    if (config.true_key)
        std::printf("rank-1 bytes: %d/16\n", outcome.report.rank_one_count());
    std::printf("elapsed: %.1f s\n", outcome.elapsed_seconds);
}

int converged_exit(const ScenarioConfig &config, const AttackOutcome &outcome) {
    if (config.true_key && !outcome.report.full_rank_one()) {
        std::fprintf(stderr, "attack did not converge to the full key\n");
        return 3;
    }
    return 0;
}

int cmd_simulate(const CommonOptions &opt, int phase_shift) {
    ScenarioConfig config = resolve_config(opt, ScenarioKind::ApVsAp, false);
    const std::filesystem::path out_dir(opt.out_dir);

    if (phase_shift != 0) {
        PhaseShiftOutcome ps = run_phase_shift_experiment(config, phase_shift);
        std::filesystem::create_directories(out_dir);
        write_config_echo(out_dir / "config.json", config);
        std::printf("phase-shift experiment (%d cycles):\n", phase_shift);
        print_report_summary(config, ps.base);
        print_report_summary(config, ps.shifted);
        std::printf("merged rank-1 bytes: %d/16\n", ps.merged_rank_one_count());
        return ps.merged_rank_one_count() == 16 ? 0 : 3;
    }

    AttackOutcome outcome;
    run_scenario(config, out_dir, &outcome);
    print_report_summary(config, outcome);
    if (opt.svg)
        write_svg_curve(out_dir / "averaged_trace.svg", outcome.averaged_trace,
                        "averaged sensor trace");
    std::printf("artifacts written to %s\n", out_dir.string().c_str());
    return converged_exit(config, outcome);
}

int cmd_attack(const CommonOptions &opt, const std::string &traces_file) {
    ScenarioConfig config = resolve_config(opt, ScenarioKind::ApVsAp, false);
    const AcquisitionSet set = read_slts(traces_file);
    AttackOutcome outcome = attack_trace_set(config, set);

    const std::filesystem::path out_dir(opt.out_dir);
    std::filesystem::create_directories(out_dir);
    write_report_txt(out_dir / "report.txt", config, outcome);
    write_averaged_csv(out_dir / "averaged_trace.csv", outcome.averaged_trace);
    write_rho_time_csv(out_dir / "rho_vs_time.csv", config, outcome);
    write_progressive_csv(out_dir / "progressive.csv", config, outcome.report);
    print_report_summary(config, outcome);
    return converged_exit(config, outcome);
}

int cmd_calibrate(const CommonOptions &opt) {
    ScenarioConfig config = resolve_config(opt, ScenarioKind::McuVsAp, true);
    DelayBlockSensor block(config.delay_block, config.master_seed);
    const int chosen = block.calibrate(config.delay_block_calibration_probes,
                                       config.noise_sigma);
    std::printf("chosen delay setting: %d (instability %.3f)\n", chosen,
                block.instability_histogram()[static_cast<std::size_t>(chosen)]);

    const std::filesystem::path out_dir(opt.out_dir);
    std::filesystem::create_directories(out_dir);
    std::ofstream csv(out_dir / "calibration.csv");
    csv << "t_setting,instability\n";
    for (int t = 0; t < 128; ++t)
        csv << t << ','
            << block.instability_histogram()[static_cast<std::size_t>(t)]
            << '\n';
    std::printf("instability histogram written to %s\n",
                (out_dir / "calibration.csv").string().c_str());
    return 0;
}

int cmd_demo_temp(const CommonOptions &opt) {
    ScenarioConfig config = resolve_config(opt, ScenarioKind::TempDemo, true);
    const SensorTrace trace = run_temperature_demo_scenario(config);

    const std::filesystem::path out_dir(opt.out_dir);
    std::filesystem::create_directories(out_dir);
    write_sensor_trace_csv(out_dir / "temperature_demo.csv", trace);
    if (opt.svg) {
        std::vector<double> series;
        series.reserve(trace.samples.size());
        for (auto s : trace.samples)
            series.push_back(static_cast<double>(s) / trace.average_block);
        write_svg_curve(out_dir / "temperature_demo.svg", series,
                        "command register vs time");
    }
    std::printf("temperature demo: %zu averaged samples written to %s\n",
                trace.samples.size(),
                (out_dir / "temperature_demo.csv").string().c_str());
    return 0;
}

int cmd_demo_strcmp(const CommonOptions &opt) {
    ScenarioConfig config =
        resolve_config(opt, ScenarioKind::StrcmpDemo, true);
    const StrcmpDemoOutcome demo = run_strcmp_demo(config);

    const std::filesystem::path out_dir(opt.out_dir);
    std::filesystem::create_directories(out_dir);
    write_averaged_csv(out_dir / "strcmp_demo.csv", demo.averaged);
    if (opt.svg)
        write_svg_curve(out_dir / "strcmp_demo.svg", demo.averaged,
                        "averaged delay value vs time");
    std::printf("strcmp demo over %d acquisitions: idle %.4f, strcmp %.4f, "
                "separation %.1f standard errors\n",
                demo.n_acq, demo.idle_mean, demo.strcmp_mean,
                demo.separation_se);
    return 0;
}

int cmd_export(const CommonOptions &opt, const std::string &traces_file) {
    const AcquisitionSet set = read_slts(traces_file);
    std::vector<double> averaged(set.n_samples, 0.0);
    std::size_t retained = 0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (!set.retained[i])
            continue;
        ++retained;
        const auto trace = set.trace(i);
        for (std::size_t s = 0; s < averaged.size(); ++s)
            averaged[s] += static_cast<double>(trace[s]);
    }
    if (retained)
        for (auto &v : averaged)
            v /= static_cast<double>(retained);

    const std::filesystem::path out_dir(opt.out_dir);
    std::filesystem::create_directories(out_dir);
    write_averaged_csv(out_dir / "averaged_trace.csv", averaged);
    if (opt.svg)
        write_svg_curve(out_dir / "averaged_trace.svg", averaged,
                        "averaged sensor trace");
    std::printf("averaged %zu retained traces (%u samples each)\n", retained,
                set.n_samples);
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"delay-line power side-channel laboratory"};
    app.require_subcommand(1);

    CommonOptions opt;
    int phase_shift = 0;
    std::string traces_file;

    CLI::App *simulate =
        app.add_subcommand("simulate", "acquire traces and run the attack");
    add_common(simulate, opt);
    simulate->add_option("--phase-shift-cycles", phase_shift,
                         "repeat with a shifted encryption window and merge");

    CLI::App *attack =
        app.add_subcommand("attack", "run the attack on a trace-set file");
    add_common(attack, opt);
    attack->add_option("--traces-file", traces_file, "SLTS trace-set file")
        ->required();

    CLI::App *calibrate =
        app.add_subcommand("calibrate", "sweep the delay-block settings");
    add_common(calibrate, opt);

    CLI::App *demo_temp =
        app.add_subcommand("demo-temp", "thermal step response of the DLL");
    add_common(demo_temp, opt);

    CLI::App *demo_strcmp = app.add_subcommand(
        "demo-strcmp", "activity modulation seen by the delay-block");
    add_common(demo_strcmp, opt);

    CLI::App *exp =
        app.add_subcommand("export", "plot-ready CSV from a trace-set file");
    add_common(exp, opt);
    exp->add_option("--traces-file", traces_file, "SLTS trace-set file")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed())
            return cmd_simulate(opt, phase_shift);
        if (attack->parsed())
            return cmd_attack(opt, traces_file);
        if (calibrate->parsed())
            return cmd_calibrate(opt);
        if (demo_temp->parsed())
            return cmd_demo_temp(opt);
        if (demo_strcmp->parsed())
            return cmd_demo_strcmp(opt);
        if (exp->parsed())
            return cmd_export(opt, traces_file);
    } catch (const ConfigError &e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
