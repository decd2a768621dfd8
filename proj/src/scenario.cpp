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

#include "dlsca/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "dlsca/errors.hpp"
#include "dlsca/export.hpp"
#include "dlsca/rng.hpp"

namespace dlsca {

using json = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kTagDbCalibration = 0x64626361;

const std::vector<std::uint64_t> kDefaultCheckpoints = {
    1000,   2000,   5000,   10000,  20000,  50000,
    100000, 200000, 300000, 400000, 500000};

ScenarioKind scenario_from_string(const std::string &s) {
    if (s == "ap_vs_ap")
        return ScenarioKind::ApVsAp;
    if (s == "ap_vs_mcu")
        return ScenarioKind::ApVsMcu;
    if (s == "mcu_vs_ap")
        return ScenarioKind::McuVsAp;
    if (s == "temp_demo")
        return ScenarioKind::TempDemo;
    if (s == "strcmp_demo")
        return ScenarioKind::StrcmpDemo;
    throw ConfigError("unknown scenario: " + s);
}

SensorKind sensor_from_string(const std::string &s) {
    if (s == "dll")
        return SensorKind::Dll;
    if (s == "delay_block")
        return SensorKind::DelayBlock;
    if (s == "ideal")
        return SensorKind::Ideal;
    throw ConfigError("unknown sensor: " + s);
}

LeakModel model_from_string(const std::string &s) {
    if (s == "ttable_word")
        return LeakModel::TTableWord;
    if (s == "sbox_byte")
        return LeakModel::SboxByte;
    throw ConfigError("unknown cpa model: " + s);
}

std::string model_to_string(LeakModel m) {
    return m == LeakModel::TTableWord ? "ttable_word" : "sbox_byte";
}

void check_keys(const json &j, const char *section,
                std::initializer_list<const char *> allowed) {
    for (const auto &item : j.items()) {
        bool ok = false;
        for (const char *k : allowed)
            if (item.key() == k) {
                ok = true;
                break;
            }
        if (!ok)
            throw ConfigError(std::string("unknown key '") + item.key() +
                              "' in section '" + section + "'");
    }
}

template <typename T> void load(const json &j, const char *key, T &out) {
    if (j.contains(key))
        out = j.at(key).get<T>();
}

void load_optional_hz(const json &j, const char *key,
                      std::optional<double> &out) {
    if (j.contains(key)) {
        if (j.at(key).is_null())
            out.reset();
        else
            out = j.at(key).get<double>();
    }
}

// Sampler start offset placing one sample `gap` cycles before the
// encryption; keeps the in-window sample count pinned across presets.
double aligned_offset(double aes_start, double gap, double period_cycles) {
    const double anchor = aes_start - gap;
    return anchor - std::floor(anchor / period_cycles) * period_cycles;
}

} // namespace

std::string to_string(ScenarioKind kind) {
    switch (kind) {
    case ScenarioKind::ApVsAp:
        return "ap_vs_ap";
    case ScenarioKind::ApVsMcu:
        return "ap_vs_mcu";
    case ScenarioKind::McuVsAp:
        return "mcu_vs_ap";
    case ScenarioKind::TempDemo:
        return "temp_demo";
    case ScenarioKind::StrcmpDemo:
        return "strcmp_demo";
    }
    return "?";
}

std::string to_string(SensorKind kind) {
    switch (kind) {
    case SensorKind::Dll:
        return "dll";
    case SensorKind::DelayBlock:
        return "delay_block";
    case SensorKind::Ideal:
        return "ideal";
    }
    return "?";
}

ScenarioConfig ScenarioConfig::preset(ScenarioKind kind) {
    ScenarioConfig c;
    c.scenario = kind;
    c.victim_key.bytes = {0x00, 0x01, 0x02, 0x03, 0x04, 0x05, 0x06, 0x07,
                          0x08, 0x09, 0x0a, 0x0b, 0x0c, 0x0d, 0x0e, 0x0f};
    c.true_key = c.victim_key;
    c.leakage.alpha_hw = 0.008;
    c.cpa_checkpoints = kDefaultCheckpoints;
    c.ambient_sigma_kelvin = 0.3;
    c.ambient_tau_acq = 2000.0;
    c.pdn_tau_s = 40e-9;

    switch (kind) {
    case ScenarioKind::ApVsAp: {
        c.sensor = SensorKind::Dll;
        c.target_clock_hz = 667e6;
        c.n_acq = 500000;
        c.noise_sigma = 3e-3;
        c.schedule = LeakageSchedule{kTTableByteOrder, 20, 40, 837};
        c.dma_on_cycles = 130;
        c.pre_idle_cycles = 162;
        c.post_idle_cycles = 300;
        c.sampler.sample_period_s = 62.5e-9;
        const double period = c.sampler.sample_period_s * c.target_clock_hz;
        c.sampler.start_offset_cycles =
            aligned_offset(c.aes_start_cycle(), 0.2, period);
        c.sampler.n_samples = 33;
        c.interrupts.probability = 0.0;
        break;
    }
    case ScenarioKind::ApVsMcu: {
        c.sensor = SensorKind::DelayBlock;
        c.target_clock_hz = 200e6;
        c.n_acq = 200000;
        c.noise_sigma = 2e-3;
        c.schedule = LeakageSchedule{kTTableByteOrder, 32, 60, 1460};
        c.dma_on_cycles = 60;
        c.pre_idle_cycles = 72;
        c.post_idle_cycles = 200;
        c.sampler.sample_period_s = 65.8e-9;
        const double period = c.sampler.sample_period_s * c.target_clock_hz;
        c.sampler.start_offset_cycles =
            aligned_offset(c.aes_start_cycle(), 0.4, period);
        c.sampler.n_samples = 136;
        c.interrupts.probability = 0.10;
        break;
    }
    case ScenarioKind::McuVsAp: {
        c.sensor = SensorKind::DelayBlock;
        c.target_clock_hz = 650e6;
        c.n_acq = 500000;
        c.noise_sigma = 2e-3;
        c.schedule = LeakageSchedule{kTTableByteOrder, 20, 40, 865};
        c.dma_on_cycles = 200;
        c.pre_idle_cycles = 248;
        c.post_idle_cycles = 300;
        c.sampler.sample_period_s = 65.8e-9;
        const double period = c.sampler.sample_period_s * c.target_clock_hz;
        c.sampler.start_offset_cycles =
            aligned_offset(c.aes_start_cycle(), 20.0, period);
        c.sampler.n_samples = 37;
        c.interrupts.probability = 0.55;
        break;
    }
    case ScenarioKind::TempDemo: {
        c.sensor = SensorKind::Dll;
        c.target_clock_hz = 667e6;
        c.n_acq = 1;
        c.noise_sigma = 2e-4;
        c.ambient_sigma_kelvin = 0.0;
        break;
    }
    case ScenarioKind::StrcmpDemo: {
        c.sensor = SensorKind::DelayBlock;
        c.target_clock_hz = 200e6;
        c.n_acq = 5000;
        c.noise_sigma = 2e-3;
        c.ambient_sigma_kelvin = 0.0;
        c.sampler.sample_period_s = 65.8e-9;
        c.sampler.start_offset_cycles = 0.0;
        const int total =
            (2 * c.strcmp_pairs + 1) * c.strcmp_segment_cycles;
        c.sampler.n_samples = static_cast<int>(
            total / (c.sampler.sample_period_s * c.target_clock_hz));
        break;
    }
    }
    return c;
}

void ScenarioConfig::validate() const {
    if (n_acq < 1)
        throw ConfigError("n_acq must be at least 1");
    sampler.validate();
    schedule.validate();
    if (noise_sigma < 0.0)
        throw ConfigError("noise_sigma must be non-negative");
    if (interrupts.probability < 0.0 || interrupts.probability > 1.0)
        throw ConfigError("interrupt probability must be in [0, 1]");
    if (hpc_margin_cycles < 0)
        throw ConfigError("hpc margin must be non-negative");
    if (cpa_highpass_window < 1 || cpa_highpass_window > sampler.n_samples)
        throw ConfigError("cpa highpass window out of range");
    if (dll.loop_gain <= 0.0 || dll.loop_gain > 1.0)
        throw ConfigError("dll loop_gain must be in (0, 1]");
    if (dll.update_divider < 1)
        throw ConfigError("dll update_divider must be at least 1");

    if (!sensor_override) {
        SensorKind expected = SensorKind::Dll;
        switch (scenario) {
        case ScenarioKind::ApVsAp:
        case ScenarioKind::TempDemo:
            expected = SensorKind::Dll;
            break;
        case ScenarioKind::ApVsMcu:
        case ScenarioKind::McuVsAp:
        case ScenarioKind::StrcmpDemo:
            expected = SensorKind::DelayBlock;
            break;
        }
        if (sensor != expected)
            throw ConfigError(
                "sensor does not match the scenario pairing; set "
                "sensor_override to force " +
                to_string(sensor));
    }
}

VictimSpec ScenarioConfig::victim_spec() const {
    VictimSpec spec;
    spec.clock_hz = target_clock_hz;
    spec.key = victim_key;
    spec.round_keys = aes::key_expand(victim_key);
    spec.schedule = schedule;
    spec.coeffs = leakage;
    spec.coeffs.pdn_tail_cycles = pdn_tau_s * target_clock_hz;
    spec.noise_sigma = noise_sigma;
    spec.dma_on_cycles = dma_on_cycles;
    spec.pre_idle_cycles = pre_idle_cycles;
    spec.post_idle_cycles = post_idle_cycles;
    spec.random_delays.enabled = random_delays;
    spec.random_delays.amplitude_cycles = static_cast<int>(
        random_delay_amplitude_samples * sampler.sample_period_s *
        target_clock_hz);
    return spec;
}

std::unique_ptr<Sensor>
ScenarioConfig::make_sensor(int *calibrated_setting) const {
    switch (sensor) {
    case SensorKind::Dll: {
        DllConfig cfg = dll;
        cfg.phase_jitter_s = dll_phase_jitter_s;
        return std::make_unique<DllRegisterSensor>(cfg);
    }
    case SensorKind::DelayBlock: {
        auto s = std::make_unique<DelayBlockTdcSensor>(
            delay_block, target_clock_hz, noise_sigma > 0.0);
        s->block().reseed(derive_seed(master_seed, kTagDbCalibration));
        const int t = s->block().calibrate(delay_block_calibration_probes,
                                           noise_sigma);
        if (calibrated_setting)
            *calibrated_setting = t;
        return s;
    }
    case SensorKind::Ideal:
        return std::make_unique<IdealVoltageSensor>(leakage.v_nominal);
    }
    throw ConfigError("unknown sensor kind");
}

ScenarioConfig ScenarioConfig::from_json_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return from_json_text(text);
}

ScenarioConfig ScenarioConfig::from_json_text(const std::string &text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error &e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object() || !j.contains("scenario"))
        throw ConfigError("config must be an object with a 'scenario' key");

    check_keys(j, "top-level",
               {"scenario", "sensor", "sensor_override", "n_acq",
                "master_seed", "target_clock_hz", "victim_key", "true_key",
                "noise_sigma", "sampler", "interrupts", "hpc", "schedule",
                "leakage", "program", "dll", "delay_block", "countermeasures",
                "ambient", "cpa", "demo"});

    ScenarioConfig c =
        preset(scenario_from_string(j.at("scenario").get<std::string>()));

    if (j.contains("sensor"))
        c.sensor = sensor_from_string(j.at("sensor").get<std::string>());
    load(j, "sensor_override", c.sensor_override);
    load(j, "n_acq", c.n_acq);
    load(j, "master_seed", c.master_seed);
    load(j, "target_clock_hz", c.target_clock_hz);
    if (j.contains("victim_key"))
        c.victim_key = key_from_hex(j.at("victim_key").get<std::string>());
    if (j.contains("true_key")) {
        const auto s = j.at("true_key").get<std::string>();
        if (s.empty())
            c.true_key.reset();
        else
            c.true_key = key_from_hex(s);
    }
    load(j, "noise_sigma", c.noise_sigma);

    if (j.contains("sampler")) {
        const json &s = j.at("sampler");
        check_keys(s, "sampler",
                   {"sample_period_s", "n_samples", "start_offset_cycles",
                    "throttle_hz"});
        load(s, "sample_period_s", c.sampler.sample_period_s);
        load(s, "n_samples", c.sampler.n_samples);
        load(s, "start_offset_cycles", c.sampler.start_offset_cycles);
        load_optional_hz(s, "throttle_hz", c.sampler.throttle_hz);
    }
    if (j.contains("interrupts")) {
        const json &s = j.at("interrupts");
        check_keys(s, "interrupts",
                   {"probability", "stretch_mean_cycles", "stretch_cap_cycles"});
        load(s, "probability", c.interrupts.probability);
        load(s, "stretch_mean_cycles", c.interrupts.stretch_mean_cycles);
        load(s, "stretch_cap_cycles", c.interrupts.stretch_cap_cycles);
    }
    if (j.contains("hpc")) {
        const json &s = j.at("hpc");
        check_keys(s, "hpc", {"margin_cycles", "calibration_probes"});
        load(s, "margin_cycles", c.hpc_margin_cycles);
        load(s, "calibration_probes", c.hpc_calibration_probes);
    }
    if (j.contains("schedule")) {
        const json &s = j.at("schedule");
        check_keys(s, "schedule",
                   {"cycles_per_group", "start_cycle", "total_cycles",
                    "byte_order"});
        load(s, "cycles_per_group", c.schedule.cycles_per_group);
        load(s, "start_cycle", c.schedule.start_cycle);
        load(s, "total_cycles", c.schedule.total_cycles);
        if (s.contains("byte_order")) {
            const auto v = s.at("byte_order").get<std::vector<int>>();
            if (v.size() != 16)
                throw ConfigError("byte_order must list 16 entries");
            for (int i = 0; i < 16; ++i)
                c.schedule.byte_order[static_cast<std::size_t>(i)] =
                    static_cast<std::uint8_t>(v[static_cast<std::size_t>(i)]);
        }
    }
    if (j.contains("leakage")) {
        const json &s = j.at("leakage");
        check_keys(s, "leakage",
                   {"v_nominal", "alpha_static", "alpha_hw", "beta_dma",
                    "idle_level", "aes_level", "irq_level", "pdn_tau_s"});
        load(s, "v_nominal", c.leakage.v_nominal);
        load(s, "alpha_static", c.leakage.alpha_static);
        load(s, "alpha_hw", c.leakage.alpha_hw);
        load(s, "beta_dma", c.leakage.beta_dma);
        load(s, "idle_level", c.leakage.idle_level);
        load(s, "aes_level", c.leakage.aes_level);
        load(s, "irq_level", c.leakage.irq_level);
        load(s, "pdn_tau_s", c.pdn_tau_s);
    }
    if (j.contains("program")) {
        const json &s = j.at("program");
        check_keys(s, "program",
                   {"dma_on_cycles", "pre_idle_cycles", "post_idle_cycles"});
        load(s, "dma_on_cycles", c.dma_on_cycles);
        load(s, "pre_idle_cycles", c.pre_idle_cycles);
        load(s, "post_idle_cycles", c.post_idle_cycles);
    }
    if (j.contains("dll")) {
        const json &s = j.at("dll");
        check_keys(s, "dll",
                   {"target_phase_s", "element_delay_nominal_s", "kv_per_volt",
                    "kt_per_kelvin", "loop_gain", "deadband_lsb",
                    "update_divider", "register_bits"});
        load(s, "target_phase_s", c.dll.target_phase_s);
        load(s, "element_delay_nominal_s", c.dll.element_delay_nominal_s);
        load(s, "kv_per_volt", c.dll.kv_per_volt);
        load(s, "kt_per_kelvin", c.dll.kt_per_kelvin);
        load(s, "loop_gain", c.dll.loop_gain);
        load(s, "deadband_lsb", c.dll.deadband_lsb);
        load(s, "update_divider", c.dll.update_divider);
        load(s, "register_bits", c.dll.register_bits);
    }
    if (j.contains("delay_block")) {
        const json &s = j.at("delay_block");
        check_keys(s, "delay_block",
                   {"clk_period_s", "route_delay_periods", "d_min_s",
                    "d_step_s", "reference_setting", "kv_per_volt",
                    "kt_per_kelvin", "metastable_slot_fraction",
                    "element_mismatch", "calibration_probes"});
        load(s, "clk_period_s", c.delay_block.clk_period_s);
        load(s, "route_delay_periods", c.delay_block.route_delay_periods);
        load(s, "d_min_s", c.delay_block.d_min_s);
        load(s, "d_step_s", c.delay_block.d_step_s);
        load(s, "reference_setting", c.delay_block.reference_setting);
        load(s, "kv_per_volt", c.delay_block.kv_per_volt);
        load(s, "kt_per_kelvin", c.delay_block.kt_per_kelvin);
        load(s, "metastable_slot_fraction",
             c.delay_block.metastable_slot_fraction);
        if (s.contains("element_mismatch")) {
            const auto v = s.at("element_mismatch").get<std::vector<double>>();
            if (v.size() != 12)
                throw ConfigError("element_mismatch must list 12 entries");
            std::copy(v.begin(), v.end(), c.delay_block.element_mismatch.begin());
        }
        load(s, "calibration_probes", c.delay_block_calibration_probes);
    }
    if (j.contains("countermeasures")) {
        const json &s = j.at("countermeasures");
        check_keys(s, "countermeasures",
                   {"random_delays", "random_delay_amplitude_samples",
                    "throttle_hz", "dll_phase_jitter_s"});
        load(s, "random_delays", c.random_delays);
        load(s, "random_delay_amplitude_samples",
             c.random_delay_amplitude_samples);
        load_optional_hz(s, "throttle_hz", c.throttle_hz);
        load(s, "dll_phase_jitter_s", c.dll_phase_jitter_s);
    }
    if (j.contains("ambient")) {
        const json &s = j.at("ambient");
        check_keys(s, "ambient", {"sigma_kelvin", "tau_acquisitions"});
        load(s, "sigma_kelvin", c.ambient_sigma_kelvin);
        load(s, "tau_acquisitions", c.ambient_tau_acq);
    }
    if (j.contains("cpa")) {
        const json &s = j.at("cpa");
        check_keys(s, "cpa", {"highpass_window", "model", "checkpoints"});
        load(s, "highpass_window", c.cpa_highpass_window);
        if (s.contains("model"))
            c.cpa_model = model_from_string(s.at("model").get<std::string>());
        if (s.contains("checkpoints"))
            c.cpa_checkpoints =
                s.at("checkpoints").get<std::vector<std::uint64_t>>();
    }
    if (j.contains("demo")) {
        const json &s = j.at("demo");
        check_keys(s, "demo",
                   {"duration_s", "read_rate_hz", "average_block",
                    "step_delta_kelvin", "step_times_s", "recovery_tau_s",
                    "updates_per_read", "strcmp_pairs",
                    "strcmp_segment_cycles", "strcmp_level"});
        load(s, "duration_s", c.demo_duration_s);
        load(s, "read_rate_hz", c.demo_read_rate_hz);
        load(s, "average_block", c.demo_average_block);
        load(s, "step_delta_kelvin", c.demo_step_delta_kelvin);
        if (s.contains("step_times_s"))
            c.demo_step_times_s =
                s.at("step_times_s").get<std::vector<double>>();
        load(s, "recovery_tau_s", c.demo_recovery_tau_s);
        load(s, "updates_per_read", c.demo_updates_per_read);
        load(s, "strcmp_pairs", c.strcmp_pairs);
        load(s, "strcmp_segment_cycles", c.strcmp_segment_cycles);
        load(s, "strcmp_level", c.strcmp_level);
    }

    c.validate();
    return c;
}

std::string ScenarioConfig::to_json_text() const {
    json j;
    j["scenario"] = to_string(scenario);
    j["sensor"] = to_string(sensor);
    j["sensor_override"] = sensor_override;
    j["n_acq"] = n_acq;
    j["master_seed"] = master_seed;
    j["target_clock_hz"] = target_clock_hz;
    j["victim_key"] = key_to_hex(victim_key);
    j["true_key"] = true_key ? key_to_hex(*true_key) : "";
    j["noise_sigma"] = noise_sigma;
    j["sampler"] = {{"sample_period_s", sampler.sample_period_s},
                    {"n_samples", sampler.n_samples},
                    {"start_offset_cycles", sampler.start_offset_cycles},
                    {"throttle_hz", sampler.throttle_hz
                                        ? json(*sampler.throttle_hz)
                                        : json(nullptr)}};
    j["interrupts"] = {{"probability", interrupts.probability},
                       {"stretch_mean_cycles", interrupts.stretch_mean_cycles},
                       {"stretch_cap_cycles", interrupts.stretch_cap_cycles}};
    j["hpc"] = {{"margin_cycles", hpc_margin_cycles},
                {"calibration_probes", hpc_calibration_probes}};
    std::vector<int> order(schedule.byte_order.begin(),
                           schedule.byte_order.end());
    j["schedule"] = {{"cycles_per_group", schedule.cycles_per_group},
                     {"start_cycle", schedule.start_cycle},
                     {"total_cycles", schedule.total_cycles},
                     {"byte_order", order}};
    j["leakage"] = {{"v_nominal", leakage.v_nominal},
                    {"alpha_static", leakage.alpha_static},
                    {"alpha_hw", leakage.alpha_hw},
                    {"beta_dma", leakage.beta_dma},
                    {"idle_level", leakage.idle_level},
                    {"aes_level", leakage.aes_level},
                    {"irq_level", leakage.irq_level},
                    {"pdn_tau_s", pdn_tau_s}};
    j["program"] = {{"dma_on_cycles", dma_on_cycles},
                    {"pre_idle_cycles", pre_idle_cycles},
                    {"post_idle_cycles", post_idle_cycles}};
    j["dll"] = {{"target_phase_s", dll.target_phase_s},
                {"element_delay_nominal_s", dll.element_delay_nominal_s},
                {"kv_per_volt", dll.kv_per_volt},
                {"kt_per_kelvin", dll.kt_per_kelvin},
                {"loop_gain", dll.loop_gain},
                {"deadband_lsb", dll.deadband_lsb},
                {"update_divider", dll.update_divider},
                {"register_bits", dll.register_bits}};
    std::vector<double> mism(delay_block.element_mismatch.begin(),
                             delay_block.element_mismatch.end());
    j["delay_block"] = {{"clk_period_s", delay_block.clk_period_s},
                        {"route_delay_periods", delay_block.route_delay_periods},
                        {"d_min_s", delay_block.d_min_s},
                        {"d_step_s", delay_block.d_step_s},
                        {"reference_setting", delay_block.reference_setting},
                        {"kv_per_volt", delay_block.kv_per_volt},
                        {"kt_per_kelvin", delay_block.kt_per_kelvin},
                        {"metastable_slot_fraction",
                         delay_block.metastable_slot_fraction},
                        {"element_mismatch", mism},
                        {"calibration_probes", delay_block_calibration_probes}};
    j["countermeasures"] = {
        {"random_delays", random_delays},
        {"random_delay_amplitude_samples", random_delay_amplitude_samples},
        {"throttle_hz", throttle_hz ? json(*throttle_hz) : json(nullptr)},
        {"dll_phase_jitter_s", dll_phase_jitter_s}};
    j["ambient"] = {{"sigma_kelvin", ambient_sigma_kelvin},
                    {"tau_acquisitions", ambient_tau_acq}};
    j["cpa"] = {{"highpass_window", cpa_highpass_window},
                {"model", model_to_string(cpa_model)},
                {"checkpoints", cpa_checkpoints}};
    j["demo"] = {{"duration_s", demo_duration_s},
                 {"read_rate_hz", demo_read_rate_hz},
                 {"average_block", demo_average_block},
                 {"step_delta_kelvin", demo_step_delta_kelvin},
                 {"step_times_s", demo_step_times_s},
                 {"recovery_tau_s", demo_recovery_tau_s},
                 {"updates_per_read", demo_updates_per_read},
                 {"strcmp_pairs", strcmp_pairs},
                 {"strcmp_segment_cycles", strcmp_segment_cycles},
                 {"strcmp_level", strcmp_level}};
    return j.dump(2) + "\n";
}

double AttackOutcome::median_rho_max_correct() const {
    std::array<double, 16> v{};
    for (int i = 0; i < 16; ++i)
        v[static_cast<std::size_t>(i)] =
            report.bytes[static_cast<std::size_t>(i)].rank
                ? report.bytes[static_cast<std::size_t>(i)].rho_correct
                : report.bytes[static_cast<std::size_t>(i)].rho_max;
    std::sort(v.begin(), v.end());
    return 0.5 * (v[7] + v[8]);
}

AttackOutcome run_attack(const ScenarioConfig &config, SltsWriter *writer) {
    const auto t0 = std::chrono::steady_clock::now();
    config.validate();

    AttackOutcome out;
    const VictimSpec spec = config.victim_spec();
    std::unique_ptr<Sensor> sensor =
        config.make_sensor(&out.delay_block_setting);

    SamplerConfig sampler = config.sampler;
    if (config.throttle_hz)
        sampler.throttle_hz = config.throttle_hz;

    out.hpc.margin_cycles = config.hpc_margin_cycles;
    out.hpc.min_reference_cycles = calibrate_min_reference(
        spec, config.interrupts, config.hpc_calibration_probes,
        config.master_seed);
    out.in_window_samples =
        in_window_samples(sampler, spec.clock_hz, spec.aes_start_cycle(),
                          spec.schedule.total_cycles);

    std::vector<std::uint64_t> checkpoints;
    for (auto cp : config.cpa_checkpoints)
        if (cp <= static_cast<std::uint64_t>(config.n_acq))
            checkpoints.push_back(cp);
    auto engine = std::make_shared<CpaEngine>(sampler.n_samples,
                                              config.cpa_model, checkpoints);

    std::vector<double> averaged(static_cast<std::size_t>(sampler.n_samples),
                                 0.0);
    std::vector<double> raw(static_cast<std::size_t>(sampler.n_samples));
    std::vector<double> filtered;
    std::uint64_t retained_count = 0;

    acquire_stream(
        config.n_acq, *sensor, spec, sampler, config.interrupts, out.hpc,
        config.master_seed, config.ambient_sigma_kelvin, config.ambient_tau_acq,
        [&](int, const AcquisitionResult &r, bool retained) {
            if (writer)
                writer->write_trace(r.pt, r.ct, r.cycle_count, retained,
                                    r.trace);
            if (!retained)
                return;
            ++retained_count;
            for (std::size_t s = 0; s < raw.size(); ++s) {
                raw[s] = static_cast<double>(r.trace[s]);
                averaged[s] += raw[s];
            }
            filtered = CpaEngine::highpass(raw, config.cpa_highpass_window);
            engine->update(r.pt, filtered);
        });

    if (retained_count > 0)
        for (auto &v : averaged)
            v /= static_cast<double>(retained_count);

    out.report = engine->report(config.true_key);
    out.retained_fraction = static_cast<double>(retained_count) /
                            static_cast<double>(config.n_acq);
    out.n_retained = retained_count;
    out.averaged_trace = std::move(averaged);
    out.engine = engine;
    out.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return out;
}

AttackOutcome attack_trace_set(const ScenarioConfig &config,
                               const AcquisitionSet &set) {
    const auto t0 = std::chrono::steady_clock::now();

    AttackOutcome out;
    std::vector<std::uint64_t> checkpoints;
    for (auto cp : config.cpa_checkpoints)
        if (cp <= set.size())
            checkpoints.push_back(cp);
    auto engine = std::make_shared<CpaEngine>(static_cast<int>(set.n_samples),
                                              config.cpa_model, checkpoints);

    std::vector<double> averaged(set.n_samples, 0.0);
    std::vector<double> raw(set.n_samples);
    std::uint64_t retained_count = 0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (!set.retained[i])
            continue;
        ++retained_count;
        const auto trace = set.trace(i);
        for (std::size_t s = 0; s < raw.size(); ++s) {
            raw[s] = static_cast<double>(trace[s]);
            averaged[s] += raw[s];
        }
        aes::Block pt;
        pt.bytes = set.plaintexts[i];
        engine->update(pt,
                       CpaEngine::highpass(raw, config.cpa_highpass_window));
    }
    if (retained_count > 0)
        for (auto &v : averaged)
            v /= static_cast<double>(retained_count);

    out.report = engine->report(config.true_key);
    out.retained_fraction =
        set.size() ? static_cast<double>(retained_count) /
                         static_cast<double>(set.size())
                   : 0.0;
    out.n_retained = retained_count;
    out.averaged_trace = std::move(averaged);
    out.engine = engine;
    out.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return out;
}

RunArtifacts run_scenario(const ScenarioConfig &config,
                          const std::filesystem::path &out_dir,
                          AttackOutcome *outcome_out) {
    config.validate();
    std::filesystem::create_directories(out_dir);

    RunArtifacts art;
    art.config_echo = out_dir / "config.json";
    art.trace_set = out_dir / "traces.slts";
    art.report = out_dir / "report.txt";
    art.averaged_csv = out_dir / "averaged_trace.csv";
    art.rho_time_csv = out_dir / "rho_vs_time.csv";
    art.progressive_csv = out_dir / "progressive.csv";

    write_config_echo(art.config_echo, config);

    AttackOutcome outcome;
    {
        SltsWriter writer(art.trace_set,
                          static_cast<std::uint32_t>(config.n_acq),
                          static_cast<std::uint32_t>(config.sampler.n_samples),
                          static_cast<std::uint8_t>(config.sensor));
        outcome = run_attack(config, &writer);
    }

    write_report_txt(art.report, config, outcome);
    write_averaged_csv(art.averaged_csv, outcome.averaged_trace);
    write_rho_time_csv(art.rho_time_csv, config, outcome);
    write_progressive_csv(art.progressive_csv, config, outcome.report);

    if (outcome_out)
        *outcome_out = std::move(outcome);
    return art;
}

int PhaseShiftOutcome::merged_rank_one_count() const {
    int count = 0;
    for (const auto &b : merged)
        if (b.rank && *b.rank == 1)
            ++count;
    return count;
}

PhaseShiftOutcome run_phase_shift_experiment(const ScenarioConfig &config,
                                             int shift_cycles) {
    const double period_cycles =
        config.sampler.effective_period_s() * config.target_clock_hz;
    if (std::abs(shift_cycles) >= period_cycles)
        throw ConfigError("phase shift must stay below one sample period");
    if (config.pre_idle_cycles + shift_cycles < 0)
        throw ConfigError("phase shift would move the encryption before zero");

    PhaseShiftOutcome out;
    out.base = run_attack(config);
    if (shift_cycles == 0) {
        out.shifted = out.base;
    } else {
        ScenarioConfig shifted = config;
        shifted.pre_idle_cycles += shift_cycles;
        out.shifted = run_attack(shifted);
    }
    for (int i = 0; i < 16; ++i) {
        const ByteResult &a = out.base.report.bytes[static_cast<std::size_t>(i)];
        const ByteResult &b =
            out.shifted.report.bytes[static_cast<std::size_t>(i)];
        const bool prefer_base =
            (a.rank && b.rank) ? *a.rank <= *b.rank : a.rho_max >= b.rho_max;
        out.merged[static_cast<std::size_t>(i)] = prefer_base ? a : b;
    }
    return out;
}

SensorTrace run_temperature_demo_scenario(const ScenarioConfig &config) {
    ThermalStimulus stimulus;
    stimulus.recovery_time_constant_s = config.demo_recovery_tau_s;
    for (double t : config.demo_step_times_s)
        stimulus.events.push_back({t, config.demo_step_delta_kelvin});
    return run_temperature_demo(config.dll, stimulus, config.demo_duration_s,
                                config.demo_read_rate_hz,
                                config.demo_average_block, config.noise_sigma,
                                config.master_seed,
                                config.demo_updates_per_read);
}

StrcmpDemoOutcome run_strcmp_demo(const ScenarioConfig &config) {
    StrcmpDemoOutcome out;
    out.n_acq = config.n_acq;

    const int seg = config.strcmp_segment_cycles;
    ActivityProgram program;
    program.segments.push_back(Segment::idle(seg));
    for (int p = 0; p < config.strcmp_pairs; ++p) {
        program.segments.push_back(
            Segment::strcmp_burst(seg, config.strcmp_level));
        program.segments.push_back(Segment::idle(seg));
    }
    const int total = program.total_cycles();

    SamplerConfig sampler = config.sampler;
    const double period_cycles =
        sampler.effective_period_s() * config.target_clock_hz;

    // Classify samples; the line integrates backwards over roughly the route
    // plus three clock periods, so samples too close to a boundary mix both
    // activity levels.
    const int lookback = static_cast<int>(
        (config.delay_block.route_delay_periods + 3.0) *
        config.delay_block.clk_period_s * config.target_clock_hz) + 2;
    out.sample_class.resize(static_cast<std::size_t>(sampler.n_samples), 2);
    for (int k = 0; k < sampler.n_samples; ++k) {
        const double t = sampler.start_offset_cycles + k * period_cycles;
        if (t >= total) {
            out.sample_class[static_cast<std::size_t>(k)] = 2;
            continue;
        }
        const int seg_idx = static_cast<int>(t) / seg;
        const int in_seg = static_cast<int>(t) - seg_idx * seg;
        if (in_seg < lookback)
            out.sample_class[static_cast<std::size_t>(k)] = 2;
        else
            out.sample_class[static_cast<std::size_t>(k)] =
                (seg_idx % 2) ? 1 : 0;
    }

    DelayBlockTdcSensor sensor(config.delay_block, config.target_clock_hz,
                               config.noise_sigma > 0.0);
    sensor.block().reseed(derive_seed(config.master_seed, kTagDbCalibration));
    sensor.block().calibrate(config.delay_block_calibration_probes,
                             config.noise_sigma);

    const aes::RoundKeys keys = aes::key_expand(config.victim_key);
    const int last_cycle = static_cast<int>(
        sampler.start_offset_cycles + (sampler.n_samples - 1) * period_cycles) + 1;

    out.averaged.assign(static_cast<std::size_t>(sampler.n_samples), 0.0);
    double diff_sum = 0.0;
    double diff_sq_sum = 0.0;
    std::vector<double> voltage;
    for (int i = 0; i < config.n_acq; ++i) {
        const std::uint64_t seed = derive_seed(config.master_seed, 0x73636d70,
                                               static_cast<std::uint64_t>(i));
        render_voltage_into(program, config.schedule, keys, config.leakage,
                            config.noise_sigma, derive_seed(seed, 0x6e6f6973),
                            last_cycle, voltage);
        sensor.start_acquisition(voltage, 300.0, derive_seed(seed, 0x73656e73));

        double idle_sum = 0.0, strcmp_sum = 0.0;
        int idle_n = 0, strcmp_n = 0;
        for (int k = 0; k < sampler.n_samples; ++k) {
            const int cycle = static_cast<int>(sampler.start_offset_cycles +
                                               k * period_cycles);
            const double v =
                static_cast<double>(sensor.read_at_cycle(cycle));
            out.averaged[static_cast<std::size_t>(k)] += v;
            if (out.sample_class[static_cast<std::size_t>(k)] == 0) {
                idle_sum += v;
                ++idle_n;
            } else if (out.sample_class[static_cast<std::size_t>(k)] == 1) {
                strcmp_sum += v;
                ++strcmp_n;
            }
        }
        const double d = strcmp_sum / strcmp_n - idle_sum / idle_n;
        diff_sum += d;
        diff_sq_sum += d * d;
    }

    for (auto &v : out.averaged)
        v /= static_cast<double>(config.n_acq);

    double idle_total = 0.0, strcmp_total = 0.0;
    int idle_n = 0, strcmp_n = 0;
    for (std::size_t k = 0; k < out.averaged.size(); ++k) {
        if (out.sample_class[k] == 0) {
            idle_total += out.averaged[k];
            ++idle_n;
        } else if (out.sample_class[k] == 1) {
            strcmp_total += out.averaged[k];
            ++strcmp_n;
        }
    }
    out.idle_mean = idle_total / idle_n;
    out.strcmp_mean = strcmp_total / strcmp_n;

    const double n = static_cast<double>(config.n_acq);
    const double mean_d = diff_sum / n;
    const double var_d =
        (diff_sq_sum - n * mean_d * mean_d) / (n - 1.0);
    const double se = std::sqrt(var_d / n);
    out.separation_se = se > 0.0 ? mean_d / se : 0.0;
    return out;
}

} // namespace dlsca
