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

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "dlsca/acquisition.hpp"
#include "dlsca/cpa.hpp"

namespace dlsca {

enum class ScenarioKind { ApVsAp, ApVsMcu, McuVsAp, TempDemo, StrcmpDemo };

std::string to_string(ScenarioKind kind);
std::string to_string(SensorKind kind);

/// Full experiment description. Start from a preset and override fields; the
/// JSON form echoes every knob so a run can be reproduced bit-exactly.
struct ScenarioConfig {
    ScenarioKind scenario = ScenarioKind::ApVsAp;
    SensorKind sensor = SensorKind::Dll;
    bool sensor_override = false;

    int n_acq = 1000;
    std::uint64_t master_seed = 1;
    double target_clock_hz = 667e6;
    aes::AesKey victim_key;
    std::optional<aes::AesKey> true_key;
    double noise_sigma = 0.0;

    SamplerConfig sampler;
    InterruptModel interrupts;
    int hpc_margin_cycles = 30;
    int hpc_calibration_probes = 400;

    LeakageSchedule schedule;
    LeakageCoefficients leakage;
    double pdn_tau_s = 0.0; // supply relaxation after a word retires
    int dma_on_cycles = 0;
    int pre_idle_cycles = 0;
    int post_idle_cycles = 0;

    DllConfig dll;
    DelayBlockConfig delay_block;
    int delay_block_calibration_probes = 48;

    // Mitigation toggles.
    bool random_delays = false;
    double random_delay_amplitude_samples = 4.0;
    std::optional<double> throttle_hz;
    double dll_phase_jitter_s = 0.0;

    double ambient_sigma_kelvin = 0.0;
    double ambient_tau_acq = 2000.0;

    int cpa_highpass_window = 9;
    LeakModel cpa_model = LeakModel::TTableWord;
    std::vector<std::uint64_t> cpa_checkpoints;

    // Demo parameters.
    double demo_duration_s = 16.0;
    double demo_read_rate_hz = 300e3;
    int demo_average_block = 1000;
    double demo_step_delta_kelvin = -10.0;
    std::vector<double> demo_step_times_s = {1.0, 6.0, 11.0};
    double demo_recovery_tau_s = 0.8;
    int demo_updates_per_read = 4;
    int strcmp_pairs = 3;
    int strcmp_segment_cycles = 2000;
    double strcmp_level = 0.90;

    static ScenarioConfig preset(ScenarioKind kind);
    static ScenarioConfig from_json_file(const std::filesystem::path &path);
    static ScenarioConfig from_json_text(const std::string &text);
    std::string to_json_text() const;

    void validate() const;
    VictimSpec victim_spec() const;
    std::unique_ptr<Sensor> make_sensor(int *calibrated_setting = nullptr) const;
    int aes_start_cycle() const { return dma_on_cycles + pre_idle_cycles; }
};

struct AttackOutcome {
    KeyRecoveryReport report;
    double retained_fraction = 0.0;
    std::uint64_t n_retained = 0;
    int in_window_samples = 0;
    HpcFilter hpc;
    std::vector<double> averaged_trace; // over retained traces, register units
    int delay_block_setting = -1;
    double elapsed_seconds = 0.0;
    std::shared_ptr<CpaEngine> engine;

    double median_rho_max_correct() const;
};

/// Acquire, filter, correlate. When a writer is given every acquisition is
/// streamed into the trace-set file as it happens.
AttackOutcome run_attack(const ScenarioConfig &config,
                         SltsWriter *writer = nullptr);

/// Correlation attack over an existing trace-set file (retained traces only).
AttackOutcome attack_trace_set(const ScenarioConfig &config,
                               const AcquisitionSet &set);

struct RunArtifacts {
    std::filesystem::path config_echo;
    std::filesystem::path trace_set;
    std::filesystem::path report;
    std::filesystem::path averaged_csv;
    std::filesystem::path rho_time_csv;
    std::filesystem::path progressive_csv;
};

/// Full pipeline with on-disk artifacts under out_dir.
RunArtifacts run_scenario(const ScenarioConfig &config,
                          const std::filesystem::path &out_dir,
                          AttackOutcome *outcome_out = nullptr);

/// Repeats the scenario with the encryption window shifted by shift_cycles
/// and merges per-byte results, keeping each byte's better run.
struct PhaseShiftOutcome {
    AttackOutcome base;
    AttackOutcome shifted;
    std::array<ByteResult, 16> merged;
    int merged_rank_one_count() const;
};
PhaseShiftOutcome run_phase_shift_experiment(const ScenarioConfig &config,
                                             int shift_cycles);

SensorTrace run_temperature_demo_scenario(const ScenarioConfig &config);

struct StrcmpDemoOutcome {
    std::vector<double> averaged;          // per-sample mean decoded delay
    std::vector<std::uint8_t> sample_class; // 0 idle, 1 strcmp, 2 boundary
    double idle_mean = 0.0;
    double strcmp_mean = 0.0;
    double separation_se = 0.0; // (strcmp - idle) in standard errors
    int n_acq = 0;
};
StrcmpDemoOutcome run_strcmp_demo(const ScenarioConfig &config);

} // namespace dlsca
