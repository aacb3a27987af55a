#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "qkdline/channel.hpp"
#include "qkdline/config.hpp"
#include "qkdline/losscontrol.hpp"
#include "qkdline/randomness.hpp"
#include "qkdline/secrecy.hpp"
#include "qkdline/sifting.hpp"

namespace qkdline::pipeline {

struct RunConfig {
    ConfigMap raw;

    channel::LineModel line;
    channel::PulseSpec pulse;
    channel::DetectionModel detection;

    double r_e = 0.002;
    double f = 1.15;
    bool optimize_thresholds = true;
    sifting::Thresholds thresholds;  // used when optimize_thresholds is false

    double code_rate = 0.2;
    std::size_t ec_block = 4000;
    std::size_t pa_min_bits = 1000;

    double raw_rate_bps = 200000.0;
    double duty_cycle = 0.5;  // fraction of wall time spent sending key pulses
    std::size_t raw_bits = 4000000;

    double transmit_sigma = 0.002;
    double transmit_k = 3.0;
    std::size_t transmit_epochs = 600;
    double tap_fraction = 0.0;  // optional injected tap for demos
    long long tap_epoch = -1;

    double otdr_noise_db = 1.0;
    double otdr_pulse_s = 3e-6;
    std::size_t otdr_averaging = 4096;
    double otdr_lambda = 0.02;
    double otdr_jump_db = 0.04;
    double leak_alarm_fraction = 0.01;
    std::vector<losscontrol::LossEvent> injected_leaks;

    std::size_t battery_segment = 100000;
    bool emit_samples = false;

    std::uint64_t seed = 1;
    std::filesystem::path output_dir = "out";

    static RunConfig from_file(const std::filesystem::path& path);
    static RunConfig from_config(ConfigMap cfg);
};

enum class Verdict { Secure, Insecure, Intervention };

const char* verdict_name(Verdict v);

struct StageCounts {
    std::size_t raw_bits = 0;
    std::size_t sifted_bits = 0;
    std::size_t corrected_bits = 0;
    std::size_t final_bits = 0;
    double wall_seconds = 0.0;
    double raw_bps = 0.0;
    double sifted_bps = 0.0;
    double corrected_bps = 0.0;
    double final_bps = 0.0;
};

struct EcSummary {
    std::size_t block_length = 0;
    std::size_t blocks = 0;
    std::size_t succeeded = 0;
    std::size_t failed = 0;
    std::size_t dropped_bits = 0;  // tail that did not fill a block
    std::size_t disclosed_bits = 0;
    double effective_f = 0.0;  // disclosed fraction over h2(p_err)
};

struct OtdrSummary {
    std::vector<losscontrol::LossEvent> events;
    std::size_t amplifier_events = 0;
    std::size_t leak_events = 0;
    bool intervention = false;
    std::size_t trace_samples = 0;
    double resolution_km = 0.0;
};

struct TransmitSummary {
    std::vector<std::size_t> alarms;
    bool intervention = false;
    double mean_loss = 0.0;
    std::size_t epochs = 0;
};

struct RunReport {
    std::uint64_t seed = 0;
    Verdict verdict = Verdict::Insecure;

    OtdrSummary otdr;
    TransmitSummary transmit;

    sifting::Thresholds thresholds;
    sifting::RateBreakdown breakdown;
    double imbalance = 0.0;
    double empirical_p_err = 0.0;

    secrecy::SecrecyBudget budget;
    secrecy::KeyLengthVerdict budget_verdict;  // closed-form secrecy budget check
    double overlap = 0.0;

    StageCounts stages;
    EcSummary ec;
    postprocess::RandomnessReport randomness;

    std::filesystem::path report_path;
    std::filesystem::path key_path;  // empty unless verdict == Secure
    std::map<std::string, std::string> manifest;
};

RunReport run_simulate(const RunConfig& cfg);

// With emit_files set, writes otdr_raw.csv (synthetic path only),
// otdr_filtered.csv and otdr_events.json into cfg.output_dir.
OtdrSummary run_otdr(const RunConfig& cfg, bool emit_files = false);
OtdrSummary run_otdr_trace(const std::filesystem::path& trace_csv, const RunConfig& cfg,
                           bool emit_files = false);

// With emit_files set, writes transmit_losses.csv and transmit_alarms.json.
TransmitSummary run_transmit(const RunConfig& cfg, bool emit_files = false);

struct SweepRow {
    double value = 0.0;
    double analytic_rate = 0.0;  // secret bits per raw pulse from the budget
    double final_bps = 0.0;
    std::string verdict;
    std::string error;
};

// Supported parameters: "r_e" (tap fraction) and "spans" (number of repeated
// span+amplifier units built from the first such pair of the base line).
std::vector<SweepRow> run_sweep(const RunConfig& base, const std::string& parameter,
                                const std::vector<double>& values);

void write_sweep_csv(const std::filesystem::path& path, const std::string& parameter,
                     const std::vector<SweepRow>& rows);

}  // namespace qkdline::pipeline
