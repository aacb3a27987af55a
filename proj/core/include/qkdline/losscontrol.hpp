#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "qkdline/channel.hpp"

namespace qkdline::losscontrol {

struct TransmitProbe {
    double carrier_freq_hz = 25e6;
    double duration_s = 1e-3;
    double sample_rate_hz = 125e6;
    double amplitude = 1.0;

    std::size_t sample_count() const;
    void validate() const;  // Nyquist margin and an integer number of cycles
};

// Probe waveform after the line: amplitude scaled by `transmission`, plus
// additive white noise. One epoch worth of samples.
std::vector<double> synthesize_probe(const TransmitProbe& probe, double transmission,
                                     double noise_std, std::uint64_t seed);

// Single-bin amplitude at the probe carrier (Goertzel recursion); exact for a
// pure integer-cycle sinusoid.
double lockin_amplitude(std::span<const double> samples, const TransmitProbe& probe);

double loss_estimate(double a_t, double a_ref);

// Alarm epochs where the loss exceeds a trailing-median baseline by more than
// k*sigma_ref on `persistence` consecutive epochs. The returned indices are
// the epochs at which the persistence condition completes.
std::vector<std::size_t> detect_intervention(std::span<const double> losses, double sigma_ref,
                                             double k, std::size_t window = 32,
                                             std::size_t persistence = 2);

struct OTDRTrace {
    std::vector<double> power_db;
    double resolution_km = 0.0;
    double pulse_duration_s = 0.0;
    std::size_t averaging = 1;

    double distance_km(std::size_t sample) const { return resolution_km * double(sample); }
    std::size_t size() const { return power_db.size(); }
};

enum class EventKind { Leak, Splice, Amplifier };

struct LossEvent {
    double position_km = 0.0;
    double magnitude = 0.0;  // power fraction lost; negative for amplifier gain steps
    EventKind kind = EventKind::Leak;
};

const char* event_kind_name(EventKind kind);

// Two-way backscatter resolution c_fiber * tau / 2.
double otdr_resolution_km(double pulse_duration_s);

OTDRTrace synthesize_otdr(const channel::LineModel& line, const std::vector<LossEvent>& events,
                          double noise_std_db, double pulse_duration_s, std::size_t averaging,
                          std::uint64_t seed);

// min over x of 0.5*||x - y||^2 + lambda*||D2 x||_1 via ADMM.
std::vector<double> l1_trend_filter(std::span<const double> y, double lambda);
OTDRTrace l1_trend_filter(const OTDRTrace& trace, double lambda);

std::vector<LossEvent> localize_losses(const OTDRTrace& filtered, double jump_threshold_db);

// SI splice budget: transmitted + reflected + scattered = 1; the externally
// observable leak is the scattered part times the external fraction.
double splice_leak_budget(double transmittance, double reflectance, double external_fraction);

void write_trace_csv(const std::filesystem::path& path, const OTDRTrace& trace);
OTDRTrace read_trace_csv(const std::filesystem::path& path);

}  // namespace qkdline::losscontrol
