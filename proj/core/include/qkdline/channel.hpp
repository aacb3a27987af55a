#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <variant>
#include <vector>

#include "qkdline/config.hpp"

namespace qkdline::channel {

struct FiberSpan {
    double length_km = 0.0;
    double attenuation_db_per_km = 0.0;
};

struct Amplifier {
    double gain_db = 0.0;
    double ase_noise_photons = 0.0;
};

using LineElement = std::variant<FiberSpan, Amplifier>;

struct LineModel {
    std::vector<LineElement> elements;
    double wavelength_nm = 1550.0;
    double receiver_gain_db = 0.0;

    double total_length_km() const;
    std::size_t amplifier_count() const;
    double total_loss_db() const;
    void validate() const;
};

struct PulseSpec {
    double n0 = 0.0;
    double n1 = 0.0;
    double pulse_duration_ns = 0.0;

    double mean_photons(int bit) const;
    void validate() const;
};

// Tap immediately after the sender; Eve receives fraction r_e of the pulse.
struct EveTap {
    double r_e = 0.0;

    void validate() const;
};

// Probability mass on an explicit outcome grid (integer counts or voltage bins).
struct Pmf {
    std::vector<double> values;
    std::vector<double> probs;

    double total_mass() const;
    double mean() const;
};

struct PoissonIdeal {
    double mean0 = 0.0;
    double mean1 = 0.0;
};

struct GaussianCalibrated {
    double v0 = 0.0;
    double sigma0 = 0.0;
    double v1 = 0.0;
    double sigma1 = 0.0;
    double volts_per_photon = 1.0;
};

// Bit-conditional receiver outcome distribution. The Poisson variant works on
// photon counts, the Gaussian variant on detector voltages.
class DetectionModel {
public:
    static DetectionModel poisson(double mean0, double mean1);
    static DetectionModel gaussian(double v0, double sigma0, double v1, double sigma1,
                                   double volts_per_photon);

    bool is_poisson() const { return std::holds_alternative<PoissonIdeal>(variant_); }
    bool is_gaussian() const { return std::holds_alternative<GaussianCalibrated>(variant_); }
    const PoissonIdeal& as_poisson() const { return std::get<PoissonIdeal>(variant_); }
    const GaussianCalibrated& as_gaussian() const { return std::get<GaussianCalibrated>(variant_); }

    double mean(int bit) const;
    double stddev(int bit) const;
    double quantile(int bit, double p) const;

    // Exact probability of an outcome in the closed interval [lo, hi].
    double interval_mass(int bit, double lo, double hi) const;

    // Default grid: full truncated count range (Poisson) or +-10 sigma bins (Gaussian).
    Pmf analytic_pmf(int bit) const;
    Pmf analytic_pmf(int bit, double lo, double hi, std::size_t bins) const;

    std::vector<double> sample(int bit, std::size_t count, std::uint64_t seed) const;

private:
    std::variant<PoissonIdeal, GaussianCalibrated> variant_;
};

double end_to_end_mean(const LineModel& line, double n_in);

std::vector<double> sample_bob(const DetectionModel& model, int bit, std::size_t count,
                               std::uint64_t seed);

std::vector<std::uint64_t> sample_eve(const PulseSpec& spec, const EveTap& tap, int bit,
                                      std::size_t count, std::uint64_t seed);

LineModel line_from_config(const ConfigMap& cfg);
PulseSpec pulse_from_config(const ConfigMap& cfg);
DetectionModel detection_from_config(const ConfigMap& cfg, const LineModel& line,
                                     const PulseSpec& pulse);

void write_samples_csv(const std::filesystem::path& path, const std::vector<int>& bits,
                       const std::vector<double>& values);

}  // namespace qkdline::channel
