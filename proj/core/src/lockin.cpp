#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "qkdline/losscontrol.hpp"

namespace qkdline::losscontrol {

std::size_t TransmitProbe::sample_count() const {
    return std::size_t(std::llround(duration_s * sample_rate_hz));
}

void TransmitProbe::validate() const {
    if (carrier_freq_hz <= 0 || duration_s <= 0 || sample_rate_hz <= 0 || amplitude <= 0)
        throw std::invalid_argument("probe parameters must be positive");
    if (sample_rate_hz <= 2.0 * carrier_freq_hz)
        throw std::invalid_argument("probe sample rate must exceed twice the carrier");
    const double cycles = duration_s * carrier_freq_hz;
    if (std::abs(cycles - std::round(cycles)) > 1e-9 * std::max(1.0, cycles))
        throw std::invalid_argument("probe duration must hold an integer number of cycles");
    const double samples = duration_s * sample_rate_hz;
    if (std::abs(samples - std::round(samples)) > 1e-9 * samples)
        throw std::invalid_argument("probe duration must hold an integer number of samples");
}

std::vector<double> synthesize_probe(const TransmitProbe& probe, double transmission,
                                     double noise_std, std::uint64_t seed) {
    probe.validate();
    if (transmission < 0) throw std::invalid_argument("transmission must be nonnegative");
    const std::size_t n = probe.sample_count();
    const double w = 2.0 * std::numbers::pi * probe.carrier_freq_hz / probe.sample_rate_hz;
    std::vector<double> out(n);
    const double a = probe.amplitude * transmission;
    for (std::size_t i = 0; i < n; ++i) out[i] = a * std::sin(w * double(i));
    if (noise_std > 0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, noise_std);
        for (auto& v : out) v += noise(rng);
    }
    return out;
}

double lockin_amplitude(std::span<const double> samples, const TransmitProbe& probe) {
    probe.validate();
    if (samples.size() != probe.sample_count())
        throw std::invalid_argument("sample count does not match the probe window");
    const std::size_t n = samples.size();
    const double w = 2.0 * std::numbers::pi * probe.carrier_freq_hz / probe.sample_rate_hz;
    const double coeff = 2.0 * std::cos(w);
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s0 = samples[i] + coeff * s1 - s2;
        s2 = s1;
        s1 = s0;
    }
    const double re = s1 - s2 * std::cos(w);
    const double im = s2 * std::sin(w);
    return 2.0 * std::sqrt(re * re + im * im) / double(n);
}

double loss_estimate(double a_t, double a_ref) {
    if (a_ref <= 0.0) throw std::invalid_argument("reference amplitude must be positive");
    return 1.0 - a_t / a_ref;
}

std::vector<std::size_t> detect_intervention(std::span<const double> losses, double sigma_ref,
                                             double k, std::size_t window,
                                             std::size_t persistence) {
    if (sigma_ref <= 0.0) throw std::invalid_argument("sigma_ref must be positive");
    if (window < 1 || persistence < 1)
        throw std::invalid_argument("window and persistence must be at least 1");
    std::vector<std::size_t> alarms;
    std::vector<double> buf;
    std::size_t streak = 0;
    for (std::size_t t = 1; t < losses.size(); ++t) {
        const std::size_t lo = t > window ? t - window : 0;
        buf.assign(losses.begin() + long(lo), losses.begin() + long(t));
        const std::size_t mid = buf.size() / 2;
        std::nth_element(buf.begin(), buf.begin() + long(mid), buf.end());
        const double baseline = buf[mid];
        if (losses[t] - baseline > k * sigma_ref) {
            if (++streak >= persistence) alarms.push_back(t);
        } else {
            streak = 0;
        }
    }
    return alarms;
}

}  // namespace qkdline::losscontrol
