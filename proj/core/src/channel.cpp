#include "qkdline/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "qkdline/math.hpp"
#include "qkdline/rng.hpp"

namespace qkdline::channel {

namespace {

int check_bit(int bit) {
    if (bit != 0 && bit != 1) throw std::invalid_argument("bit must be 0 or 1");
    return bit;
}

}  // namespace

double LineModel::total_length_km() const {
    double km = 0.0;
    for (const auto& e : elements)
        if (const auto* s = std::get_if<FiberSpan>(&e)) km += s->length_km;
    return km;
}

std::size_t LineModel::amplifier_count() const {
    std::size_t n = 0;
    for (const auto& e : elements)
        if (std::holds_alternative<Amplifier>(e)) ++n;
    return n;
}

double LineModel::total_loss_db() const {
    // Net figure: fiber attenuation less inline gain, so a compensated line
    // comes out at zero.
    double db = 0.0;
    for (const auto& e : elements) {
        if (const auto* s = std::get_if<FiberSpan>(&e))
            db += s->length_km * s->attenuation_db_per_km;
        else if (const auto* a = std::get_if<Amplifier>(&e))
            db -= a->gain_db;
    }
    return db;
}

void LineModel::validate() const {
    if (elements.empty()) throw std::invalid_argument("line has no elements");
    if (wavelength_nm <= 0) throw std::invalid_argument("wavelength must be positive");
    for (const auto& e : elements) {
        if (const auto* s = std::get_if<FiberSpan>(&e)) {
            if (s->length_km <= 0) throw std::invalid_argument("span length must be positive");
            if (s->attenuation_db_per_km < 0)
                throw std::invalid_argument("span attenuation must be nonnegative");
        } else {
            const auto& a = std::get<Amplifier>(e);
            if (a.gain_db < 0) throw std::invalid_argument("amplifier gain must be nonnegative");
            if (a.ase_noise_photons < 0)
                throw std::invalid_argument("ASE noise must be nonnegative");
        }
    }
}

double PulseSpec::mean_photons(int bit) const { return check_bit(bit) == 0 ? n0 : n1; }

void PulseSpec::validate() const {
    if (!(n0 >= 0) || !(n1 > n0))
        throw std::invalid_argument("pulse spec requires 0 <= n0 < n1");
}

void EveTap::validate() const {
    if (!(r_e >= 0.0 && r_e <= 1.0))
        throw std::invalid_argument("tap fraction must lie in [0, 1]");
}

double Pmf::total_mass() const { return std::accumulate(probs.begin(), probs.end(), 0.0); }

double Pmf::mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) m += values[i] * probs[i];
    return m;
}

DetectionModel DetectionModel::poisson(double mean0, double mean1) {
    if (mean0 < 0 || mean1 < 0) throw std::invalid_argument("Poisson means must be nonnegative");
    DetectionModel m;
    m.variant_ = PoissonIdeal{mean0, mean1};
    return m;
}

DetectionModel DetectionModel::gaussian(double v0, double sigma0, double v1, double sigma1,
                                        double volts_per_photon) {
    if (sigma0 <= 0 || sigma1 <= 0)
        throw std::invalid_argument("Gaussian scale parameters must be positive");
    if (volts_per_photon <= 0) throw std::invalid_argument("volts-per-photon must be positive");
    DetectionModel m;
    m.variant_ = GaussianCalibrated{v0, sigma0, v1, sigma1, volts_per_photon};
    return m;
}

double DetectionModel::mean(int bit) const {
    check_bit(bit);
    if (is_poisson()) {
        const auto& p = as_poisson();
        return bit == 0 ? p.mean0 : p.mean1;
    }
    const auto& g = as_gaussian();
    return bit == 0 ? g.v0 : g.v1;
}

double DetectionModel::stddev(int bit) const {
    check_bit(bit);
    if (is_poisson()) return std::sqrt(mean(bit));
    const auto& g = as_gaussian();
    return bit == 0 ? g.sigma0 : g.sigma1;
}

double DetectionModel::quantile(int bit, double p) const {
    check_bit(bit);
    if (is_poisson()) return math::poisson_quantile(p, mean(bit));
    return math::normal_quantile(p, mean(bit), stddev(bit));
}

double DetectionModel::interval_mass(int bit, double lo, double hi) const {
    check_bit(bit);
    if (hi < lo) return 0.0;
    if (is_poisson()) {
        const double km_hi = std::floor(hi);
        const double km_lo = std::ceil(lo);
        if (km_hi < 0 || km_hi < km_lo) return 0.0;
        const double mean = this->mean(bit);
        const double upper = math::poisson_cdf(km_hi, mean);
        const double lower = km_lo >= 1 ? math::poisson_cdf(km_lo - 1, mean) : 0.0;
        return std::max(0.0, upper - lower);
    }
    return std::max(0.0, math::normal_cdf(hi, mean(bit), stddev(bit)) -
                             math::normal_cdf(lo, mean(bit), stddev(bit)));
}

Pmf DetectionModel::analytic_pmf(int bit) const {
    check_bit(bit);
    if (is_poisson()) {
        const double mean = this->mean(bit);
        const std::size_t n_max = math::poisson_truncation(mean);
        Pmf pmf;
        pmf.values.resize(n_max + 1);
        for (std::size_t k = 0; k <= n_max; ++k) pmf.values[k] = double(k);
        pmf.probs = math::poisson_pmf(mean);
        if (pmf.total_mass() < 1.0 - 1e-9)
            throw std::runtime_error("Poisson truncation grid too small");
        return pmf;
    }
    const double m = mean(bit), s = stddev(bit);
    return analytic_pmf(bit, m - 10 * s, m + 10 * s, 2001);
}

Pmf DetectionModel::analytic_pmf(int bit, double lo, double hi, std::size_t bins) const {
    check_bit(bit);
    if (bins < 2) throw std::invalid_argument("pmf grid needs at least 2 bins");
    if (!(hi > lo)) throw std::invalid_argument("pmf grid needs hi > lo");
    Pmf pmf;
    pmf.values.resize(bins);
    pmf.probs.resize(bins);
    const double step = (hi - lo) / double(bins);
    for (std::size_t i = 0; i < bins; ++i) {
        const double a = lo + step * double(i);
        const double b = a + step;
        pmf.values[i] = 0.5 * (a + b);
        // Half-open bins [a, b); the final bin also absorbs its right edge.
        pmf.probs[i] = interval_mass(bit, a, i + 1 == bins ? b : std::nexttoward(b, a));
    }
    if (pmf.total_mass() < 1.0 - 1e-9)
        throw std::runtime_error("pmf grid covers too little probability mass");
    return pmf;
}

std::vector<double> DetectionModel::sample(int bit, std::size_t count, std::uint64_t seed) const {
    check_bit(bit);
    std::mt19937_64 rng(seed);
    std::vector<double> out(count);
    if (is_poisson()) {
        const double mean = this->mean(bit);
        if (mean == 0.0) {
            std::fill(out.begin(), out.end(), 0.0);
            return out;
        }
        std::poisson_distribution<long long> dist(mean);
        for (auto& v : out) v = double(dist(rng));
        return out;
    }
    std::normal_distribution<double> dist(mean(bit), stddev(bit));
    for (auto& v : out) v = dist(rng);
    return out;
}

double end_to_end_mean(const LineModel& line, double n_in) {
    if (n_in < 0) throw std::invalid_argument("input photon number must be nonnegative");
    line.validate();
    double n = n_in;
    for (const auto& e : line.elements) {
        if (const auto* s = std::get_if<FiberSpan>(&e)) {
            n *= std::pow(10.0, -s->length_km * s->attenuation_db_per_km / 10.0);
        } else {
            const auto& a = std::get<Amplifier>(e);
            n = n * std::pow(10.0, a.gain_db / 10.0) + a.ase_noise_photons;
        }
    }
    return n * std::pow(10.0, line.receiver_gain_db / 10.0);
}

std::vector<double> sample_bob(const DetectionModel& model, int bit, std::size_t count,
                               std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("sample count must be at least 1");
    return model.sample(bit, count, seed);
}

std::vector<std::uint64_t> sample_eve(const PulseSpec& spec, const EveTap& tap, int bit,
                                      std::size_t count, std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("sample count must be at least 1");
    tap.validate();
    const double mean = tap.r_e * spec.mean_photons(bit);
    std::vector<std::uint64_t> out(count, 0);
    if (mean == 0.0) return out;
    std::mt19937_64 rng(seed);
    std::poisson_distribution<long long> dist(mean);
    for (auto& v : out) v = std::uint64_t(dist(rng));
    return out;
}

LineModel line_from_config(const ConfigMap& cfg) {
    LineModel line;
    line.wavelength_nm = cfg.get_double("wavelength", 1550.0);
    line.receiver_gain_db = cfg.get_double("receiver_gain", 0.0);
    for (const auto& entry : cfg.entries()) {
        if (entry.key == "span") {
            const auto v = ConfigMap::tokens_as_doubles(entry.value);
            if (v.size() != 2)
                throw std::runtime_error(cfg.origin() + ":" + std::to_string(entry.line) +
                                         ": span expects 'length_km attenuation_db_per_km'");
            line.elements.push_back(FiberSpan{v[0], v[1]});
        } else if (entry.key == "amp") {
            const auto v = ConfigMap::tokens_as_doubles(entry.value);
            if (v.size() != 2)
                throw std::runtime_error(cfg.origin() + ":" + std::to_string(entry.line) +
                                         ": amp expects 'gain_db ase_noise_photons'");
            line.elements.push_back(Amplifier{v[0], v[1]});
        }
    }
    line.validate();
    return line;
}

PulseSpec pulse_from_config(const ConfigMap& cfg) {
    PulseSpec spec;
    spec.n0 = cfg.require_double("n0");
    spec.n1 = cfg.require_double("n1");
    spec.pulse_duration_ns = cfg.get_double("pulse_duration", 10.0);
    spec.validate();
    return spec;
}

DetectionModel detection_from_config(const ConfigMap& cfg, const LineModel& line,
                                     const PulseSpec& pulse) {
    const std::string kind = cfg.get_string("detection", "poisson");
    if (kind == "poisson") {
        const double mean0 = cfg.has("mean0") ? cfg.require_double("mean0")
                                              : end_to_end_mean(line, pulse.n0);
        const double mean1 = cfg.has("mean1") ? cfg.require_double("mean1")
                                              : end_to_end_mean(line, pulse.n1);
        return DetectionModel::poisson(mean0, mean1);
    }
    if (kind == "gaussian") {
        return DetectionModel::gaussian(
            cfg.require_double("v0"), cfg.require_double("sigma0"), cfg.require_double("v1"),
            cfg.require_double("sigma1"), cfg.get_double("volts_per_photon", 1.0));
    }
    throw std::runtime_error(cfg.origin() + ": unknown detection variant '" + kind + "'");
}

void write_samples_csv(const std::filesystem::path& path, const std::vector<int>& bits,
                       const std::vector<double>& values) {
    if (bits.size() != values.size())
        throw std::invalid_argument("samples CSV: bits/values size mismatch");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open samples CSV for writing: " + path.string());
    out << "index,bit,value\n";
    for (std::size_t i = 0; i < bits.size(); ++i)
        out << i << ',' << bits[i] << ',' << values[i] << '\n';
}

}  // namespace qkdline::channel
