#include "qkdline/secrecy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qkdline/math.hpp"

namespace qkdline::secrecy {

double DiagonalState::mean() const {
    double m = 0.0;
    for (std::size_t n = 0; n < probs.size(); ++n) m += double(n) * probs[n];
    return m;
}

double DiagonalState::total_mass() const {
    return std::accumulate(probs.begin(), probs.end(), 0.0);
}

void DiagonalState::validate() const {
    if (probs.empty()) throw std::invalid_argument("diagonal state is empty");
    for (double p : probs)
        if (p < 0.0) throw std::invalid_argument("diagonal state has a negative entry");
    if (std::abs(total_mass() - 1.0) > 1e-9)
        throw std::invalid_argument("diagonal state mass deviates from 1 beyond 1e-9");
}

void SecrecyBudget::validate() const {
    if (!(s_a >= 0.0 && s_a <= 1.0)) throw std::invalid_argument("s_a outside [0,1]");
    if (!(chi >= 0.0 && chi <= 1.0)) throw std::invalid_argument("chi outside [0,1]");
    if (s_a_given_b < 0.0) throw std::invalid_argument("s_a_given_b negative");
    if (f < 1.0) throw std::invalid_argument("error-correction efficiency below 1");
    if (!(p_conc >= 0.0 && p_conc <= 1.0)) throw std::invalid_argument("p_conc outside [0,1]");
    if (raw_length < 0.0) throw std::invalid_argument("raw length negative");
}

DiagonalState eve_state(double r_e, double n_mean) {
    if (!(r_e >= 0.0 && r_e <= 1.0)) throw std::invalid_argument("tap fraction outside [0,1]");
    if (n_mean < 0.0) throw std::invalid_argument("mean photon number negative");
    return DiagonalState{math::poisson_pmf(r_e * n_mean)};
}

double von_neumann_entropy(const DiagonalState& state) {
    state.validate();
    return math::shannon_entropy_bits(state.probs);
}

double holevo_bound(const DiagonalState& rho0, const DiagonalState& rho1, double w0, double w1) {
    if (std::abs(w0 + w1 - 1.0) > 1e-9)
        throw std::invalid_argument("posterior weights must sum to 1");
    if (w0 < 0.0 || w1 < 0.0) throw std::invalid_argument("posterior weights must be nonnegative");
    rho0.validate();
    rho1.validate();
    const std::size_t n = std::max(rho0.probs.size(), rho1.probs.size());
    std::vector<double> mixed(n, 0.0);
    for (std::size_t i = 0; i < rho0.probs.size(); ++i) mixed[i] += w0 * rho0.probs[i];
    for (std::size_t i = 0; i < rho1.probs.size(); ++i) mixed[i] += w1 * rho1.probs[i];
    const double chi = math::shannon_entropy_bits(mixed) -
                       w0 * math::shannon_entropy_bits(rho0.probs) -
                       w1 * math::shannon_entropy_bits(rho1.probs);
    return std::max(0.0, chi);
}

double state_overlap(double n0, double n1, double r_e) {
    if (n0 < 0.0 || n1 < 0.0) throw std::invalid_argument("mean photon numbers must be >= 0");
    const double d = std::sqrt(n0) - std::sqrt(n1);
    return std::exp(-r_e * d * d);
}

double photons_from_energy(double energy_joules, double wavelength_nm) {
    if (energy_joules < 0.0) throw std::invalid_argument("pulse energy negative");
    if (wavelength_nm <= 0.0) throw std::invalid_argument("wavelength must be positive");
    return energy_joules * (wavelength_nm * 1e-9) / (math::planck_h * math::speed_of_light);
}

double energy_from_photons(double photons, double wavelength_nm) {
    if (photons < 0.0) throw std::invalid_argument("photon number negative");
    if (wavelength_nm <= 0.0) throw std::invalid_argument("wavelength must be positive");
    return photons * math::planck_h * math::speed_of_light / (wavelength_nm * 1e-9);
}

KeyLengthVerdict final_key_length(const SecrecyBudget& budget) {
    budget.validate();
    const double bits =
        budget.p_conc * budget.raw_length *
        (budget.s_a - budget.f * budget.s_a_given_b - budget.chi);
    return KeyLengthVerdict{bits > 0.0, bits};
}

}  // namespace qkdline::secrecy
