#pragma once

#include <vector>

namespace qkdline::secrecy {

// Phase randomization leaves the tapped states diagonal in the Fock basis,
// so a state is just a truncated probability vector over photon number.
struct DiagonalState {
    std::vector<double> probs;

    double mean() const;
    double total_mass() const;
    void validate() const;
};

struct SecrecyBudget {
    double s_a = 0.0;          // entropy of the sent bit given conclusive outcome, bits
    double s_a_given_b = 0.0;  // residual entropy after Bob's announcement, bits
    double chi = 0.0;          // Holevo bound on the tap, bits
    double f = 1.0;            // error-correction efficiency, >= 1
    double p_conc = 0.0;       // conclusive-outcome probability
    double raw_length = 0.0;   // raw sequence length, bits

    void validate() const;
};

struct KeyLengthVerdict {
    bool secure = false;
    double bits = 0.0;  // signed budget; meaningful as a key length only when secure
};

DiagonalState eve_state(double r_e, double n_mean);

double von_neumann_entropy(const DiagonalState& state);

double holevo_bound(const DiagonalState& rho0, const DiagonalState& rho1, double w0, double w1);

double state_overlap(double n0, double n1, double r_e);

double photons_from_energy(double energy_joules, double wavelength_nm);
double energy_from_photons(double photons, double wavelength_nm);

KeyLengthVerdict final_key_length(const SecrecyBudget& budget);

}  // namespace qkdline::secrecy
