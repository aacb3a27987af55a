#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qkdline::math {

inline constexpr double planck_h = 6.62607015e-34;  // J*s
inline constexpr double speed_of_light = 299792458.0;  // m/s
inline constexpr double fiber_group_index = 1.468;

/// Binary entropy h2(p) in bits, with 0*log(0) = 0.
double binary_entropy(double p);

/// Inverse of h2 on [0, 1/2]; binary_entropy(binary_entropy_inv(y)) == y.
double binary_entropy_inv(double y_bits);

/// Shannon entropy of a probability vector, in bits. Entries < 0 are rejected.
double shannon_entropy_bits(std::span<const double> probs);

/// Fock/count truncation index: tail mass of Poisson(mean) beyond this is < 1e-12.
std::size_t poisson_truncation(double mean);

/// Poisson pmf over k = 0..poisson_truncation(mean), evaluated by outward
/// recurrence from the mode (stable for large means).
std::vector<double> poisson_pmf(double mean);

/// P[Poisson(mean) <= k], exact via the regularized upper incomplete gamma.
double poisson_cdf(double k, double mean);

/// Smallest integer k with poisson_cdf(k, mean) >= p.
double poisson_quantile(double p, double mean);

double normal_cdf(double x, double mu = 0.0, double sigma = 1.0);
double normal_quantile(double p, double mu = 0.0, double sigma = 1.0);

/// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);

}  // namespace qkdline::math
