#include "qkdline/math.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/poisson.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace qkdline::math {

double binary_entropy(double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("binary_entropy: p outside [0,1]");
    if (p == 0.0 || p == 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double binary_entropy_inv(double y_bits) {
    if (y_bits < 0.0 || y_bits > 1.0)
        throw std::invalid_argument("binary_entropy_inv: y outside [0,1]");
    // h2 is flat around 1/2, so a comparison-based search cannot pin the
    // endpoint itself; return it exactly.
    if (y_bits == 1.0) return 0.5;
    double lo = 0.0, hi = 0.5;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (binary_entropy(mid) < y_bits ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double shannon_entropy_bits(std::span<const double> probs) {
    double h = 0.0;
    for (double p : probs) {
        if (p < 0.0) throw std::invalid_argument("shannon_entropy_bits: negative probability");
        if (p > 0.0) h -= p * std::log2(p);
    }
    return h;
}

std::size_t poisson_truncation(double mean) {
    if (mean < 0.0) throw std::invalid_argument("poisson_truncation: negative mean");
    return static_cast<std::size_t>(std::ceil(mean + 12.0 * std::sqrt(mean) + 30.0));
}

std::vector<double> poisson_pmf(double mean) {
    const std::size_t n_max = poisson_truncation(mean);
    std::vector<double> pmf(n_max + 1, 0.0);
    if (mean == 0.0) {
        pmf[0] = 1.0;
        return pmf;
    }
    const std::size_t mode = static_cast<std::size_t>(mean);
    const double log_pm = mode * std::log(mean) - mean - std::lgamma(double(mode) + 1.0);
    pmf[mode] = std::exp(log_pm);
    for (std::size_t k = mode; k > 0; --k) pmf[k - 1] = pmf[k] * double(k) / mean;
    for (std::size_t k = mode + 1; k <= n_max; ++k) pmf[k] = pmf[k - 1] * mean / double(k);
    return pmf;
}

double poisson_cdf(double k, double mean) {
    if (mean < 0.0) throw std::invalid_argument("poisson_cdf: negative mean");
    if (k < 0.0) return 0.0;
    if (mean == 0.0) return 1.0;
    // P[X <= k] = Q(floor(k)+1, mean)
    return boost::math::gamma_q(std::floor(k) + 1.0, mean);
}

double poisson_quantile(double p, double mean) {
    // Smallest k with P[X <= k] >= p; the default policy rounds outwards and
    // can come back one short.
    using policy = boost::math::policies::policy<
        boost::math::policies::discrete_quantile<boost::math::policies::integer_round_up>>;
    boost::math::poisson_distribution<double, policy> dist(mean > 0.0 ? mean : 1e-300);
    return boost::math::quantile(dist, p);
}

double normal_cdf(double x, double mu, double sigma) {
    return 0.5 * std::erfc(-(x - mu) / (sigma * std::sqrt(2.0)));
}

double normal_quantile(double p, double mu, double sigma) {
    boost::math::normal_distribution<double> dist(mu, sigma);
    return boost::math::quantile(dist, p);
}

double gamma_q(double a, double x) { return boost::math::gamma_q(a, x); }

}  // namespace qkdline::math
