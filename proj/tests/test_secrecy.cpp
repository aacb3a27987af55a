#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qkdline/math.hpp"
#include "qkdline/secrecy.hpp"
#include "reference.hpp"

using namespace qkdline;
using namespace qkdline::secrecy;

TEST_CASE("tapped state is a normalized count distribution") {
    const DiagonalState vacuum = eve_state(0.0, 12300.0);
    REQUIRE(vacuum.probs.size() >= 1);
    CHECK(vacuum.probs[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(vacuum.mean() == doctest::Approx(0.0));

    const DiagonalState tapped = eve_state(0.006, 12300.0);
    CHECK(std::fabs(tapped.mean() - 73.8) < 1e-6);
    CHECK(std::fabs(tapped.total_mass() - 1.0) < 1e-9);

    const DiagonalState mid = eve_state(0.02, 10000.0);  // mean 200
    CHECK(std::fabs(mid.total_mass() - 1.0) < 1e-9);

    const auto ref = testref::poisson_probs(73.8L);
    for (std::size_t k = 0; k < std::min(ref.size(), tapped.probs.size()); ++k)
        CHECK(std::fabs(tapped.probs[k] - double(ref[k])) < 1e-12);

    CHECK_THROWS(eve_state(-0.1, 100.0));
    CHECK_THROWS(eve_state(1.5, 100.0));
}

TEST_CASE("entropy of simple states") {
    CHECK(von_neumann_entropy(DiagonalState{{1.0}}) == doctest::Approx(0.0));
    CHECK(von_neumann_entropy(DiagonalState{{0.5, 0.5}}) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("entropy matches the direct-summation oracle") {
    for (double mean : {0.5, 5.0, 73.8, 321.0}) {
        const double lib = von_neumann_entropy(eve_state(1.0, mean));
        const double ref = double(testref::poisson_entropy_bits((long double)mean));
        CHECK(std::fabs(lib - ref) < 1e-9);
    }
    std::mt19937_64 rng(201);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> p(2 + rng() % 64);
        double s = 0.0;
        for (double& v : p) s += (v = u(rng) + 1e-12);
        for (double& v : p) v /= s;
        const double lib = von_neumann_entropy(DiagonalState{p});
        CHECK(std::fabs(lib - double(testref::shannon_bits(p))) < 1e-9);
    }
}

TEST_CASE("information bound degenerate cases") {
    const DiagonalState s = eve_state(0.004, 12300.0);
    CHECK(holevo_bound(s, s, 0.5, 0.5) == doctest::Approx(0.0).epsilon(1e-12));
    const DiagonalState t = eve_state(0.004, 13700.0);
    CHECK(holevo_bound(s, t, 1.0, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(holevo_bound(s, t, 0.0, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS(holevo_bound(s, t, 0.7, 0.7));
}

TEST_CASE("information bound equals the mixture-entropy oracle") {
    const double r = 0.006, n0 = 12300.0, n1 = 13700.0;
    const double lib = holevo_bound(eve_state(r, n0), eve_state(r, n1), 0.5, 0.5);

    const auto p0 = testref::poisson_probs((long double)(r * n0));
    const auto p1 = testref::poisson_probs((long double)(r * n1));
    const std::size_t len = std::max(p0.size(), p1.size());
    long double mix = 0.0L;
    std::vector<long double> m(len, 0.0L);
    for (std::size_t k = 0; k < len; ++k) {
        const long double a = k < p0.size() ? p0[k] : 0.0L;
        const long double b = k < p1.size() ? p1[k] : 0.0L;
        m[k] = 0.5L * a + 0.5L * b;
    }
    long double hm = 0.0L, h0 = 0.0L, h1 = 0.0L;
    for (long double q : m)
        if (q > 0.0L) hm -= q * std::log2l(q);
    for (long double q : p0)
        if (q > 0.0L) h0 -= q * std::log2l(q);
    for (long double q : p1)
        if (q > 0.0L) h1 -= q * std::log2l(q);
    mix = hm - 0.5L * h0 - 0.5L * h1;
    CHECK(std::fabs(lib - double(mix)) < 1e-9);
}

TEST_CASE("information bound stays within its envelope") {
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        const double r = 0.05 * u(rng);
        const double n0 = 20000.0 * u(rng);
        const double n1 = 20000.0 * u(rng);
        const double w0 = u(rng);
        const double chi = holevo_bound(eve_state(r, n0), eve_state(r, n1), w0, 1.0 - w0);
        CHECK(chi >= -1e-12);
        CHECK(chi <= math::binary_entropy(w0) + 1e-9);
    }
}

TEST_CASE("information bound grows with the tapped fraction") {
    double prev = -1.0;
    for (int i = 0; i <= 10; ++i) {
        const double r = 0.001 * double(i);
        const double chi =
            holevo_bound(eve_state(r, 12300.0), eve_state(r, 13700.0), 0.5, 0.5);
        CHECK(chi >= prev - 1e-12);
        prev = chi;
    }
}

TEST_CASE("state overlap closed form") {
    CHECK(std::fabs(state_overlap(12300.0, 13700.0, 0.006) - 0.797) < 0.005);
    CHECK(state_overlap(12300.0, 12300.0, 0.3) == doctest::Approx(1.0));
    CHECK(state_overlap(12300.0, 13700.0, 0.0) == doctest::Approx(1.0));
    const double direct = std::exp(-0.006 * std::pow(std::sqrt(13700.0) - std::sqrt(12300.0), 2));
    CHECK(state_overlap(12300.0, 13700.0, 0.006) == doctest::Approx(direct).epsilon(1e-12));

    double prev = 2.0;
    for (double r : {0.0, 0.001, 0.01, 0.1, 1.0}) {
        const double o = state_overlap(12300.0, 13700.0, r);
        CHECK(o < prev);
        prev = o;
    }
}

TEST_CASE("photon-energy conversion") {
    const double h = math::planck_h, c = math::speed_of_light;
    const double lambda_m = 1550e-9;
    const double e_single = h * c / lambda_m;
    CHECK(photons_from_energy(e_single, 1550.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(photons_from_energy(0.0, 1550.0) == doctest::Approx(0.0));
    CHECK(energy_from_photons(12300.0, 1530.33) == doctest::Approx(1.597e-15).epsilon(0.002));
    CHECK(photons_from_energy(energy_from_photons(500.0, 1310.0), 1310.0) ==
          doctest::Approx(500.0).epsilon(1e-12));
    CHECK_THROWS(photons_from_energy(-1.0, 1550.0));
    CHECK_THROWS(photons_from_energy(1.0, 0.0));
}

TEST_CASE("overlap vanishes in the classical limit") {
    // Fixed pulse energies; shrinking the quantum of action scales photon
    // numbers up and drives the states orthogonal.
    const double e0 = energy_from_photons(12300.0, 1550.0);
    const double e1 = energy_from_photons(13700.0, 1550.0);
    double prev = 2.0;
    for (double k : {1.0, 10.0, 100.0, 10000.0}) {
        const double n0 = k * photons_from_energy(e0, 1550.0);
        const double n1 = k * photons_from_energy(e1, 1550.0);
        const double o = state_overlap(n0, n1, 0.006);
        CHECK(o < prev);
        prev = o;
    }
    CHECK(prev < 1e-6);
}

TEST_CASE("key budget arithmetic and verdicts") {
    SecrecyBudget b;
    b.s_a = 1.0;
    b.f = 1.15;
    b.s_a_given_b = math::binary_entropy(0.05);
    b.chi = 0.1;
    b.p_conc = 0.01;
    b.raw_length = 1e6;
    const KeyLengthVerdict v = final_key_length(b);
    const double direct = 0.01 * 1e6 * (1.0 - 1.15 * math::binary_entropy(0.05) - 0.1);
    REQUIRE(v.secure);
    CHECK(v.bits == doctest::Approx(direct).epsilon(1e-12));

    SecrecyBudget lossless = b;
    lossless.chi = 0.0;
    lossless.s_a_given_b = 0.0;
    CHECK(final_key_length(lossless).bits == doctest::Approx(0.01 * 1e6).epsilon(1e-12));

    SecrecyBudget hopeless = b;
    hopeless.chi = 0.9;  // chi + f*s_a_given_b >= s_a
    CHECK_FALSE(final_key_length(hopeless).secure);

    SecrecyBudget doubled = b;
    doubled.raw_length = 2e6;
    CHECK(final_key_length(doubled).bits == doctest::Approx(2.0 * v.bits).epsilon(1e-12));

    SecrecyBudget worse = b;
    worse.chi = 0.2;
    CHECK(final_key_length(worse).bits < v.bits);
    SecrecyBudget sloppier = b;
    sloppier.f = 1.3;
    CHECK(final_key_length(sloppier).bits < v.bits);

    SecrecyBudget invalid = b;
    invalid.f = 0.9;
    CHECK_THROWS(final_key_length(invalid));
}
