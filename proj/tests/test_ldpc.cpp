#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qkdline/ldpc.hpp"
#include "qkdline/math.hpp"
#include "reference.hpp"

using namespace qkdline;
using namespace qkdline::postprocess;

namespace {

BitKey flip_fraction(const BitKey& key, double p, std::mt19937_64& rng) {
    BitKey out = key;
    std::bernoulli_distribution coin(p);
    for (std::size_t i = 0; i < key.size(); ++i)
        if (coin(rng)) out.flip(i);
    return out;
}

}  // namespace

TEST_CASE("disclosure accounting formula") {
    CHECK(ec_leakage(1.15, 0.0) == doctest::Approx(0.0));
    CHECK(ec_leakage(1.0, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ec_leakage(1.15, 0.05) ==
          doctest::Approx(1.15 * math::binary_entropy(0.05)).epsilon(1e-12));
    double prev = -1.0;
    for (double p = 0.0; p <= 0.5; p += 0.05) {
        const double v = ec_leakage(1.2, p);
        CHECK(v >= prev - 1e-12);
        prev = v;
    }
    CHECK(ec_leakage(1.4, 0.1) > ec_leakage(1.1, 0.1));
    CHECK_THROWS(ec_leakage(0.9, 0.1));
}

TEST_CASE("code construction invariants") {
    for (std::size_t n : {1000u, 4000u}) {
        const LdpcCode code = LdpcCode::make(n, 0.2, 17);
        CHECK(code.length() == n);
        CHECK(code.rate() == doctest::Approx(0.2).epsilon(0.01));
        CHECK(code.syndrome_length() == n - std::size_t(std::lround(0.2 * double(n))));

        std::vector<std::size_t> col_weight(n, 0);
        std::size_t min_row = std::size_t(-1), max_row = 0;
        for (const auto& row : code.check_vars()) {
            min_row = std::min(min_row, row.size());
            max_row = std::max(max_row, row.size());
            for (auto v : row) {
                REQUIRE(v < n);
                ++col_weight[v];
            }
        }
        for (std::size_t w : col_weight) CHECK(w == 3);
        CHECK(max_row - min_row <= 1);

        const LdpcCode again = LdpcCode::make(n, 0.2, 17);
        CHECK(again.check_vars() == code.check_vars());
    }
    CHECK(LdpcCode::make(1000, 0.2, 1).correctable_ber() ==
          doctest::Approx(math::binary_entropy_inv(0.8)).epsilon(1e-9));
}

TEST_CASE("syndrome is linear") {
    const LdpcCode code = LdpcCode::make(1200, 0.25, 19);
    std::mt19937_64 rng(401);
    const BitKey a = testref::random_key(1200, rng);
    const BitKey b = testref::random_key(1200, rng);
    BitKey axb = a;
    for (std::size_t w = 0; w < axb.words().size(); ++w) axb.words()[w] ^= b.words()[w];
    BitKey sx = code.syndrome(a);
    const BitKey sb = code.syndrome(b);
    for (std::size_t w = 0; w < sx.words().size(); ++w) sx.words()[w] ^= sb.words()[w];
    CHECK(code.syndrome(axb) == sx);
    CHECK(code.syndrome(BitKey(1200)).popcount() == 0);
}

TEST_CASE("error-free blocks pass straight through") {
    const LdpcCode code = LdpcCode::make(1000, 0.2, 23);
    std::mt19937_64 rng(402);
    const BitKey alice = testref::random_key(1000, rng);
    const ReconcileResult res = reconcile(alice, alice, code, 0.01, 99);
    REQUIRE(res.success);
    CHECK(res.corrected == alice);
    CHECK(res.disclosed_bits == code.syndrome_length() + 64);
    CHECK(res.iterations <= 2);
}

TEST_CASE("single flipped bit is corrected quickly") {
    const LdpcCode code = LdpcCode::make(1000, 0.2, 29);
    std::mt19937_64 rng(403);
    for (int t = 0; t < 10; ++t) {
        const BitKey alice = testref::random_key(1000, rng);
        BitKey bob = alice;
        bob.flip(rng() % 1000);
        const ReconcileResult res = reconcile(alice, bob, code, 0.002, 7 + t);
        REQUIRE(res.success);
        CHECK(res.corrected == alice);
        CHECK(res.iterations <= 50);
    }
}

TEST_CASE("five percent channel error is reliably reconciled") {
    const LdpcCode code = LdpcCode::make(4000, 0.2, 31);
    std::mt19937_64 rng(404);
    int success = 0;
    const int blocks = 30;
    for (int t = 0; t < blocks; ++t) {
        const BitKey alice = testref::random_key(4000, rng);
        const BitKey bob = flip_fraction(alice, 0.05, rng);
        const ReconcileResult res = reconcile(alice, bob, code, 0.05, 1000 + t);
        if (res.success) {
            CHECK(res.corrected == alice);
            ++success;
        }
    }
    CHECK(success >= blocks * 9 / 10);
}

TEST_CASE("insufficient rate is refused up front") {
    const LdpcCode code = LdpcCode::make(1000, 0.5, 37);
    std::mt19937_64 rng(405);
    const BitKey alice = testref::random_key(1000, rng);
    CHECK_THROWS_WITH_AS(reconcile(alice, alice, code, 0.25, 1),
                         doctest::Contains("rate insufficient"), std::runtime_error);
    CHECK_THROWS(reconcile(alice, testref::random_key(999, rng), code, 0.01, 1));
    CHECK_THROWS(reconcile(testref::random_key(500, rng), testref::random_key(500, rng), code,
                           0.01, 1));
}

TEST_CASE("verification never lets a wrong block through") {
    const LdpcCode code = LdpcCode::make(1000, 0.2, 41);
    std::mt19937_64 rng(406);
    int failures = 0;
    for (int t = 0; t < 100; ++t) {
        const BitKey alice = testref::random_key(1000, rng);
        // Error weight well past what the decoder can resolve: most blocks
        // must come back failed, and a failed block exposes nothing. Any
        // block that does verify has to be exactly alice's.
        const BitKey bob = flip_fraction(alice, 0.30, rng);
        const ReconcileResult res = reconcile(alice, bob, code, 0.24, 2000 + t);
        if (!res.success) {
            ++failures;
            CHECK(res.corrected.empty());
        } else {
            CHECK(res.corrected == alice);
        }
    }
    CHECK(failures > 0);
}

TEST_CASE("single-bit mutations of a finished block are always caught") {
    std::mt19937_64 rng(407);
    for (int t = 0; t < 200; ++t) {
        const BitKey block = testref::random_key(1000, rng);
        BitKey mutated = block;
        mutated.flip(rng() % 1000);
        const ToeplitzSeed h = ToeplitzSeed::random(64, 1000, rng());
        CHECK(privacy_amplify(block, 64, h) != privacy_amplify(mutated, 64, h));
    }
}
