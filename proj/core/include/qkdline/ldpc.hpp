#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qkdline/bitkey.hpp"

namespace qkdline::postprocess {

// Error-correction disclosure per key bit: f * h2(p_err).
double ec_leakage(double f, double p_err);

// Quasi-regular parity-check code: every column has weight 3, row weights
// differ by at most one. Construction is deterministic in (length, rate, seed).
class LdpcCode {
public:
    static LdpcCode make(std::size_t length, double rate, std::uint64_t seed);

    std::size_t length() const { return n_; }
    std::size_t syndrome_length() const { return m_; }
    double rate() const { return 1.0 - double(m_) / double(n_); }
    // Largest BER the syndrome budget can cover: h2(p) < 1 - rate.
    double correctable_ber() const;

    const std::vector<std::vector<std::uint32_t>>& check_vars() const { return check_vars_; }
    const std::vector<std::vector<std::uint32_t>>& var_checks() const { return var_checks_; }

    BitKey syndrome(const BitKey& word) const;

private:
    std::size_t n_ = 0;
    std::size_t m_ = 0;
    std::vector<std::vector<std::uint32_t>> check_vars_;
    std::vector<std::vector<std::uint32_t>> var_checks_;
};

struct DecodeResult {
    BitKey word;
    bool converged = false;
    std::size_t iterations = 0;
};

// Belief-propagation syndrome decoding: finds an error pattern of (approximate)
// per-bit probability p_err whose syndrome matches `target`.
DecodeResult decode_syndrome(const LdpcCode& code, const BitKey& target, double p_err,
                             std::size_t max_iterations = 50);

struct ReconcileResult {
    BitKey corrected;
    std::size_t disclosed_bits = 0;
    bool success = false;
    std::size_t iterations = 0;
};

// Aligns bob's block to alice's by exchanging the syndrome difference, then
// verifies with a 64-bit Toeplitz hash (counted into disclosed_bits).
ReconcileResult reconcile(const BitKey& alice, const BitKey& bob, const LdpcCode& code,
                          double p_err_estimate, std::uint64_t verify_seed);

}  // namespace qkdline::postprocess
