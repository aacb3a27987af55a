#include "qkdline/ldpc.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "qkdline/math.hpp"
#include "qkdline/toeplitz.hpp"

namespace qkdline::postprocess {

namespace {

constexpr double kLlrClamp = 30.0;
constexpr std::size_t kColumnWeight = 3;
constexpr std::size_t kVerifyHashBits = 64;

}  // namespace

double ec_leakage(double f, double p_err) {
    if (f < 1.0) throw std::invalid_argument("ec_leakage: efficiency must be >= 1");
    return f * math::binary_entropy(p_err);
}

double LdpcCode::correctable_ber() const { return math::binary_entropy_inv(1.0 - rate()); }

LdpcCode LdpcCode::make(std::size_t length, double rate, std::uint64_t seed) {
    if (length < 8) throw std::invalid_argument("LDPC block too short");
    if (!(rate > 0.0 && rate < 1.0)) throw std::invalid_argument("LDPC rate outside (0,1)");
    LdpcCode code;
    code.n_ = length;
    code.m_ = std::size_t(std::llround(double(length) * (1.0 - rate)));
    if (code.m_ < kColumnWeight || code.m_ >= length)
        throw std::invalid_argument("LDPC rate leaves an unusable syndrome length");

    // One slot per edge; rows receive floor/ceil(3n/m) slots so weights are
    // as even as possible, then a seeded shuffle assigns them to columns.
    const std::size_t edges = kColumnWeight * code.n_;
    std::vector<std::uint32_t> slots;
    slots.reserve(edges);
    for (std::size_t e = 0; e < edges; ++e)
        slots.push_back(std::uint32_t((e * code.m_) / edges));
    std::mt19937_64 rng(seed);
    std::shuffle(slots.begin(), slots.end(), rng);

    code.var_checks_.assign(code.n_, {});
    code.check_vars_.assign(code.m_, {});
    for (std::size_t v = 0; v < code.n_; ++v) {
        auto* column = &slots[v * kColumnWeight];
        // Re-draw duplicated checks within the column from later slots.
        for (std::size_t a = 0; a < kColumnWeight; ++a) {
            bool dup = true;
            std::size_t guard = 0;
            while (dup) {
                dup = false;
                for (std::size_t b = 0; b < a; ++b) dup |= column[b] == column[a];
                if (!dup) break;
                const std::size_t limit = edges - v * kColumnWeight;
                if (++guard > 64 || limit <= kColumnWeight) {
                    // Salvage: walk to any check this column does not touch yet.
                    for (std::uint32_t c = 0; c < code.m_; ++c) {
                        bool used = false;
                        for (std::size_t b = 0; b < kColumnWeight; ++b)
                            used |= b != a && column[b] == c;
                        if (!used) {
                            column[a] = c;
                            break;
                        }
                    }
                    break;
                }
                std::uniform_int_distribution<std::size_t> pick(kColumnWeight, limit - 1);
                std::swap(column[a], column[pick(rng)]);
            }
        }
        for (std::size_t a = 0; a < kColumnWeight; ++a) {
            code.var_checks_[v].push_back(column[a]);
            code.check_vars_[column[a]].push_back(std::uint32_t(v));
        }
    }
    return code;
}

BitKey LdpcCode::syndrome(const BitKey& word) const {
    if (word.size() != n_) throw std::invalid_argument("syndrome: word length mismatch");
    BitKey s(m_);
    for (std::size_t c = 0; c < m_; ++c) {
        bool parity = false;
        for (std::uint32_t v : check_vars_[c]) parity ^= word.get(v);
        if (parity) s.set(c, true);
    }
    return s;
}

DecodeResult decode_syndrome(const LdpcCode& code, const BitKey& target, double p_err,
                             std::size_t max_iterations) {
    if (target.size() != code.syndrome_length())
        throw std::invalid_argument("decode_syndrome: syndrome length mismatch");
    if (!(p_err > 0.0 && p_err < 0.5))
        throw std::invalid_argument("decode_syndrome: p_err outside (0, 0.5)");

    const auto& cv = code.check_vars();
    const auto& vc = code.var_checks();
    const std::size_t n = code.length(), m = code.syndrome_length();
    const double channel_llr = std::log((1.0 - p_err) / p_err);

    // Messages stored per edge in check-major order.
    std::vector<std::size_t> check_base(m + 1, 0);
    for (std::size_t c = 0; c < m; ++c) check_base[c + 1] = check_base[c] + cv[c].size();
    const std::size_t edges = check_base[m];
    std::vector<double> var_to_check(edges, channel_llr);
    std::vector<double> check_to_var(edges, 0.0);

    // Per variable, the edge slots it owns (var-major view into the arrays).
    std::vector<std::size_t> var_edge(edges);
    {
        std::vector<std::size_t> cursor = check_base;
        std::vector<std::size_t> var_base(n + 1, 0);
        for (std::size_t v = 0; v < n; ++v) var_base[v + 1] = var_base[v] + vc[v].size();
        std::vector<std::size_t> vcur = var_base;
        for (std::size_t c = 0; c < m; ++c)
            for (std::uint32_t v : cv[c]) var_edge[vcur[v]++] = cursor[c]++;
    }

    DecodeResult res;
    res.word = BitKey(n);
    std::vector<double> posterior(n, channel_llr);

    for (std::size_t iter = 1; iter <= max_iterations; ++iter) {
        // Check update: tanh rule with the syndrome bit flipping the sign.
        for (std::size_t c = 0; c < m; ++c) {
            const std::size_t deg = cv[c].size();
            const std::size_t base = check_base[c];
            double prod = target.get(c) ? -1.0 : 1.0;
            bool zero = false;
            for (std::size_t a = 0; a < deg; ++a) {
                const double t = std::tanh(0.5 * var_to_check[base + a]);
                if (t == 0.0) zero = true;
                prod *= t;
            }
            for (std::size_t a = 0; a < deg; ++a) {
                const double t = std::tanh(0.5 * var_to_check[base + a]);
                double rest;
                if (!zero) {
                    rest = prod / t;
                } else {
                    rest = target.get(c) ? -1.0 : 1.0;
                    for (std::size_t b = 0; b < deg; ++b)
                        if (b != a) rest *= std::tanh(0.5 * var_to_check[base + b]);
                }
                rest = std::clamp(rest, -0.999999999999, 0.999999999999);
                check_to_var[base + a] =
                    std::clamp(2.0 * std::atanh(rest), -kLlrClamp, kLlrClamp);
            }
        }
        // Variable update and hard decision.
        std::size_t ecur = 0;
        for (std::size_t v = 0; v < n; ++v) {
            const std::size_t deg = vc[v].size();
            double total = channel_llr;
            for (std::size_t a = 0; a < deg; ++a) total += check_to_var[var_edge[ecur + a]];
            posterior[v] = total;
            for (std::size_t a = 0; a < deg; ++a) {
                const std::size_t e = var_edge[ecur + a];
                var_to_check[e] =
                    std::clamp(total - check_to_var[e], -kLlrClamp, kLlrClamp);
            }
            res.word.set(v, posterior[v] < 0.0);
            ecur += deg;
        }
        res.iterations = iter;
        if (code.syndrome(res.word) == target) {
            res.converged = true;
            return res;
        }
    }
    return res;
}

ReconcileResult reconcile(const BitKey& alice, const BitKey& bob, const LdpcCode& code,
                          double p_err_estimate, std::uint64_t verify_seed) {
    if (alice.size() != bob.size()) throw std::invalid_argument("reconcile: length mismatch");
    if (alice.size() != code.length())
        throw std::invalid_argument("reconcile: block must be padded to the code length");
    if (p_err_estimate >= code.correctable_ber())
        throw std::runtime_error("reconcile: rate insufficient for the estimated error rate");

    ReconcileResult res;
    res.disclosed_bits = code.syndrome_length() + kVerifyHashBits;

    // Syndrome of the error pattern alice XOR bob.
    BitKey diff = code.syndrome(alice);
    const BitKey sb = code.syndrome(bob);
    for (std::size_t w = 0; w < diff.words().size(); ++w) diff.words()[w] ^= sb.words()[w];

    const double p = std::clamp(p_err_estimate, 1e-4, 0.499);
    DecodeResult dec = decode_syndrome(code, diff, p);
    res.iterations = dec.iterations;

    res.corrected = bob;
    for (std::size_t w = 0; w < res.corrected.words().size(); ++w)
        res.corrected.words()[w] ^= dec.word.words()[w];

    const ToeplitzSeed h = ToeplitzSeed::random(kVerifyHashBits, code.length(), verify_seed);
    res.success = dec.converged &&
                  privacy_amplify(res.corrected, kVerifyHashBits, h) ==
                      privacy_amplify(alice, kVerifyHashBits, h);
    if (!res.success) res.corrected = BitKey();
    return res;
}

}  // namespace qkdline::postprocess
