#include "qkdline/toeplitz.hpp"

#include <bit>
#include <random>
#include <stdexcept>

namespace qkdline::postprocess {

ToeplitzSeed ToeplitzSeed::random(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    ToeplitzSeed t;
    t.rows = rows;
    t.cols = cols;
    t.bits = BitKey(rows + cols - 1);
    std::mt19937_64 rng(seed);
    for (auto& w : t.bits.words()) w = rng();
    // Trim the tail so stored words stay canonical.
    t.bits = BitKey::from_bytes(t.bits.to_bytes(), rows + cols - 1);
    return t;
}

ToeplitzSeed ToeplitzSeed::from_bits(std::size_t rows, std::size_t cols, BitKey bits) {
    ToeplitzSeed t;
    t.rows = rows;
    t.cols = cols;
    t.bits = std::move(bits);
    t.validate();
    return t;
}

bool ToeplitzSeed::entry(std::size_t i, std::size_t j) const {
    const std::size_t L = rows + cols - 1;
    return bits.get((j + L - (i % L)) % L);
}

void ToeplitzSeed::validate() const {
    if (rows == 0 || cols == 0) throw std::invalid_argument("Toeplitz shape must be nonzero");
    if (rows > cols) throw std::invalid_argument("Toeplitz hash must not expand (rows > cols)");
    if (bits.size() != rows + cols - 1)
        throw std::invalid_argument("Toeplitz seed must carry rows+cols-1 bits");
}

BitKey privacy_amplify(const BitKey& key, std::size_t out_len, const ToeplitzSeed& seed) {
    seed.validate();
    if (out_len != seed.rows)
        throw std::invalid_argument("privacy_amplify: output length does not match seed rows");
    if (key.size() != seed.cols)
        throw std::invalid_argument("privacy_amplify: key length does not match seed cols");

    // Row i is a length-cols window of the unrolled diagonals, starting at
    // offset rows-1-i: ext[k] = seed[(k + cols) mod L] makes ext[off+j] = T(i,j).
    const std::size_t L = seed.rows + seed.cols - 1;
    BitKey ext(L);
    for (std::size_t k = 0; k < L; ++k)
        if (seed.bits.get((k + seed.cols) % L)) ext.set(k, true);

    const auto& aw = ext.words();
    const auto& xw = key.words();
    BitKey out(out_len);
    for (std::size_t i = 0; i < out_len; ++i) {
        const std::size_t off = seed.rows - 1 - i;
        std::uint64_t acc = 0;
        for (std::size_t jw = 0; jw < xw.size(); ++jw) {
            const std::size_t t = off + (jw << 6);
            const std::size_t w = t >> 6, b = t & 63;
            std::uint64_t window = aw[w] >> b;
            if (b && w + 1 < aw.size()) window |= aw[w + 1] << (64 - b);
            acc ^= window & xw[jw];
        }
        if (std::popcount(acc) & 1) out.set(i, true);
    }
    return out;
}

double collision_probe(std::size_t out_len, std::size_t trials, std::uint64_t rng_seed,
                       std::size_t in_len) {
    if (out_len == 0 || trials == 0) throw std::invalid_argument("collision_probe: empty setup");
    std::mt19937_64 rng(rng_seed);
    const auto random_key = [&](std::size_t bits) {
        BitKey k(bits);
        for (auto& w : k.words()) w = rng();
        return BitKey::from_bytes(k.to_bytes(), bits);
    };
    std::size_t collisions = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const ToeplitzSeed seed = ToeplitzSeed::random(out_len, in_len, rng());
        const BitKey x = random_key(in_len);
        BitKey y = random_key(in_len);
        while (y == x) y = random_key(in_len);
        if (privacy_amplify(x, out_len, seed) == privacy_amplify(y, out_len, seed)) ++collisions;
    }
    return double(collisions) / double(trials);
}

}  // namespace qkdline::postprocess
