#pragma once

#include <cstddef>
#include <cstdint>

#include "qkdline/bitkey.hpp"

namespace qkdline::postprocess {

// Binary Toeplitz matrix T of shape rows x cols, defined by its rows+cols-1
// diagonals: T(i,j) = bits[(j-i) mod (rows+cols-1)]. Seed layout is therefore
// the main and upper diagonals first (offsets 0..cols-1), then the lower
// diagonals from offset -(rows-1) up to -1.
struct ToeplitzSeed {
    std::size_t rows = 0;
    std::size_t cols = 0;
    BitKey bits;

    static ToeplitzSeed random(std::size_t rows, std::size_t cols, std::uint64_t seed);
    static ToeplitzSeed from_bits(std::size_t rows, std::size_t cols, BitKey bits);

    bool entry(std::size_t i, std::size_t j) const;
    void validate() const;
};

// T * key over GF(2). out_len must match seed.rows and key.size() must match
// seed.cols; the seed then carries exactly cols+rows-1 bits.
BitKey privacy_amplify(const BitKey& key, std::size_t out_len, const ToeplitzSeed& seed);

// Empirical collision rate of Toeplitz hashing on random distinct input pairs
// under fresh random seeds; the family guarantees a rate of 2^-out_len.
double collision_probe(std::size_t out_len, std::size_t trials, std::uint64_t rng_seed,
                       std::size_t in_len = 64);

}  // namespace qkdline::postprocess
