#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace qkdline {

// Packed bit sequence. Bit i lives in word i/64 at position i%64 (LSB first).
class BitKey {
public:
    BitKey() = default;
    explicit BitKey(std::size_t bits) : bits_(bits), words_((bits + 63) / 64, 0) {}

    static BitKey from_bools(const std::vector<std::uint8_t>& bits);

    std::size_t size() const { return bits_; }
    bool empty() const { return bits_ == 0; }

    bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void set(std::size_t i, bool v) {
        const std::uint64_t mask = std::uint64_t(1) << (i & 63);
        if (v)
            words_[i >> 6] |= mask;
        else
            words_[i >> 6] &= ~mask;
    }
    void flip(std::size_t i) { words_[i >> 6] ^= std::uint64_t(1) << (i & 63); }

    const std::vector<std::uint64_t>& words() const { return words_; }
    std::vector<std::uint64_t>& words() { return words_; }

    std::size_t popcount() const;
    std::size_t hamming_distance(const BitKey& other) const;
    BitKey slice(std::size_t offset, std::size_t count) const;
    void append(const BitKey& other);

    bool operator==(const BitKey& other) const;

    std::vector<std::uint8_t> to_bytes() const;
    static BitKey from_bytes(const std::vector<std::uint8_t>& bytes, std::size_t bits);

    std::string to_string01() const;
    static BitKey from_string01(std::string_view s);

    // Binary file layout: "QKDKEY" magic, u16 LE version, u64 LE bit count, packed bytes.
    void save(const std::filesystem::path& path) const;
    static BitKey load(const std::filesystem::path& path);

private:
    std::size_t bits_ = 0;
    std::vector<std::uint64_t> words_;

    void mask_tail();
};

}  // namespace qkdline
