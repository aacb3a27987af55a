#include "qkdline/bitkey.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace qkdline {

namespace {

constexpr std::array<char, 6> kMagic = {'Q', 'K', 'D', 'K', 'E', 'Y'};
constexpr std::uint16_t kVersion = 1;

void put_u16le(std::ostream& out, std::uint16_t v) {
    const char b[2] = {char(v & 0xff), char((v >> 8) & 0xff)};
    out.write(b, 2);
}

void put_u64le(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = char((v >> (8 * i)) & 0xff);
    out.write(b, 8);
}

std::uint16_t get_u16le(std::istream& in) {
    unsigned char b[2];
    in.read(reinterpret_cast<char*>(b), 2);
    return std::uint16_t(b[0]) | std::uint16_t(b[1]) << 8;
}

std::uint64_t get_u64le(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
    return v;
}

}  // namespace

void BitKey::mask_tail() {
    if (words_.empty()) return;
    const std::size_t used = bits_ & 63;
    if (used) words_.back() &= (std::uint64_t(1) << used) - 1;
}

BitKey BitKey::from_bools(const std::vector<std::uint8_t>& bits) {
    BitKey k(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) k.set(i, true);
    return k;
}

std::size_t BitKey::popcount() const {
    std::size_t n = 0;
    for (std::uint64_t w : words_) n += std::size_t(std::popcount(w));
    return n;
}

std::size_t BitKey::hamming_distance(const BitKey& other) const {
    if (bits_ != other.bits_) throw std::invalid_argument("hamming_distance: size mismatch");
    std::size_t n = 0;
    for (std::size_t i = 0; i < words_.size(); ++i)
        n += std::size_t(std::popcount(words_[i] ^ other.words_[i]));
    return n;
}

BitKey BitKey::slice(std::size_t offset, std::size_t count) const {
    if (offset + count > bits_) throw std::out_of_range("BitKey::slice out of range");
    BitKey out(count);
    for (std::size_t i = 0; i < count; ++i)
        if (get(offset + i)) out.set(i, true);
    return out;
}

void BitKey::append(const BitKey& other) {
    const std::size_t base = bits_;
    bits_ += other.bits_;
    words_.resize((bits_ + 63) / 64, 0);
    for (std::size_t i = 0; i < other.bits_; ++i)
        if (other.get(i)) set(base + i, true);
}

bool BitKey::operator==(const BitKey& other) const {
    return bits_ == other.bits_ && words_ == other.words_;
}

std::vector<std::uint8_t> BitKey::to_bytes() const {
    std::vector<std::uint8_t> out((bits_ + 7) / 8, 0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::uint64_t w = words_[i / 8];
        out[i] = std::uint8_t((w >> (8 * (i % 8))) & 0xff);
    }
    return out;
}

BitKey BitKey::from_bytes(const std::vector<std::uint8_t>& bytes, std::size_t bits) {
    if (bytes.size() < (bits + 7) / 8) throw std::invalid_argument("from_bytes: too few bytes");
    BitKey k(bits);
    for (std::size_t i = 0; i < (bits + 7) / 8; ++i)
        k.words_[i / 8] |= std::uint64_t(bytes[i]) << (8 * (i % 8));
    k.mask_tail();
    return k;
}

std::string BitKey::to_string01() const {
    std::string s(bits_, '0');
    for (std::size_t i = 0; i < bits_; ++i)
        if (get(i)) s[i] = '1';
    return s;
}

BitKey BitKey::from_string01(std::string_view s) {
    BitKey k(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '1')
            k.set(i, true);
        else if (s[i] != '0')
            throw std::invalid_argument("from_string01: expected only '0'/'1'");
    }
    return k;
}

void BitKey::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open key file for writing: " + path.string());
    out.write(kMagic.data(), kMagic.size());
    put_u16le(out, kVersion);
    put_u64le(out, bits_);
    const auto bytes = to_bytes();
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to key file: " + path.string());
}

BitKey BitKey::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open key file: " + path.string());
    std::array<char, 6> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic)
        throw std::runtime_error("not a key file (bad magic): " + path.string());
    const std::uint16_t version = get_u16le(in);
    if (version != kVersion)
        throw std::runtime_error("unsupported key file version " + std::to_string(version) + ": " +
                                 path.string());
    const std::uint64_t bits = get_u64le(in);
    std::vector<std::uint8_t> bytes((bits + 7) / 8);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!in) throw std::runtime_error("truncated key file: " + path.string());
    return from_bytes(bytes, bits);
}

}  // namespace qkdline
