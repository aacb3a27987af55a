#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "qkdline/bitkey.hpp"
#include "qkdline/config.hpp"
#include "qkdline/rng.hpp"
#include "reference.hpp"

using namespace qkdline;

namespace {
std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}
}  // namespace

TEST_CASE("bitkey bit access, popcount, hamming") {
    BitKey k(130);
    CHECK(k.size() == 130);
    CHECK(k.popcount() == 0);
    k.set(0, true);
    k.set(64, true);
    k.set(129, true);
    CHECK(k.get(0));
    CHECK(k.get(64));
    CHECK(k.get(129));
    CHECK_FALSE(k.get(1));
    CHECK(k.popcount() == 3);
    k.flip(64);
    CHECK(k.popcount() == 2);

    BitKey other(130);
    other.set(0, true);
    CHECK(k.hamming_distance(other) == 1);
    CHECK(k.hamming_distance(k) == 0);
}

TEST_CASE("bitkey conversions round trip") {
    std::mt19937_64 rng(7);
    for (std::size_t bits : {1u, 7u, 8u, 63u, 64u, 65u, 1000u}) {
        const BitKey k = testref::random_key(bits, rng);
        CHECK(BitKey::from_bytes(k.to_bytes(), bits) == k);
        CHECK(BitKey::from_string01(k.to_string01()) == k);
        std::vector<std::uint8_t> bools(bits);
        for (std::size_t i = 0; i < bits; ++i) bools[i] = k.get(i);
        CHECK(BitKey::from_bools(bools) == k);
    }
    CHECK(BitKey::from_string01("0101").to_string01() == "0101");
}

TEST_CASE("bitkey tail bits are masked on ingest") {
    const std::vector<std::uint8_t> bytes{0xFF};
    const BitKey k = BitKey::from_bytes(bytes, 3);
    CHECK(k.size() == 3);
    CHECK(k.popcount() == 3);
    CHECK(k.words()[0] == 0x7u);
}

TEST_CASE("bitkey slice and append") {
    std::mt19937_64 rng(8);
    const BitKey k = testref::random_key(200, rng);
    const BitKey a = k.slice(0, 77);
    const BitKey b = k.slice(77, 123);
    BitKey joined = a;
    joined.append(b);
    CHECK(joined == k);
    for (std::size_t i = 0; i < 123; ++i) CHECK(b.get(i) == k.get(77 + i));
}

TEST_CASE("bitkey file save and load") {
    std::mt19937_64 rng(9);
    const BitKey k = testref::random_key(4321, rng);
    const auto path = temp_file("bitkey_roundtrip.qkey");
    k.save(path);
    CHECK(BitKey::load(path) == k);
    std::filesystem::remove(path);

    const auto bad = temp_file("bitkey_bad.qkey");
    {
        std::FILE* f = std::fopen(bad.string().c_str(), "wb");
        std::fputs("NOTAKEY", f);
        std::fclose(f);
    }
    CHECK_THROWS(BitKey::load(bad));
    std::filesystem::remove(bad);
}

TEST_CASE("config parsing: comments, repeats, last-wins") {
    const ConfigMap cfg = ConfigMap::parse_string(
        "# heading comment\n"
        "span = 50 0.2\n"
        "\n"
        "amp = 10 0\n"
        "span = 29 0.2\n"
        "seed = 1\n"
        "seed = 42\n");
    CHECK(cfg.has("span"));
    CHECK_FALSE(cfg.has("missing"));
    CHECK(cfg.get_uint64("seed", 0) == 42);
    const auto spans = cfg.get_all("span");
    REQUIRE(spans.size() == 2);
    CHECK(spans[0] == "50 0.2");
    CHECK(spans[1] == "29 0.2");
    CHECK(cfg.entries().size() == 5);
    CHECK(cfg.get_string("detection", "poisson") == "poisson");
    CHECK_THROWS(cfg.require_double("missing"));
    const auto toks = ConfigMap::tokens_as_doubles("50 0.2");
    REQUIRE(toks.size() == 2);
    CHECK(toks[0] == 50.0);
    CHECK(toks[1] == 0.2);
}

TEST_CASE("config boolean and numeric accessors") {
    const ConfigMap cfg = ConfigMap::parse_string(
        "emit = true\nquiet = 0\nrate = 0.25\ncount = 123\n");
    CHECK(cfg.get_bool("emit", false));
    CHECK_FALSE(cfg.get_bool("quiet", true));
    CHECK(cfg.get_double("rate", 0.0) == 0.25);
    CHECK(cfg.get_uint64("count", 0) == 123);
    CHECK(cfg.get_double("absent", 7.5) == 7.5);
}

TEST_CASE("stage seed derivation is stable and stage-distinct") {
    const std::uint64_t root = 99;
    CHECK(derive_seed(root, "sift") == derive_seed(root, "sift"));
    CHECK(derive_seed(root, "sift") != derive_seed(root, "otdr"));
    CHECK(derive_seed(root, "sift") != derive_seed(root + 1, "sift"));
    auto r1 = make_rng(root, "stage");
    auto r2 = make_rng(root, "stage");
    for (int i = 0; i < 10; ++i) CHECK(r1() == r2());
}
