#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qkdline {

/// Ordered key-value configuration, parsed from `key = value` lines.
///
/// `#` starts a comment, blank lines are skipped, keys may repeat (order of
/// appearance is preserved, which is how the line layout lists its spans and
/// amplifiers). Values keep internal whitespace so a single value can carry
/// several tokens, e.g. `span = 50 0.2`.
class ConfigMap {
  public:
    struct Entry {
        std::string key;
        std::string value;
        int line = 0;
    };

    static ConfigMap parse_file(const std::filesystem::path& path);
    static ConfigMap parse_string(std::string_view text, std::string origin = "<string>");

    bool has(std::string_view key) const;

    /// Last occurrence wins for scalar lookups (so presets can be overridden
    /// by appending).
    std::string get_string(std::string_view key, std::string_view fallback) const;
    std::string require_string(std::string_view key) const;
    double get_double(std::string_view key, double fallback) const;
    double require_double(std::string_view key) const;
    std::uint64_t get_uint64(std::string_view key, std::uint64_t fallback) const;
    bool get_bool(std::string_view key, bool fallback) const;

    /// All values for a repeated key, in file order.
    std::vector<std::string> get_all(std::string_view key) const;

    /// Every entry in file order (used for order-sensitive layouts).
    const std::vector<Entry>& entries() const { return entries_; }

    void set(std::string key, std::string value);

    const std::string& origin() const { return origin_; }

    /// Splits a value into whitespace-separated numeric tokens.
    static std::vector<double> tokens_as_doubles(std::string_view value);

  private:
    std::vector<Entry> entries_;
    std::string origin_;

    const Entry* find_last(std::string_view key) const;
};

}  // namespace qkdline
