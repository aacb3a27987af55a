#include "qkdline/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qkdline {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace

ConfigMap ConfigMap::parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path.string());
}

ConfigMap ConfigMap::parse_string(std::string_view text, std::string origin) {
    ConfigMap cfg;
    cfg.origin_ = std::move(origin);
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw std::runtime_error(cfg.origin_ + ":" + std::to_string(line_no) +
                                     ": expected 'key = value'");
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error(cfg.origin_ + ":" + std::to_string(line_no) + ": empty key");
        cfg.entries_.push_back({std::string(key), std::string(value), line_no});
    }
    return cfg;
}

const ConfigMap::Entry* ConfigMap::find_last(std::string_view key) const {
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
        if (it->key == key) return &*it;
    return nullptr;
}

bool ConfigMap::has(std::string_view key) const { return find_last(key) != nullptr; }

std::string ConfigMap::get_string(std::string_view key, std::string_view fallback) const {
    const Entry* e = find_last(key);
    return e ? e->value : std::string(fallback);
}

std::string ConfigMap::require_string(std::string_view key) const {
    const Entry* e = find_last(key);
    if (!e) throw std::runtime_error(origin_ + ": missing required key '" + std::string(key) + "'");
    return e->value;
}

double ConfigMap::get_double(std::string_view key, double fallback) const {
    const Entry* e = find_last(key);
    if (!e) return fallback;
    try {
        std::size_t used = 0;
        const double v = std::stod(e->value, &used);
        if (trim(std::string_view(e->value).substr(used)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw std::runtime_error(origin_ + ":" + std::to_string(e->line) + ": key '" +
                             std::string(key) + "' is not a number: '" + e->value + "'");
}

double ConfigMap::require_double(std::string_view key) const {
    if (!has(key))
        throw std::runtime_error(origin_ + ": missing required key '" + std::string(key) + "'");
    return get_double(key, 0.0);
}

std::uint64_t ConfigMap::get_uint64(std::string_view key, std::uint64_t fallback) const {
    const Entry* e = find_last(key);
    if (!e) return fallback;
    std::uint64_t v = 0;
    const std::string_view s = trim(e->value);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size()) return v;
    throw std::runtime_error(origin_ + ":" + std::to_string(e->line) + ": key '" +
                             std::string(key) + "' is not an unsigned integer: '" + e->value + "'");
}

bool ConfigMap::get_bool(std::string_view key, bool fallback) const {
    const Entry* e = find_last(key);
    if (!e) return fallback;
    std::string v = e->value;
    std::transform(v.begin(), v.end(), v.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::runtime_error(origin_ + ":" + std::to_string(e->line) + ": key '" +
                             std::string(key) + "' is not a boolean: '" + e->value + "'");
}

std::vector<std::string> ConfigMap::get_all(std::string_view key) const {
    std::vector<std::string> out;
    for (const Entry& e : entries_)
        if (e.key == key) out.push_back(e.value);
    return out;
}

void ConfigMap::set(std::string key, std::string value) {
    entries_.push_back({std::move(key), std::move(value), 0});
}

std::vector<double> ConfigMap::tokens_as_doubles(std::string_view value) {
    std::vector<double> out;
    std::istringstream in{std::string(value)};
    double v = 0.0;
    while (in >> v) out.push_back(v);
    if (!in.eof())
        throw std::runtime_error("non-numeric token in value: '" + std::string(value) + "'");
    return out;
}

}  // namespace qkdline
