#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace invsrc {

/// Flat key = value configuration (TOML-like scalars, # comments). Keys may
/// be dotted; values are strings, numbers, booleans, comma-separated number
/// lists, or semicolon-separated coordinate pairs.
class Config {
public:
    Config() = default;

    bool has(const std::string& key) const;
    void set(const std::string& key, const std::string& value);

    std::string get_string(const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& key,
                          std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_list(const std::string& key) const;
    std::vector<std::pair<double, double>> get_pairs(
        const std::string& key) const;

    const std::map<std::string, std::string>& entries() const {
        return values_;
    }

    static Config parse(std::istream& in);
    static Config parse_file(const std::string& path);

private:
    std::map<std::string, std::string> values_;
};

} // namespace invsrc
