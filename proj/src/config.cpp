#include "invsrc/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace invsrc {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string strip_quotes(const std::string& s) {
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                          (s.front() == '\'' && s.back() == '\''))) {
        return s.substr(1, s.size() - 2);
    }
    return s;
}

double parse_double(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw std::runtime_error("config key '" + key + "': '" + text +
                             "' is not a number");
}

} // namespace

bool Config::has(const std::string& key) const {
    return values_.count(key) > 0;
}

void Config::set(const std::string& key, const std::string& value) {
    values_[key] = value;
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : strip_quotes(it->second);
}

double Config::get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_double(key, it->second);
}

int Config::get_int(const std::string& key, int fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const double v = parse_double(key, it->second);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) {
        throw std::runtime_error("config key '" + key +
                                 "' must be an integer");
    }
    return i;
}

std::uint64_t Config::get_u64(const std::string& key,
                              std::uint64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        std::size_t used = 0;
        const std::uint64_t v = std::stoull(it->second, &used);
        if (used == it->second.size()) return v;
    } catch (const std::exception&) {
    }
    throw std::runtime_error("config key '" + key +
                             "' must be a nonnegative integer");
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string v = strip_quotes(it->second);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::runtime_error("config key '" + key + "': '" + v +
                             "' is not a boolean");
}

std::vector<double> Config::get_list(const std::string& key) const {
    std::vector<double> out;
    const auto it = values_.find(key);
    if (it == values_.end()) return out;
    std::string text = it->second;
    for (char& ch : text) {
        if (ch == ',') ch = ' ';
    }
    std::istringstream in(text);
    std::string token;
    while (in >> token) {
        out.push_back(parse_double(key, token));
    }
    return out;
}

std::vector<std::pair<double, double>> Config::get_pairs(
    const std::string& key) const {
    std::vector<std::pair<double, double>> out;
    const auto it = values_.find(key);
    if (it == values_.end()) return out;
    std::stringstream groups(it->second);
    std::string group;
    while (std::getline(groups, group, ';')) {
        std::string text = group;
        for (char& ch : text) {
            if (ch == ',') ch = ' ';
        }
        std::istringstream in(text);
        double x, y;
        std::string extra;
        if (!(in >> x >> y) || (in >> extra)) {
            throw std::runtime_error("config key '" + key + "': '" + group +
                                     "' is not an x y pair");
        }
        out.emplace_back(x, y);
    }
    return out;
}

Config Config::parse(std::istream& in) {
    Config config;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key = value");
        }
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty()) {
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": empty key");
        }
        config.values_[key] = value;
    }
    return config;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    return parse(in);
}

} // namespace invsrc
