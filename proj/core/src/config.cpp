#include "rf/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rf {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("Config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

Config Config::parse(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::runtime_error("Config: malformed section at line " +
                                         std::to_string(line_no));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("Config: missing '=' at line " +
                                     std::to_string(line_no));
        std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw std::runtime_error("Config: empty key at line " +
                                     std::to_string(line_no));
        if (!section.empty()) key = section + "." + key;
        cfg.kv_[key] = trim(line.substr(eq + 1));
    }
    return cfg;
}

bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }

void Config::set(const std::string& key, const std::string& value) {
    kv_[key] = value;
}

std::string Config::get_string(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw std::runtime_error("Config: missing key '" + key + "'");
    return it->second;
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
    const std::string raw = get_string(key);
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(raw, &pos);
    } catch (const std::exception&) {
        throw std::runtime_error("Config: key '" + key + "' is not a number: " + raw);
    }
    if (pos != raw.size())
        throw std::runtime_error("Config: trailing junk in '" + key + "': " + raw);
    return v;
}

double Config::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long Config::get_int(const std::string& key) const {
    const std::string raw = get_string(key);
    std::size_t pos = 0;
    long v = 0;
    try {
        v = std::stol(raw, &pos);
    } catch (const std::exception&) {
        throw std::runtime_error("Config: key '" + key + "' is not an integer: " + raw);
    }
    if (pos != raw.size())
        throw std::runtime_error("Config: trailing junk in '" + key + "': " + raw);
    return v;
}

long Config::get_int(const std::string& key, long fallback) const {
    return has(key) ? get_int(key) : fallback;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const std::string raw = get_string(key);
    try {
        return std::stoull(raw);
    } catch (const std::exception&) {
        throw std::runtime_error("Config: key '" + key + "' is not a u64: " + raw);
    }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string raw = get_string(key);
    if (raw == "true" || raw == "1" || raw == "yes") return true;
    if (raw == "false" || raw == "0" || raw == "no") return false;
    throw std::runtime_error("Config: key '" + key + "' is not a bool: " + raw);
}

std::vector<double> Config::get_double_list(const std::string& key) const {
    const std::string raw = get_string(key);
    std::vector<double> out;
    std::stringstream ss(raw);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        cell = trim(cell);
        if (cell.empty()) continue;
        try {
            out.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw std::runtime_error("Config: bad list entry in '" + key + "': " + cell);
        }
    }
    if (out.empty())
        throw std::runtime_error("Config: key '" + key + "' holds an empty list");
    return out;
}

std::vector<double> Config::get_double_list(const std::string& key,
                                            const std::vector<double>& fallback) const {
    return has(key) ? get_double_list(key) : fallback;
}

std::string Config::dump() const {
    std::ostringstream out;
    for (const auto& [k, v] : kv_) out << k << " = " << v << "\n";
    return out.str();
}

}  // namespace rf
