#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace rf {

// Flat key-value configuration. `[section]` headers prefix subsequent keys
// as "section.key"; '#' starts a comment; values are free text until end of
// line. Typed getters throw on malformed values, and getters without a
// fallback throw on missing keys.
class Config {
public:
    Config() = default;

    static Config load(const std::string& path);
    static Config parse(const std::string& text);

    bool has(const std::string& key) const;
    void set(const std::string& key, const std::string& value);

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long get_int(const std::string& key) const;
    long get_int(const std::string& key, long fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    // Comma-separated doubles.
    std::vector<double> get_double_list(const std::string& key) const;
    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& fallback) const;

    const std::map<std::string, std::string>& entries() const { return kv_; }

    // Key-sorted "key = value" dump; used for manifest echoes.
    std::string dump() const;

private:
    std::map<std::string, std::string> kv_;
};

}  // namespace rf
