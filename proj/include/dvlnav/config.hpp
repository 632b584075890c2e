#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dvlnav {

/// Flat sectioned key-value configuration.
///
///     # comment            ; also a comment
///     [section]
///     key = value
///     list = [1.0, 2.0, 3.0]
///
/// Keys outside any section belong to the empty section "". Values are
/// scalars (number, bool, bare word) or bracketed comma-separated lists.
/// Duplicate keys within a section are an error.
class Config {
public:
    static Config parse(const std::string& text, const std::string& origin = "<string>");
    static Config load(const std::filesystem::path& path);

    bool has(const std::string& section, const std::string& key) const;
    void set(const std::string& section, const std::string& key, const std::string& value);

    std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& section, const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_u64(const std::string& section, const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

    /// A scalar is returned as a one-element list.
    std::optional<std::vector<double>> get_doubles(const std::string& section, const std::string& key) const;
    std::optional<std::vector<std::string>> get_strings(const std::string& section, const std::string& key) const;

private:
    std::optional<std::string> raw(const std::string& section, const std::string& key) const;

    std::map<std::string, std::map<std::string, std::string>> values_;
    std::string origin_;
};

double parse_double_strict(const std::string& text, const std::string& what);

}  // namespace dvlnav
