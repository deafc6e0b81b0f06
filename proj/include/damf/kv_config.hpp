#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace damf {

// Flat "key = value" text. '#' starts a comment; blank lines are ignored;
// repeating a key appends to its list of values.
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::string_view text, const std::string& origin = "<text>");
    static KeyValueConfig load(const std::filesystem::path& path);

    bool has(std::string_view key) const;
    std::vector<std::string> all(std::string_view key) const;
    std::optional<std::string> get(std::string_view key) const;  // last occurrence

    std::string get_string(std::string_view key, std::string fallback) const;
    double get_double(std::string_view key, double fallback) const;
    long long get_int(std::string_view key, long long fallback) const;
    bool get_bool(std::string_view key, bool fallback) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }
    const std::string& origin() const noexcept { return origin_; }

    // Keys present in the file but not in `known`, for strict validation.
    std::vector<std::string> unknown_keys(const std::vector<std::string_view>& known) const;

private:
    std::string origin_;
    std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace damf
