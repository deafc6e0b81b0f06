#include "damf/kv_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "damf/error.hpp"
#include "damf/numfmt.hpp"

namespace damf {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text, const std::string& origin) {
    KeyValueConfig cfg;
    cfg.origin_ = origin;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorCode::BadConfig, origin + ":" + std::to_string(line_no) + ": expected key = value");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw Error(ErrorCode::BadConfig, origin + ":" + std::to_string(line_no) + ": empty key");
        }
        cfg.entries_.emplace_back(std::string(key), std::string(value));
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::FileUnreadable, "cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

bool KeyValueConfig::has(std::string_view key) const {
    return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == key; });
}

std::vector<std::string> KeyValueConfig::all(std::string_view key) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_) {
        if (k == key) {
            out.push_back(v);
        }
    }
    return out;
}

std::optional<std::string> KeyValueConfig::get(std::string_view key) const {
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
        if (it->first == key) {
            return it->second;
        }
    }
    return std::nullopt;
}

std::string KeyValueConfig::get_string(std::string_view key, std::string fallback) const {
    auto v = get(key);
    return v ? *v : std::move(fallback);
}

double KeyValueConfig::get_double(std::string_view key, double fallback) const {
    auto v = get(key);
    if (!v) {
        return fallback;
    }
    auto parsed = parse_double(*v);
    if (!parsed) {
        throw Error(ErrorCode::BadConfig, origin_ + ": key '" + std::string(key) + "' is not a number: " + *v);
    }
    return *parsed;
}

long long KeyValueConfig::get_int(std::string_view key, long long fallback) const {
    auto v = get(key);
    if (!v) {
        return fallback;
    }
    long long out = 0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || ptr != v->data() + v->size()) {
        throw Error(ErrorCode::BadConfig, origin_ + ": key '" + std::string(key) + "' is not an integer: " + *v);
    }
    return out;
}

bool KeyValueConfig::get_bool(std::string_view key, bool fallback) const {
    auto v = get(key);
    if (!v) {
        return fallback;
    }
    if (*v == "true" || *v == "1" || *v == "yes") {
        return true;
    }
    if (*v == "false" || *v == "0" || *v == "no") {
        return false;
    }
    throw Error(ErrorCode::BadConfig, origin_ + ": key '" + std::string(key) + "' is not a boolean: " + *v);
}

std::vector<std::string> KeyValueConfig::unknown_keys(const std::vector<std::string_view>& known) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_) {
        const bool ok = std::find(known.begin(), known.end(), k) != known.end();
        if (!ok && std::find(out.begin(), out.end(), k) == out.end()) {
            out.push_back(k);
        }
    }
    return out;
}

}  // namespace damf
