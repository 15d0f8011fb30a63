#include "bandedge/cli.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <istream>
#include <sstream>

namespace bandedge::cli {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <class T>
std::optional<T> parse_number(const std::string& text) {
    T value{};
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || text.empty()) return std::nullopt;
    return value;
}

} // namespace

std::string Settings::normalize_key(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return key;
}

Settings Settings::parse(std::istream& in, const std::string& source_name) {
    Settings settings;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(fmt::format("{}:{}: expected key=value, got '{}'", source_name, line_no, line));
        }
        const std::string key = normalize_key(trim(line.substr(0, eq)));
        if (key.empty()) throw ConfigError(fmt::format("{}:{}: empty key", source_name, line_no));
        if (settings.has(key)) {
            throw ConfigError(fmt::format("{}:{}: key '{}' given twice", source_name, line_no, key));
        }
        settings.set(key, trim(line.substr(eq + 1)), fmt::format("{}:{}", source_name, line_no));
    }
    return settings;
}

void Settings::set(const std::string& key, std::string value, std::string origin) {
    entries_[normalize_key(key)] = {std::move(value), std::move(origin)};
}

bool Settings::has(const std::string& key) const {
    return entries_.count(normalize_key(key)) > 0;
}

const Setting* Settings::find(const std::string& key) const {
    const auto it = entries_.find(normalize_key(key));
    return it == entries_.end() ? nullptr : &it->second;
}

void Settings::bad_value(const std::string& key, const std::string& expected) const {
    const Setting* s = find(key);
    if (s == nullptr) throw ConfigError(fmt::format("missing required setting '{}'", key));
    throw ConfigError(fmt::format("{}: setting '{}' expects {}, got '{}'", s->origin, key, expected, s->value));
}

std::string Settings::get_string(const std::string& key, const std::string& fallback) const {
    const Setting* s = find(key);
    return s == nullptr ? fallback : s->value;
}

std::int64_t Settings::get_int(const std::string& key, std::optional<std::int64_t> fallback) const {
    const Setting* s = find(key);
    if (s == nullptr) {
        if (fallback) return *fallback;
        bad_value(key, "an integer");
    }
    const auto v = parse_number<std::int64_t>(s->value);
    if (!v) bad_value(key, "an integer");
    return *v;
}

std::uint64_t Settings::get_u64(const std::string& key, std::optional<std::uint64_t> fallback) const {
    const Setting* s = find(key);
    if (s == nullptr) {
        if (fallback) return *fallback;
        bad_value(key, "an unsigned 64-bit integer");
    }
    const auto v = parse_number<std::uint64_t>(s->value);
    if (!v) bad_value(key, "an unsigned 64-bit integer");
    return *v;
}

double Settings::get_double(const std::string& key, std::optional<double> fallback) const {
    const Setting* s = find(key);
    if (s == nullptr) {
        if (fallback) return *fallback;
        bad_value(key, "a number");
    }
    const auto v = parse_number<double>(s->value);
    if (!v) bad_value(key, "a number");
    return *v;
}

bool Settings::get_bool(const std::string& key, bool fallback) const {
    const Setting* s = find(key);
    if (s == nullptr) return fallback;
    const std::string& v = s->value;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    bad_value(key, "true or false");
}

std::vector<int> Settings::get_int_list(const std::string& key,
                                        std::optional<std::vector<int>> fallback) const {
    const Setting* s = find(key);
    if (s == nullptr) {
        if (fallback) return *fallback;
        bad_value(key, "a comma-separated list of integers");
    }
    std::vector<int> out;
    std::stringstream stream(s->value);
    std::string item;
    while (std::getline(stream, item, ',')) {
        const auto v = parse_number<int>(trim(item));
        if (!v) bad_value(key, "a comma-separated list of integers");
        out.push_back(*v);
    }
    if (out.empty()) bad_value(key, "a comma-separated list of integers");
    return out;
}

int resolve_threads(std::optional<std::string> flag_value, const char* env_value) {
    std::string text;
    std::string origin;
    if (flag_value) {
        text = *flag_value;
        origin = "--threads";
    } else if (env_value != nullptr && *env_value != '\0') {
        text = env_value;
        origin = "BANDEDGE_THREADS";
    } else {
        return 1;
    }
    const auto v = parse_number<int>(trim(text));
    if (!v || *v < 1) throw ConfigError(fmt::format("{} expects a positive integer, got '{}'", origin, text));
    return *v;
}

} // namespace bandedge::cli
