#pragma once

// Command-line driver: subcommands walk, moments, oracle, edge, norm, validate.
//
// Every subcommand accepts --config FILE, a flat key=value file ('#' starts a
// comment). Keys are the long flag names without dashes; '_' and '-' are
// interchangeable. A flag given on the command line overrides the file.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bandedge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitResource = 3;
inline constexpr int kExitNumeric = 4;

/// Bad configuration: unknown key, malformed value, unreadable file.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Where a setting came from, for diagnostics.
struct Setting {
    std::string value;
    std::string origin;
};

/// Merged key=value settings with typed accessors. Keys are normalized to use '-'.
class Settings {
public:
    static std::string normalize_key(std::string key);

    /// Parses a flat key=value file. Throws ConfigError naming the line on malformed input.
    static Settings parse(std::istream& in, const std::string& source_name);

    void set(const std::string& key, std::string value, std::string origin);
    bool has(const std::string& key) const;
    const std::map<std::string, Setting>& entries() const noexcept { return entries_; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::int64_t get_int(const std::string& key, std::optional<std::int64_t> fallback = {}) const;
    std::uint64_t get_u64(const std::string& key, std::optional<std::uint64_t> fallback = {}) const;
    double get_double(const std::string& key, std::optional<double> fallback = {}) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<int> get_int_list(const std::string& key, std::optional<std::vector<int>> fallback = {}) const;

private:
    const Setting* find(const std::string& key) const;
    [[noreturn]] void bad_value(const std::string& key, const std::string& expected) const;

    std::map<std::string, Setting> entries_;
};

/// --threads if given, else BANDEDGE_THREADS, else 1. ConfigError on a non-positive value.
int resolve_threads(std::optional<std::string> flag_value, const char* env_value);

/// Runs the command line and returns the process exit code. Errors are reported as a
/// JSON object on `err` and, when the output directory exists, in error.json.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace bandedge::cli
