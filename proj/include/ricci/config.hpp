#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace ricci {

/// One configuration value: a number, a boolean, a quoted string, or an
/// array of numbers.
struct ConfigValue {
    enum class Kind { Number, Boolean, String, NumberList };
    Kind kind = Kind::Number;
    double number = 0.0;
    bool boolean = false;
    std::string text;
    std::vector<double> list;
    int line = 0;
};

/// Flat key-value view of a parsed config; keys are "section.key".
class Config {
public:
    std::map<std::string, ConfigValue> entries;

    bool has(const std::string& key) const { return entries.count(key) > 0; }
    double number(const std::string& key) const;
    double number_or(const std::string& key, double fallback) const;
    bool flag_or(const std::string& key, bool fallback) const;
    std::string text(const std::string& key) const;
    std::vector<double> numbers(const std::string& key) const;
    std::vector<double> numbers_or(const std::string& key,
                                   std::vector<double> fallback) const;

    /// Strict schema check: every present key must be in the allowed set.
    void require_known(const std::vector<std::string>& allowed) const;
};

/// Parses the supported configuration dialect: `[section]` headers,
/// `key = value` lines, `#` comments, values as numbers, true/false,
/// double-quoted strings, or `[n1, n2, ...]` arrays of numbers.
/// Errors carry line and column.
Config parse_config(const std::string& text);
Config load_config(const std::string& path);

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ricci
