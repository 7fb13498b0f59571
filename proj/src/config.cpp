#include "ricci/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace ricci {

namespace {

[[noreturn]] void fail(int line, int col, const std::string& what) {
    throw ConfigError("config:" + std::to_string(line) + ":" +
                      std::to_string(col) + ": " + what);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

bool valid_key(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
            return false;
    return true;
}

double parse_number(std::string_view tok, int line, int col) {
    const std::string s(trim(tok));
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || p != end)
        fail(line, col, "expected a number, got '" + s + "'");
    return v;
}

}  // namespace

double Config::number(const std::string& key) const {
    const auto it = entries.find(key);
    if (it == entries.end()) throw ConfigError("missing key '" + key + "'");
    if (it->second.kind != ConfigValue::Kind::Number)
        throw ConfigError("key '" + key + "' is not a number");
    return it->second.number;
}

double Config::number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
}

bool Config::flag_or(const std::string& key, bool fallback) const {
    const auto it = entries.find(key);
    if (it == entries.end()) return fallback;
    if (it->second.kind != ConfigValue::Kind::Boolean)
        throw ConfigError("key '" + key + "' is not a boolean");
    return it->second.boolean;
}

std::string Config::text(const std::string& key) const {
    const auto it = entries.find(key);
    if (it == entries.end()) throw ConfigError("missing key '" + key + "'");
    if (it->second.kind != ConfigValue::Kind::String)
        throw ConfigError("key '" + key + "' is not a string");
    return it->second.text;
}

std::vector<double> Config::numbers(const std::string& key) const {
    const auto it = entries.find(key);
    if (it == entries.end()) throw ConfigError("missing key '" + key + "'");
    if (it->second.kind != ConfigValue::Kind::NumberList)
        throw ConfigError("key '" + key + "' is not an array");
    return it->second.list;
}

std::vector<double> Config::numbers_or(const std::string& key,
                                       std::vector<double> fallback) const {
    return has(key) ? numbers(key) : std::move(fallback);
}

void Config::require_known(const std::vector<std::string>& allowed) const {
    for (const auto& [key, value] : entries) {
        bool known = false;
        for (const auto& a : allowed)
            if (a == key) {
                known = true;
                break;
            }
        if (!known)
            throw ConfigError("config:" + std::to_string(value.line) +
                              ": unknown key '" + key + "'");
    }
}

Config parse_config(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        std::string_view line(raw);
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                fail(lineno, static_cast<int>(line.size()),
                     "unterminated section header");
            const auto name = trim(line.substr(1, line.size() - 2));
            if (!valid_key(name))
                fail(lineno, 2, "bad section name '" + std::string(name) + "'");
            section = std::string(name);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            fail(lineno, 1, "expected 'key = value'");
        const auto key = trim(line.substr(0, eq));
        if (!valid_key(key))
            fail(lineno, 1, "bad key '" + std::string(key) + "'");
        const auto val = trim(line.substr(eq + 1));
        const int col = static_cast<int>(eq) + 2;
        if (val.empty()) fail(lineno, col, "missing value");

        ConfigValue cv;
        cv.line = lineno;
        if (val == "true" || val == "false") {
            cv.kind = ConfigValue::Kind::Boolean;
            cv.boolean = val == "true";
        } else if (val.front() == '"') {
            if (val.size() < 2 || val.back() != '"')
                fail(lineno, col, "unterminated string");
            cv.kind = ConfigValue::Kind::String;
            cv.text = std::string(val.substr(1, val.size() - 2));
        } else if (val.front() == '[') {
            if (val.back() != ']') fail(lineno, col, "unterminated array");
            cv.kind = ConfigValue::Kind::NumberList;
            std::string body(val.substr(1, val.size() - 2));
            std::stringstream items(body);
            std::string item;
            while (std::getline(items, item, ',')) {
                if (trim(item).empty())
                    fail(lineno, col, "empty array element");
                cv.list.push_back(parse_number(item, lineno, col));
            }
        } else {
            cv.kind = ConfigValue::Kind::Number;
            cv.number = parse_number(val, lineno, col);
        }
        const std::string full =
            section.empty() ? std::string(key)
                            : section + "." + std::string(key);
        if (cfg.entries.count(full))
            fail(lineno, 1, "duplicate key '" + full + "'");
        cfg.entries[full] = std::move(cv);
    }
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace ricci
