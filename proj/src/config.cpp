#include "leakhound/config.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

#include "leakhound/errors.hpp"

namespace leakhound {
namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::optional<std::string> KeyValues::get(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) return std::nullopt;
    return it->second;
}

double KeyValues::get_double(const std::string& key, double fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
        std::size_t used = 0;
        double d = std::stod(*v, &used);
        if (used != v->size()) throw ConfigError("trailing characters");
        return d;
    } catch (const ConfigError&) {
        throw ConfigError("config key " + key + " is not a number: " + *v);
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + " is not a number: " + *v);
    }
}

std::int64_t KeyValues::get_int(const std::string& key, std::int64_t fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
        std::size_t used = 0;
        long long i = std::stoll(*v, &used);
        if (used != v->size()) throw ConfigError("trailing characters");
        return i;
    } catch (const ConfigError&) {
        throw ConfigError("config key " + key + " is not an integer: " + *v);
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + " is not an integer: " + *v);
    }
}

std::string KeyValues::get_string(const std::string& key, std::string fallback) const {
    auto v = get(key);
    return v ? *v : std::move(fallback);
}

KeyValues parse_config_text(const std::string& text) {
    KeyValues out;
    std::istringstream is(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']' || t.size() < 3)
                throw ConfigError("bad section header on line " + std::to_string(lineno));
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty())
                throw ConfigError("empty section name on line " + std::to_string(lineno));
            continue;
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key = value on line " + std::to_string(lineno));
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError("empty key on line " + std::to_string(lineno));
        out.values[section.empty() ? key : section + "." + key] = value;
    }
    return out;
}

KeyValues load_config(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open config file " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace leakhound
