#pragma once

#include <map>
#include <optional>
#include <string>

namespace leakhound {

// Flat view over an INI style file. Keys inside [section] become
// "section.key"; keys before any section keep their bare name.
struct KeyValues {
    std::map<std::string, std::string> values;

    std::optional<std::string> get(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::string get_string(const std::string& key, std::string fallback) const;
};

KeyValues parse_config_text(const std::string& text);
KeyValues load_config(const std::string& path);

}  // namespace leakhound
