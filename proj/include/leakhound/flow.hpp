#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace leakhound {

enum class AppCategory { Social, Education, Entertainment, Travel, Shopping, Others };
enum class OsKind { android, ios, windows, unknown };

std::string_view to_string(AppCategory c);
std::string_view to_string(OsKind o);
std::optional<AppCategory> parse_app_category(std::string_view s);
std::optional<OsKind> parse_os_kind(std::string_view s);

// One captured HTTP request. Text fields are valid UTF-8; url and body have
// had percent escapes resolved at ingest time.
struct HttpFlow {
    std::string flow_id;
    std::string app_name;
    AppCategory category = AppCategory::Others;
    OsKind os = OsKind::unknown;
    std::string domain;
    std::int64_t timestamp = 0;  // seconds since epoch
    std::string method;
    std::string url;
    std::vector<std::pair<std::string, std::string>> headers;  // ordered
    std::string body;

    bool operator==(const HttpFlow&) const = default;
};

struct Corpus {
    std::vector<HttpFlow> flows;  // flow_id unique within a corpus
    std::string provenance;
};

enum class FlowField { url, header, body };

std::string_view to_string(FlowField f);
std::optional<FlowField> parse_flow_field(std::string_view s);

// Canonical text of a field. Findings and their spans always refer to this
// text; for headers it is the joined "name: value\n" block.
std::string header_text(const HttpFlow& flow);
std::string field_text(const HttpFlow& flow, FlowField field);

}  // namespace leakhound
