#include "leakhound/flow.hpp"

#include <algorithm>
#include <cctype>

namespace leakhound {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

std::string_view to_string(AppCategory c) {
    switch (c) {
        case AppCategory::Social: return "Social";
        case AppCategory::Education: return "Education";
        case AppCategory::Entertainment: return "Entertainment";
        case AppCategory::Travel: return "Travel";
        case AppCategory::Shopping: return "Shopping";
        case AppCategory::Others: return "Others";
    }
    return "Others";
}

std::string_view to_string(OsKind o) {
    switch (o) {
        case OsKind::android: return "android";
        case OsKind::ios: return "ios";
        case OsKind::windows: return "windows";
        case OsKind::unknown: return "unknown";
    }
    return "unknown";
}

std::optional<AppCategory> parse_app_category(std::string_view s) {
    std::string l = lower(s);
    if (l == "social") return AppCategory::Social;
    if (l == "education") return AppCategory::Education;
    if (l == "entertainment") return AppCategory::Entertainment;
    if (l == "travel") return AppCategory::Travel;
    if (l == "shopping") return AppCategory::Shopping;
    if (l == "others") return AppCategory::Others;
    return std::nullopt;
}

std::optional<OsKind> parse_os_kind(std::string_view s) {
    std::string l = lower(s);
    if (l == "android") return OsKind::android;
    if (l == "ios") return OsKind::ios;
    if (l == "windows") return OsKind::windows;
    if (l == "unknown") return OsKind::unknown;
    return std::nullopt;
}

std::string_view to_string(FlowField f) {
    switch (f) {
        case FlowField::url: return "url";
        case FlowField::header: return "header";
        case FlowField::body: return "body";
    }
    return "url";
}

std::optional<FlowField> parse_flow_field(std::string_view s) {
    if (s == "url") return FlowField::url;
    if (s == "header") return FlowField::header;
    if (s == "body") return FlowField::body;
    return std::nullopt;
}

std::string header_text(const HttpFlow& flow) {
    std::string out;
    for (const auto& [name, value] : flow.headers) {
        out += name;
        out += ": ";
        out += value;
        out += '\n';
    }
    return out;
}

std::string field_text(const HttpFlow& flow, FlowField field) {
    switch (field) {
        case FlowField::url: return flow.url;
        case FlowField::header: return header_text(flow);
        case FlowField::body: return flow.body;
    }
    return {};
}

}  // namespace leakhound
