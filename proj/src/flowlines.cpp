#include "leakhound/flowlines.hpp"

#include <ctime>
#include <unordered_set>

#include "json.hpp"
#include "leakhound/decode.hpp"
#include "leakhound/errors.hpp"
#include "leakhound/threads.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace leakhound {

using nlohmann::json;

namespace {

constexpr std::string_view kProvenanceMarker = "#! provenance: ";

std::string escape_percent(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '%') out += "%25";
        else out.push_back(c);
    }
    return out;
}

std::vector<std::string_view> split_lines(std::string_view bytes) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= bytes.size()) {
        std::size_t nl = bytes.find('\n', start);
        if (nl == std::string_view::npos) {
            if (start < bytes.size()) lines.push_back(bytes.substr(start));
            break;
        }
        lines.push_back(bytes.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

bool blank(std::string_view line) {
    for (char c : line)
        if (c != ' ' && c != '\t' && c != '\r') return false;
    return true;
}

// Merges per-record results, enforcing flow_id uniqueness. Duplicate ids count
// as malformed.
ParseResult merge_records(std::vector<std::optional<HttpFlow>>& decoded, std::size_t n_records,
                          std::string provenance) {
    ParseResult result;
    result.corpus.provenance = std::move(provenance);
    std::unordered_set<std::string> seen;
    for (auto& flow : decoded) {
        if (!flow || !seen.insert(flow->flow_id).second) {
            ++result.n_skipped;
            continue;
        }
        result.corpus.flows.push_back(std::move(*flow));
        ++result.n_parsed;
    }
    if (n_records > 0 && result.n_skipped * 2 > n_records)
        throw TooManyMalformed(result.n_skipped, n_records);
    return result;
}

std::int64_t parse_iso8601(std::string_view s) {
    // Accepts YYYY-MM-DDTHH:MM:SS with optional fraction and Z or +-HH:MM.
    std::tm tm{};
    int y, mo, d, h, mi, se;
    if (std::sscanf(std::string(s).c_str(), "%d-%d-%dT%d:%d:%d", &y, &mo, &d, &h, &mi, &se) != 6)
        return 0;
    tm.tm_year = y - 1900;
    tm.tm_mon = mo - 1;
    tm.tm_mday = d;
    tm.tm_hour = h;
    tm.tm_min = mi;
    tm.tm_sec = se;
    std::int64_t t = timegm(&tm);
    std::size_t tz = s.find_last_of("+-");
    if (tz != std::string_view::npos && tz > 10) {  // past the date part
        int oh = 0, om = 0;
        if (std::sscanf(std::string(s.substr(tz + 1)).c_str(), "%d:%d", &oh, &om) >= 1) {
            std::int64_t off = oh * 3600 + om * 60;
            t += s[tz] == '+' ? -off : off;
        }
    }
    return t;
}

std::string domain_of_url(std::string_view url) {
    std::size_t scheme = url.find("://");
    std::size_t host_start = scheme == std::string_view::npos ? 0 : scheme + 3;
    std::size_t host_end = url.find_first_of("/?#", host_start);
    std::string_view host = url.substr(host_start, host_end == std::string_view::npos
                                                       ? std::string_view::npos
                                                       : host_end - host_start);
    std::size_t at = host.rfind('@');
    if (at != std::string_view::npos) host = host.substr(at + 1);
    std::size_t colon = host.find(':');
    if (colon != std::string_view::npos) host = host.substr(0, colon);
    return std::string(host);
}

std::optional<HttpFlow> flow_from_recon_record(const json& j, std::size_t index) {
    if (!j.is_object()) return std::nullopt;
    auto str = [&](std::initializer_list<const char*> keys) -> std::string {
        for (const char* k : keys) {
            auto it = j.find(k);
            if (it != j.end() && it->is_string()) return it->get<std::string>();
        }
        return {};
    };
    HttpFlow flow;
    flow.flow_id = str({"flow_id", "id"});
    if (flow.flow_id.empty()) flow.flow_id = "recon-" + std::to_string(index + 1);
    flow.app_name = str({"package_name", "app", "app_name"});
    if (flow.app_name.empty()) flow.app_name = "unknown";
    flow.domain = str({"domain", "host"});
    std::string url = str({"uri", "url", "path"});
    if (url.empty() && flow.domain.empty()) return std::nullopt;
    flow.url = decode_chain(url);
    if (flow.domain.empty()) flow.domain = domain_of_url(flow.url);
    flow.method = str({"method"});
    if (flow.method.empty()) flow.method = "GET";
    std::string platform = str({"platform", "os"});
    flow.os = OsKind::unknown;
    for (auto kind : {OsKind::android, OsKind::ios, OsKind::windows}) {
        if (platform.find(to_string(kind)) != std::string::npos) flow.os = kind;
    }
    flow.category = AppCategory::Others;
    for (const char* k : {"ts", "timestamp"}) {
        auto it = j.find(k);
        if (it != j.end() && it->is_number())
            flow.timestamp = static_cast<std::int64_t>(it->get<double>());
    }
    auto hs = j.find("headers");
    if (hs != j.end()) {
        if (hs->is_object()) {
            for (auto it = hs->begin(); it != hs->end(); ++it) {
                if (it.value().is_string())
                    flow.headers.emplace_back(it.key(), utf8_clean(it.value().get<std::string>()));
            }
        } else if (hs->is_array()) {
            for (const auto& h : *hs) {
                if (h.is_array() && h.size() == 2 && h[0].is_string() && h[1].is_string())
                    flow.headers.emplace_back(h[0].get<std::string>(),
                                              utf8_clean(h[1].get<std::string>()));
            }
        }
    }
    flow.body = decode_chain(str({"post_body", "body"}));
    return flow;
}

ParseResult parse_har(std::string_view bytes) {
    json doc = json::parse(bytes, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("log") ||
        !doc["log"].is_object() || !doc["log"].contains("entries") ||
        !doc["log"]["entries"].is_array())
        throw TooManyMalformed(1, 1);
    const json& log = doc["log"];
    std::string app = "har";
    if (log.contains("creator") && log["creator"].is_object() &&
        log["creator"].contains("name") && log["creator"]["name"].is_string())
        app = log["creator"]["name"].get<std::string>();

    const json& entries = log["entries"];
    std::vector<std::optional<HttpFlow>> decoded;
    decoded.reserve(entries.size());
    std::size_t index = 0;
    for (const auto& entry : entries) {
        ++index;
        if (!entry.is_object() || !entry.contains("request") || !entry["request"].is_object()) {
            decoded.push_back(std::nullopt);
            continue;
        }
        const json& req = entry["request"];
        if (!req.contains("url") || !req["url"].is_string() || !req.contains("method") ||
            !req["method"].is_string()) {
            decoded.push_back(std::nullopt);
            continue;
        }
        HttpFlow flow;
        flow.flow_id = "har-" + std::to_string(index);
        flow.app_name = app;
        flow.category = AppCategory::Others;
        flow.os = OsKind::unknown;
        flow.method = req["method"].get<std::string>();
        flow.url = decode_chain(req["url"].get<std::string>());
        flow.domain = domain_of_url(flow.url);
        if (entry.contains("startedDateTime") && entry["startedDateTime"].is_string())
            flow.timestamp = parse_iso8601(entry["startedDateTime"].get<std::string>());
        if (req.contains("headers") && req["headers"].is_array()) {
            for (const auto& h : req["headers"]) {
                if (h.is_object() && h.contains("name") && h["name"].is_string() &&
                    h.contains("value") && h["value"].is_string())
                    flow.headers.emplace_back(h["name"].get<std::string>(),
                                              utf8_clean(h["value"].get<std::string>()));
            }
        }
        if (req.contains("postData") && req["postData"].is_object() &&
            req["postData"].contains("text") && req["postData"]["text"].is_string())
            flow.body = decode_chain(req["postData"]["text"].get<std::string>());
        decoded.push_back(std::move(flow));
    }
    return merge_records(decoded, entries.size(), "har: " + app);
}

ParseResult parse_recon(std::string_view bytes) {
    std::size_t first = bytes.find_first_not_of(" \t\r\n");
    std::vector<std::optional<HttpFlow>> decoded;
    std::size_t n_records = 0;
    if (first != std::string_view::npos && bytes[first] == '[') {
        json doc = json::parse(bytes, nullptr, false);
        if (doc.is_discarded() || !doc.is_array()) throw TooManyMalformed(1, 1);
        n_records = doc.size();
        std::size_t index = 0;
        for (const auto& rec : doc) decoded.push_back(flow_from_recon_record(rec, index++));
    } else {
        auto lines = split_lines(bytes);
        std::size_t index = 0;
        for (auto line : lines) {
            if (blank(line) || line[0] == '#') continue;
            ++n_records;
            json rec = json::parse(line, nullptr, false);
            decoded.push_back(rec.is_discarded() ? std::nullopt
                                                 : flow_from_recon_record(rec, index));
            ++index;
        }
    }
    return merge_records(decoded, n_records, "recon dump");
}

}  // namespace

std::optional<FlowLogFormat> parse_format_name(std::string_view s) {
    if (s == "flowlines") return FlowLogFormat::flowlines;
    if (s == "har") return FlowLogFormat::har;
    if (s == "recon") return FlowLogFormat::recon;
    return std::nullopt;
}

std::optional<HttpFlow> parse_flowlines_record(std::string_view line) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    for (const char* key : {"flow_id", "app", "category", "os", "domain", "method", "url"}) {
        auto it = j.find(key);
        if (it == j.end() || !it->is_string()) return std::nullopt;
    }
    auto ts = j.find("ts");
    if (ts == j.end() || !ts->is_number_integer()) return std::nullopt;

    HttpFlow flow;
    flow.flow_id = j["flow_id"].get<std::string>();
    if (flow.flow_id.empty()) return std::nullopt;
    flow.app_name = j["app"].get<std::string>();
    auto category = parse_app_category(j["category"].get<std::string>());
    auto os = parse_os_kind(j["os"].get<std::string>());
    if (!category || !os) return std::nullopt;
    flow.category = *category;
    flow.os = *os;
    flow.domain = j["domain"].get<std::string>();
    flow.timestamp = ts->get<std::int64_t>();
    flow.method = j["method"].get<std::string>();
    flow.url = decode_chain(j["url"].get<std::string>());
    if (auto it = j.find("headers"); it != j.end()) {
        if (!it->is_array()) return std::nullopt;
        for (const auto& h : *it) {
            if (!h.is_array() || h.size() != 2 || !h[0].is_string() || !h[1].is_string())
                return std::nullopt;
            flow.headers.emplace_back(h[0].get<std::string>(), h[1].get<std::string>());
        }
    }
    if (auto it = j.find("body"); it != j.end()) {
        if (!it->is_string()) return std::nullopt;
        flow.body = decode_chain(it->get<std::string>());
    }
    return flow;
}

namespace {

ParseResult parse_flowlines_impl(std::string_view bytes, bool parallel) {
    auto lines = split_lines(bytes);
    std::string provenance;
    std::vector<std::string_view> records;
    records.reserve(lines.size());
    for (auto line : lines) {
        if (blank(line)) continue;
        if (line[0] == '#') {
            if (line.substr(0, kProvenanceMarker.size()) == kProvenanceMarker)
                provenance = std::string(line.substr(kProvenanceMarker.size()));
            continue;
        }
        records.push_back(line);
    }
    std::vector<std::optional<HttpFlow>> decoded(records.size());
    if (parallel && parallel_enabled()) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(thread_count())
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(records.size()); ++i)
            decoded[static_cast<std::size_t>(i)] =
                parse_flowlines_record(records[static_cast<std::size_t>(i)]);
#endif
    } else {
        for (std::size_t i = 0; i < records.size(); ++i)
            decoded[i] = parse_flowlines_record(records[i]);
    }
    return merge_records(decoded, records.size(), std::move(provenance));
}

}  // namespace

ParseResult parse_flowlines_serial(std::string_view bytes) {
    return parse_flowlines_impl(bytes, false);
}

ParseResult parse_flow_log(std::string_view bytes, FlowLogFormat format) {
    switch (format) {
        case FlowLogFormat::flowlines: return parse_flowlines_impl(bytes, true);
        case FlowLogFormat::har: return parse_har(bytes);
        case FlowLogFormat::recon: return parse_recon(bytes);
    }
    throw UnsupportedFormat("unknown flow log format");
}

std::string to_flowlines(const Corpus& corpus) {
    std::string out;
    if (!corpus.provenance.empty()) {
        out += kProvenanceMarker;
        out += corpus.provenance;
        out += '\n';
    }
    for (const HttpFlow& flow : corpus.flows) {
        json j;
        j["flow_id"] = flow.flow_id;
        j["app"] = flow.app_name;
        j["category"] = to_string(flow.category);
        j["os"] = to_string(flow.os);
        j["domain"] = flow.domain;
        j["ts"] = flow.timestamp;
        j["method"] = flow.method;
        j["url"] = escape_percent(flow.url);
        if (!flow.headers.empty()) {
            json hs = json::array();
            for (const auto& [name, value] : flow.headers) hs.push_back({name, value});
            j["headers"] = hs;
        }
        if (!flow.body.empty()) j["body"] = escape_percent(flow.body);
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace leakhound
