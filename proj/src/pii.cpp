#include "leakhound/pii.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "leakhound/errors.hpp"
#include "leakhound/threads.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace leakhound {

namespace {

constexpr std::string_view kReplacementAlphabet = "abcdefghijklmnopqrstuvwxyz0123456789";

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct FieldSpan {
    FlowField field;
    std::size_t begin;
    std::size_t end;
    bool operator<(const FieldSpan& o) const {
        return std::tie(field, begin, end) < std::tie(o.field, o.begin, o.end);
    }
    bool operator==(const FieldSpan& o) const {
        return field == o.field && begin == o.begin && end == o.end;
    }
};

void scan_text(const PiiRule& rule, std::string_view text, FlowField field,
               std::size_t offset, const std::string& flow_id,
               std::vector<PiiFinding>& out) {
    if (text.empty()) return;
    std::cregex_iterator it(text.data(), text.data() + text.size(), rule.compiled);
    std::cregex_iterator end;
    for (; it != end; ++it) {
        const std::cmatch& m = *it;
        int group = rule.use_group1 && m.size() > 1 && m[1].matched ? 1 : 0;
        if (!m[group].matched || m[group].length() == 0) continue;
        std::string value = m[group].str();
        if (rule.luhn) {
            if (!luhn_valid(value)) continue;
        }
        std::size_t begin = offset + static_cast<std::size_t>(m.position(group));
        out.push_back({flow_id, rule.category, field, begin, begin + value.size(), value});
    }
}

}  // namespace

std::string_view to_string(PiiClass c) {
    switch (c) {
        case PiiClass::location: return "location";
        case PiiClass::user_identifier: return "user_identifier";
        case PiiClass::device_identifier: return "device_identifier";
    }
    return "user_identifier";
}

std::optional<PiiClass> parse_pii_class(std::string_view s) {
    if (s == "location") return PiiClass::location;
    if (s == "user_identifier") return PiiClass::user_identifier;
    if (s == "device_identifier") return PiiClass::device_identifier;
    return std::nullopt;
}

bool luhn_valid(std::string_view digits) {
    if (digits.empty()) return false;
    int sum = 0;
    bool twice = false;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
        if (*it < '0' || *it > '9') return false;
        int d = *it - '0';
        if (twice) {
            d *= 2;
            if (d > 9) d -= 9;
        }
        sum += d;
        twice = !twice;
    }
    return sum % 10 == 0;
}

PiiRule make_rule(PiiClass cls, std::string subtype, std::string pattern,
                  std::string_view options) {
    PiiRule rule;
    rule.category = {cls, std::move(subtype)};
    rule.pattern = std::move(pattern);
    std::size_t start = 0;
    while (start <= options.size() && !options.empty()) {
        std::size_t comma = options.find(',', start);
        std::string_view opt = options.substr(
            start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        if (opt == "icase") rule.icase = true;
        else if (opt == "group1") rule.use_group1 = true;
        else if (opt == "luhn") rule.luhn = true;
        else if (!opt.empty()) throw ConfigError("unknown rule option: " + std::string(opt));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    auto flags = std::regex::ECMAScript | std::regex::optimize;
    if (rule.icase) flags |= std::regex::icase;
    try {
        rule.compiled = std::regex(rule.pattern, flags);
    } catch (const std::regex_error& e) {
        throw ConfigError("rule pattern does not compile: " + rule.pattern + " (" + e.what() + ")");
    }
    std::cmatch m;
    if (std::regex_search("", m, rule.compiled))
        throw ConfigError("rule pattern matches the empty string: " + rule.pattern);
    return rule;
}

std::string default_rules_text() {
    // class \t subtype \t pattern [\t options]
    return
        "user_identifier\temail\t[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\\.[A-Za-z]{2,24}\n"
        "user_identifier\tphone\t\\+?\\b\\d(?:[ \\-()]{0,2}\\d){9,12}\\b\n"
        "user_identifier\tdob\t\\b(?:19|20)\\d{2}-(?:0[1-9]|1[0-2])-(?:0[1-9]|[12]\\d|3[01])\\b\n"
        "user_identifier\tgender\t\\b(?:gender|sex|g)=(male|female|m|f|other)\\b\ticase,group1\n"
        "location\tlat_long\t-?\\b\\d{1,3}\\.\\d{3,8}, ?-?\\d{1,3}\\.\\d{3,8}\\b\n"
        "device_identifier\tandroid_id\t\\b[0-9a-f]{16}\\b\n"
        "device_identifier\tadvertising_id\t\\b[0-9a-fA-F]{8}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-"
        "[0-9a-fA-F]{4}-[0-9a-fA-F]{12}\\b\n"
        "device_identifier\timei\t\\b\\d{15}\\b\tluhn\n";
}

std::vector<PiiRule> load_rules(std::string_view text) {
    std::vector<PiiRule> rules;
    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start < text.size()) {
        std::size_t nl = text.find('\n', start);
        std::string_view line =
            text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        start = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string_view> cols;
        std::size_t cstart = 0;
        while (true) {
            std::size_t tab = line.find('\t', cstart);
            cols.push_back(line.substr(
                cstart, tab == std::string_view::npos ? std::string_view::npos : tab - cstart));
            if (tab == std::string_view::npos) break;
            cstart = tab + 1;
        }
        if (cols.size() < 3 || cols.size() > 4)
            throw ConfigError("rules line " + std::to_string(line_no) + ": expected 3 or 4 columns");
        auto cls = parse_pii_class(cols[0]);
        if (!cls)
            throw ConfigError("rules line " + std::to_string(line_no) + ": unknown class " +
                              std::string(cols[0]));
        rules.push_back(make_rule(*cls, std::string(cols[1]), std::string(cols[2]),
                                  cols.size() == 4 ? cols[3] : std::string_view{}));
    }
    return rules;
}

const std::vector<PiiRule>& default_rules() {
    static const std::vector<PiiRule> rules = load_rules(default_rules_text());
    return rules;
}

std::vector<PiiFinding> scan_flow(const HttpFlow& flow, const std::vector<PiiRule>& rules) {
    std::vector<PiiFinding> findings;
    for (const PiiRule& rule : rules) {
        scan_text(rule, flow.url, FlowField::url, 0, flow.flow_id, findings);
        // Headers are scanned value by value so matches cannot cross a header
        // boundary; spans index into the joined header_text.
        std::size_t offset = 0;
        for (const auto& [name, value] : flow.headers) {
            offset += name.size() + 2;  // "name: "
            scan_text(rule, value, FlowField::header, offset, flow.flow_id, findings);
            offset += value.size() + 1;  // trailing '\n'
        }
        scan_text(rule, flow.body, FlowField::body, 0, flow.flow_id, findings);
    }
    std::stable_sort(findings.begin(), findings.end(),
                     [](const PiiFinding& a, const PiiFinding& b) {
                         if (a.field != b.field) return a.field < b.field;
                         if (a.begin != b.begin) return a.begin < b.begin;
                         if (a.end != b.end) return a.end < b.end;
                         return a.category.subtype < b.category.subtype;
                     });
    return findings;
}

std::vector<LabeledFlow> label_corpus_serial(const Corpus& corpus,
                                             const std::vector<PiiRule>& rules) {
    std::vector<LabeledFlow> out(corpus.flows.size());
    for (std::size_t i = 0; i < corpus.flows.size(); ++i) {
        out[i].flow = corpus.flows[i];
        out[i].findings = scan_flow(corpus.flows[i], rules);
        out[i].label = !out[i].findings.empty();
        out[i].source = LabelSource::scan;
    }
    return out;
}

std::vector<LabeledFlow> label_corpus(const Corpus& corpus, const std::vector<PiiRule>& rules) {
    if (!parallel_enabled()) return label_corpus_serial(corpus, rules);
    std::vector<LabeledFlow> out(corpus.flows.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(thread_count())
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(corpus.flows.size()); ++i) {
        std::size_t k = static_cast<std::size_t>(i);
        out[k].flow = corpus.flows[k];
        out[k].findings = scan_flow(corpus.flows[k], rules);
        out[k].label = !out[k].findings.empty();
        out[k].source = LabelSource::scan;
    }
#endif
    return out;
}

namespace {

// Validates spans, collapses exact duplicates, rejects partial overlaps.
// Returns per-field sorted unique spans paired with original values.
struct SpanPlan {
    std::vector<std::pair<FieldSpan, std::string>> spans;
};

SpanPlan plan_spans(const LabeledFlow& labeled) {
    SpanPlan plan;
    for (const PiiFinding& f : labeled.findings) {
        std::string text = field_text(labeled.flow, f.field);
        if (f.end <= f.begin || f.end > text.size())
            throw std::out_of_range("finding span out of range for flow " + labeled.flow.flow_id);
        plan.spans.push_back({{f.field, f.begin, f.end}, f.value});
    }
    std::sort(plan.spans.begin(), plan.spans.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    plan.spans.erase(std::unique(plan.spans.begin(), plan.spans.end(),
                                 [](const auto& a, const auto& b) { return a.first == b.first; }),
                     plan.spans.end());
    for (std::size_t i = 1; i < plan.spans.size(); ++i) {
        const FieldSpan& prev = plan.spans[i - 1].first;
        const FieldSpan& cur = plan.spans[i].first;
        if (prev.field == cur.field && cur.begin < prev.end)
            throw OverlappingSpans("overlapping findings in flow " + labeled.flow.flow_id);
    }
    return plan;
}

// Writes a replacement into the right flow field. For headers the joined-text
// span is mapped back onto the owning header value.
void write_span(HttpFlow& flow, const FieldSpan& span, const std::string& replacement) {
    switch (span.field) {
        case FlowField::url:
            flow.url.replace(span.begin, span.end - span.begin, replacement);
            return;
        case FlowField::body:
            flow.body.replace(span.begin, span.end - span.begin, replacement);
            return;
        case FlowField::header: {
            std::size_t offset = 0;
            for (auto& [name, value] : flow.headers) {
                std::size_t value_begin = offset + name.size() + 2;
                std::size_t value_end = value_begin + value.size();
                if (span.begin >= value_begin && span.end <= value_end) {
                    value.replace(span.begin - value_begin, span.end - span.begin, replacement);
                    return;
                }
                offset = value_end + 1;
            }
            throw std::out_of_range("header span does not fall inside a single header value");
        }
    }
}

}  // namespace

LabeledFlow randomize_pii_labeled(const LabeledFlow& labeled, std::uint64_t seed) {
    SpanPlan plan = plan_spans(labeled);
    LabeledFlow out;
    out.flow = labeled.flow;
    out.label = labeled.label;
    out.source = labeled.source;

    std::mt19937_64 rng(seed);
    auto draw = [&rng](std::size_t len) {
        std::string s(len, 'a');
        for (auto& c : s)
            c = kReplacementAlphabet[static_cast<std::size_t>(rng() % kReplacementAlphabet.size())];
        return s;
    };

    std::vector<std::string> replacements(plan.spans.size());
    for (std::size_t i = 0; i < plan.spans.size(); ++i) {
        replacements[i] = draw(plan.spans[i].first.end - plan.spans[i].first.begin);
        write_span(out.flow, plan.spans[i].first, replacements[i]);
    }
    // Re-roll any span while an original value still appears somewhere in the
    // rewritten fields. Single-character values are exempt: they collide with
    // ordinary text too easily to guarantee absence.
    for (int attempt = 0; attempt < 32; ++attempt) {
        bool dirty = false;
        std::string url = out.flow.url, hdr = header_text(out.flow), body = out.flow.body;
        for (std::size_t i = 0; i < plan.spans.size(); ++i) {
            const std::string& original = plan.spans[i].second;
            if (original.size() < 2) continue;
            if (url.find(original) != std::string::npos ||
                hdr.find(original) != std::string::npos ||
                body.find(original) != std::string::npos) {
                replacements[i] = draw(replacements[i].size());
                write_span(out.flow, plan.spans[i].first, replacements[i]);
                dirty = true;
                break;  // re-evaluate field text from scratch
            }
        }
        if (!dirty) break;
    }

    // Rewrite findings against the new text; spans are unchanged.
    out.findings = labeled.findings;
    for (PiiFinding& f : out.findings) {
        std::string text = field_text(out.flow, f.field);
        f.value = text.substr(f.begin, f.end - f.begin);
    }
    return out;
}

HttpFlow randomize_pii(const LabeledFlow& labeled, std::uint64_t seed) {
    return randomize_pii_labeled(labeled, seed).flow;
}

std::uint64_t per_flow_seed(std::uint64_t corpus_seed, std::size_t flow_index) {
    return splitmix64(corpus_seed ^ (0x9e3779b97f4a7c15ULL + flow_index));
}

std::string labels_to_jsonl(const std::vector<LabeledFlow>& flows) {
    std::ostringstream os;
    for (const auto& lf : flows) {
        nlohmann::ordered_json rec;
        rec["flow_id"] = lf.flow.flow_id;
        rec["label"] = lf.label ? 1 : 0;
        rec["source"] = lf.source == LabelSource::scan ? "scan" : "external";
        auto findings = nlohmann::ordered_json::array();
        for (const auto& f : lf.findings) {
            nlohmann::ordered_json fj;
            fj["class"] = std::string(to_string(f.category.value));
            fj["subtype"] = f.category.subtype;
            fj["field"] = std::string(to_string(f.field));
            fj["begin"] = f.begin;
            fj["end"] = f.end;
            fj["value"] = f.value;
            findings.push_back(std::move(fj));
        }
        rec["findings"] = std::move(findings);
        os << rec.dump() << "\n";
    }
    return os.str();
}

std::vector<LabeledFlow> attach_labels(const Corpus& corpus, std::string_view jsonl) {
    struct Entry {
        bool label = false;
        LabelSource source = LabelSource::external;
        std::vector<PiiFinding> findings;
    };
    std::unordered_map<std::string, Entry> by_id;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos < jsonl.size()) {
        std::size_t eol = jsonl.find('\n', pos);
        if (eol == std::string_view::npos) eol = jsonl.size();
        std::string_view line = jsonl.substr(pos, eol - pos);
        pos = eol + 1;
        ++lineno;
        if (line.empty() || line.front() == '#') continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception&) {
            throw UnsupportedFormat("label line " + std::to_string(lineno) + " is not JSON");
        }
        if (!rec.is_object() || !rec.contains("flow_id") || !rec["flow_id"].is_string() ||
            !rec.contains("label"))
            throw UnsupportedFormat("label line " + std::to_string(lineno) +
                                    " lacks flow_id or label");
        std::string id = rec["flow_id"].get<std::string>();
        Entry e;
        if (rec["label"].is_boolean())
            e.label = rec["label"].get<bool>();
        else if (rec["label"].is_number_integer())
            e.label = rec["label"].get<int>() != 0;
        else
            throw UnsupportedFormat("label line " + std::to_string(lineno) + " has a bad label");
        if (rec.contains("source") && rec["source"].is_string() &&
            rec["source"].get<std::string>() == "scan")
            e.source = LabelSource::scan;
        if (rec.contains("findings")) {
            if (!rec["findings"].is_array())
                throw UnsupportedFormat("label line " + std::to_string(lineno) +
                                        " has non-array findings");
            for (const auto& fj : rec["findings"]) {
                if (!fj.is_object() || !fj.contains("subtype") || !fj.contains("field") ||
                    !fj.contains("begin") || !fj.contains("end") || !fj.contains("value"))
                    throw UnsupportedFormat("label line " + std::to_string(lineno) +
                                            " has a malformed finding");
                PiiFinding f;
                f.flow_id = id;
                if (fj.contains("class") && fj["class"].is_string()) {
                    auto cls = parse_pii_class(fj["class"].get<std::string>());
                    if (!cls)
                        throw UnsupportedFormat("label line " + std::to_string(lineno) +
                                                " has an unknown class");
                    f.category.value = *cls;
                }
                f.category.subtype = fj["subtype"].get<std::string>();
                auto field = parse_flow_field(fj["field"].get<std::string>());
                if (!field)
                    throw UnsupportedFormat("label line " + std::to_string(lineno) +
                                            " has an unknown field");
                f.field = *field;
                f.begin = fj["begin"].get<std::size_t>();
                f.end = fj["end"].get<std::size_t>();
                f.value = fj["value"].get<std::string>();
                e.findings.push_back(std::move(f));
            }
        }
        if (!by_id.emplace(std::move(id), std::move(e)).second)
            throw UnsupportedFormat("duplicate flow_id in labels on line " +
                                    std::to_string(lineno));
    }
    std::vector<LabeledFlow> out;
    out.reserve(corpus.flows.size());
    for (const auto& flow : corpus.flows) {
        LabeledFlow lf;
        lf.flow = flow;
        auto it = by_id.find(flow.flow_id);
        if (it != by_id.end()) {
            lf.label = it->second.label;
            lf.source = it->second.source;
            lf.findings = it->second.findings;
        } else {
            lf.label = false;
            lf.source = LabelSource::external;
        }
        out.push_back(std::move(lf));
    }
    return out;
}

}  // namespace leakhound
