#pragma once

#include <cstdint>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "leakhound/flow.hpp"

namespace leakhound {

enum class PiiClass { location, user_identifier, device_identifier };

std::string_view to_string(PiiClass c);
std::optional<PiiClass> parse_pii_class(std::string_view s);

struct PiiCategory {
    PiiClass value = PiiClass::user_identifier;
    std::string subtype;  // e.g. "email", "lat_long", "android_id"

    bool operator==(const PiiCategory&) const = default;
};

// A detection rule. Rules files are line oriented:
//   class <TAB> subtype <TAB> pattern [<TAB> options]
// options is a comma list of: icase (case-insensitive), group1 (the finding
// covers capture group 1 instead of the whole match, for key=value patterns),
// luhn (digits must pass the Luhn check, used for IMEI).
struct PiiRule {
    PiiCategory category;
    std::string pattern;
    bool icase = false;
    bool use_group1 = false;
    bool luhn = false;
    std::regex compiled;
};

struct PiiFinding {
    std::string flow_id;
    PiiCategory category;
    FlowField field = FlowField::url;
    std::size_t begin = 0;  // byte offsets into field_text(flow, field)
    std::size_t end = 0;
    std::string value;  // equals the text slice at [begin, end)

    bool operator==(const PiiFinding&) const = default;
};

enum class LabelSource { scan, external };

struct LabeledFlow {
    HttpFlow flow;
    bool label = false;
    std::vector<PiiFinding> findings;
    LabelSource source = LabelSource::scan;
};

PiiRule make_rule(PiiClass cls, std::string subtype, std::string pattern,
                  std::string_view options = "");

// Built-in rule set: email, phone (10-13 digits with separators), ISO dates
// as dob, gender key=value tokens, lat/long decimal pairs, 16-hex android_id,
// UUID advertising ids, IMEI via Luhn.
const std::vector<PiiRule>& default_rules();

std::vector<PiiRule> load_rules(std::string_view text);
std::string default_rules_text();

bool luhn_valid(std::string_view digits);

// All rule matches over url, headers and body, sorted by (field, begin).
// Overlapping matches from different rules are all reported; matches never
// cross a header boundary.
std::vector<PiiFinding> scan_flow(const HttpFlow& flow, const std::vector<PiiRule>& rules);

// Flow-parallel scan of a whole corpus; label = any finding.
std::vector<LabeledFlow> label_corpus(const Corpus& corpus, const std::vector<PiiRule>& rules);
std::vector<LabeledFlow> label_corpus_serial(const Corpus& corpus,
                                             const std::vector<PiiRule>& rules);

// Replaces every finding with a uniformly random [a-z0-9] string of the same
// length. Deterministic for a fixed seed; non-PII bytes are untouched.
// Identical duplicate spans are collapsed; partially overlapping spans throw
// OverlappingSpans.
HttpFlow randomize_pii(const LabeledFlow& labeled, std::uint64_t seed);

// Same, but also returns the findings rewritten to the replacement values
// (spans are unchanged because replacements preserve length).
LabeledFlow randomize_pii_labeled(const LabeledFlow& labeled, std::uint64_t seed);

// Stable per-flow seed derivation shared by the feature pipeline and its
// test oracles.
std::uint64_t per_flow_seed(std::uint64_t corpus_seed, std::size_t flow_index);

// One JSON object per line: flow_id, label, source and the findings.
std::string labels_to_jsonl(const std::vector<LabeledFlow>& flows);

// Rejoin a corpus with a label file by flow_id. Flows without an entry are
// negative with no findings. Malformed lines and duplicate ids throw
// UnsupportedFormat.
std::vector<LabeledFlow> attach_labels(const Corpus& corpus, std::string_view jsonl);

}  // namespace leakhound
