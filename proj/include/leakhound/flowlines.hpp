#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "leakhound/flow.hpp"

namespace leakhound {

enum class FlowLogFormat { flowlines, har, recon };

std::optional<FlowLogFormat> parse_format_name(std::string_view s);

struct ParseResult {
    Corpus corpus;
    std::size_t n_parsed = 0;
    std::size_t n_skipped = 0;
};

// Parses a captured flow log. Malformed records are skipped and counted;
// throws TooManyMalformed when more than half of the records are bad.
//
// flowlines is the native format: one JSON object per LF-terminated line with
// required keys flow_id, app, category, os, domain, ts, method, url and
// optional headers (list of [name, value] pairs) and body. Lines starting
// with '#' are comments; "#! provenance:" carries the corpus provenance.
// url and body are stored with '%' escaped as "%25" and run through
// decode_chain on read, so serialize/parse round-trips exactly.
ParseResult parse_flow_log(std::string_view bytes, FlowLogFormat format);

// Plain-loop reference for the record-parallel flowlines path.
ParseResult parse_flowlines_serial(std::string_view bytes);

std::string to_flowlines(const Corpus& corpus);

// Decodes one flowlines record. Returns nullopt for malformed input.
std::optional<HttpFlow> parse_flowlines_record(std::string_view line);

}  // namespace leakhound
