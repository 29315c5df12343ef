#pragma once

#include <string>
#include <string_view>

namespace leakhound {

// Resolves %XX escapes in place. A '%' not followed by two hex digits is kept
// verbatim. '+' is not treated as a space. Total: never throws.
std::string percent_decode(std::string_view bytes);

// Replaces ill-formed UTF-8 with U+FFFD using the maximal-subpart convention:
// a truncated or invalid multi-byte sequence yields one replacement character
// per maximal invalid prefix, lone invalid bytes yield one each.
std::string utf8_clean(std::string_view bytes);

// percent_decode followed by utf8_clean. Idempotent on decoded text that
// contains no '%'.
std::string decode_chain(std::string_view bytes);

}  // namespace leakhound
