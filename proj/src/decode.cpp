#include "leakhound/decode.hpp"

namespace leakhound {

namespace {

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

std::string percent_decode(std::string_view bytes) {
    std::string out;
    out.reserve(bytes.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        char c = bytes[i];
        if (c == '%' && i + 2 < bytes.size()) {
            int hi = hex_value(bytes[i + 1]);
            int lo = hex_value(bytes[i + 2]);
            if (hi >= 0 && lo >= 0) {
                out.push_back(static_cast<char>(hi * 16 + lo));
                i += 2;
                continue;
            }
        }
        out.push_back(c);
    }
    return out;
}

std::string utf8_clean(std::string_view bytes) {
    static const char kReplacement[] = "\xEF\xBF\xBD";  // U+FFFD
    std::string out;
    out.reserve(bytes.size());
    std::size_t i = 0;
    const std::size_t n = bytes.size();
    while (i < n) {
        unsigned char b0 = static_cast<unsigned char>(bytes[i]);
        if (b0 < 0x80) {
            out.push_back(static_cast<char>(b0));
            ++i;
            continue;
        }
        std::size_t need;
        unsigned cp;
        if ((b0 & 0xE0) == 0xC0) { need = 1; cp = b0 & 0x1F; }
        else if ((b0 & 0xF0) == 0xE0) { need = 2; cp = b0 & 0x0F; }
        else if ((b0 & 0xF8) == 0xF0) { need = 3; cp = b0 & 0x07; }
        else {
            // Continuation byte or invalid lead.
            out.append(kReplacement);
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        bool ok = true;
        unsigned decoded = cp;
        for (std::size_t k = 0; k < need; ++k, ++j) {
            if (j >= n || (static_cast<unsigned char>(bytes[j]) & 0xC0) != 0x80) {
                ok = false;
                break;
            }
            decoded = (decoded << 6) | (static_cast<unsigned char>(bytes[j]) & 0x3F);
        }
        if (ok) {
            // Reject overlong forms, surrogates and out-of-range code points.
            static const unsigned kMin[4] = {0, 0x80, 0x800, 0x10000};
            if (decoded < kMin[need] || decoded > 0x10FFFF ||
                (decoded >= 0xD800 && decoded <= 0xDFFF)) {
                ok = false;
            }
        }
        if (ok) {
            out.append(bytes.substr(i, need + 1));
            i += need + 1;
        } else {
            // Consume the maximal subpart: the lead plus any valid continuations.
            out.append(kReplacement);
            i = j > i + 1 ? j : i + 1;
        }
    }
    return out;
}

std::string decode_chain(std::string_view bytes) {
    return utf8_clean(percent_decode(bytes));
}

}  // namespace leakhound
