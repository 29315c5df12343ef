#include "leakhound/tokenize.hpp"

namespace leakhound {

bool is_separator(char c) {
    switch (c) {
        case ',': case ';': case '{': case '}': case '[': case ']':
        case '/': case '(': case ')': case '=': case '&': case '?':
        case ':': case ' ': case '\t': case '\r': case '\n':
            return true;
        default:
            return false;
    }
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || is_separator(text[i])) {
            if (i > start) out.emplace_back(text.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

std::vector<TokenSpan> tokenize_spans(std::string_view text) {
    std::vector<TokenSpan> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || is_separator(text[i])) {
            if (i > start) out.push_back({std::string(text.substr(start, i - start)), start, i});
            start = i + 1;
        }
    }
    return out;
}

}  // namespace leakhound
