#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace leakhound {

// Separator set used to split HTTP flow text into tokens. Deliberately does
// not include '.', '-', '_', '@' or '%' so hostnames, header names and email
// shapes stay whole.
bool is_separator(char c);

// Splits on the separator set, drops empty tokens, preserves order.
std::vector<std::string> tokenize(std::string_view text);

struct TokenSpan {
    std::string token;
    std::size_t begin = 0;  // byte offsets into the tokenized text
    std::size_t end = 0;
};

// Same split but keeps the source span of every token.
std::vector<TokenSpan> tokenize_spans(std::string_view text);

}  // namespace leakhound
