#pragma once

#include <string>
#include <string_view>

namespace leakhound {

// Porter's 1980 suffix-stripping algorithm. Input must be lowercase ASCII
// letters; anything else is returned unchanged. Words of length <= 2 are
// returned as-is, matching the original.
std::string porter_stem(std::string_view word);

}  // namespace leakhound
