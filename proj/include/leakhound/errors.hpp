#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace leakhound {

// Error taxonomy for the whole library. Everything derives from std::runtime_error
// so callers that do not care about the distinction can catch one type.

struct UnsupportedFormat : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when more than half of the records in a flow log fail to parse.
// Usually means the caller picked the wrong format.
struct TooManyMalformed : std::runtime_error {
    std::size_t skipped = 0;
    std::size_t total = 0;
    TooManyMalformed(std::size_t skipped_, std::size_t total_)
        : std::runtime_error("too many malformed records: " + std::to_string(skipped_) +
                             " of " + std::to_string(total_)),
          skipped(skipped_), total(total_) {}
};

struct OverlappingSpans : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyVocabulary : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateLabels : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonFiniteLoss : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularSystem : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptySelection : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace leakhound
