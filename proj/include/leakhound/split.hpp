#pragma once

#include <cstdint>
#include <vector>

#include "leakhound/pii.hpp"

namespace leakhound {

struct SplitResult {
    std::vector<LabeledFlow> train;
    std::vector<LabeledFlow> test;
};

// Whole domains go to one side or the other so the test set never shares an
// endpoint with training data. Domains are shuffled by seed, then assigned to
// the test side until it holds at least test_fraction of the flows; both
// sides always keep at least one domain.
SplitResult split_by_domain(const std::vector<LabeledFlow>& flows, double test_fraction,
                            std::uint64_t seed);

// Throws ConfigError if any domain appears on both sides.
void check_domain_disjoint(const std::vector<LabeledFlow>& train,
                           const std::vector<LabeledFlow>& test);

}  // namespace leakhound
