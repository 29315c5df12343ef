#pragma once

#include <cstddef>
#include <vector>

#include "leakhound/features.hpp"

namespace leakhound {

struct SelectionResult {
    std::vector<std::size_t> kept;  // ascending column indices
    bool degenerate = false;        // nothing qualified; kept is empty
};

// ceil with a small backoff so values that are integral up to float noise
// do not round up an extra step.
std::size_t guarded_ceil(double x);

// Pool all nonzero |importance| values, cut at the given percentile, then
// keep only features above the cut in EVERY explained sample.
SelectionResult select_intersection(const std::vector<std::vector<double>>& importances,
                                    double percentile);

// Per sample take the ceil(top_fraction*d) largest |importance| features
// (ties to the lower index), then keep features appearing in at least
// ceil(support_fraction*n) of those top lists.
SelectionResult select_top_vote(const std::vector<std::vector<double>>& importances,
                                double top_fraction, double support_fraction);

// Slice matrix and vocabulary down to the kept columns for a refit.
// An empty selection cannot be retrained.
std::pair<FeatureMatrix, Vocabulary> retrain_selected(const FeatureMatrix& m,
                                                      const Vocabulary& vocab,
                                                      const std::vector<std::size_t>& kept);

}  // namespace leakhound
