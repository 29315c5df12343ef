#pragma once

#include <cstddef>
#include <vector>

namespace leakhound {

struct Metrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double train_time_seconds = 0.0;  // filled by callers that timed a fit
    std::size_t n_features = 0;
};

struct ConfusionCounts {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

ConfusionCounts confusion(const std::vector<double>& probabilities,
                          const std::vector<int>& labels, double threshold = 0.5);

// Probabilities at exactly the threshold count as positive. Undefined ratios
// (no predicted positives, no actual positives) evaluate to 0.
Metrics evaluate(const std::vector<double>& probabilities, const std::vector<int>& labels,
                 double threshold = 0.5);

}  // namespace leakhound
