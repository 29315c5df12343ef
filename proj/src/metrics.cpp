#include "leakhound/metrics.hpp"

#include "leakhound/errors.hpp"

namespace leakhound {

ConfusionCounts confusion(const std::vector<double>& probabilities,
                          const std::vector<int>& labels, double threshold) {
    if (probabilities.size() != labels.size())
        throw DimensionMismatch("prediction and label counts differ");
    if (probabilities.empty()) throw ConfigError("cannot evaluate zero samples");
    ConfusionCounts c;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        bool pred = probabilities[i] >= threshold;
        bool truth = labels[i] != 0;
        if (pred && truth) ++c.tp;
        else if (pred && !truth) ++c.fp;
        else if (!pred && truth) ++c.fn;
        else ++c.tn;
    }
    return c;
}

Metrics evaluate(const std::vector<double>& probabilities, const std::vector<int>& labels,
                 double threshold) {
    ConfusionCounts c = confusion(probabilities, labels, threshold);
    Metrics m;
    double n = static_cast<double>(c.tp + c.fp + c.tn + c.fn);
    m.accuracy = static_cast<double>(c.tp + c.tn) / n;
    m.precision = (c.tp + c.fp) ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
    m.recall = (c.tp + c.fn) ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
    m.f1 = (m.precision + m.recall > 0.0)
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

}  // namespace leakhound
