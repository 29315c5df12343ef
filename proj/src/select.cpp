#include "leakhound/select.hpp"

#include <algorithm>
#include <cmath>

#include "leakhound/errors.hpp"

namespace leakhound {
namespace {

void check_shape(const std::vector<std::vector<double>>& importances) {
    if (importances.empty()) throw ConfigError("selection needs at least one explanation");
    std::size_t d = importances.front().size();
    if (d == 0) throw ConfigError("selection needs at least one feature");
    for (const auto& row : importances)
        if (row.size() != d) throw DimensionMismatch("explanations have differing widths");
}

}  // namespace

std::size_t guarded_ceil(double x) {
    double c = std::ceil(x - 1e-9);
    if (c < 0.0) return 0;
    return static_cast<std::size_t>(c);
}

SelectionResult select_intersection(const std::vector<std::vector<double>>& importances,
                                    double percentile) {
    check_shape(importances);
    if (!(percentile >= 0.0 && percentile <= 100.0))
        throw ConfigError("percentile must lie in [0, 100]");
    const std::size_t d = importances.front().size();

    std::vector<double> pooled;
    for (const auto& row : importances)
        for (double v : row)
            if (v != 0.0) pooled.push_back(std::abs(v));

    SelectionResult out;
    if (pooled.empty()) {
        out.degenerate = true;
        return out;
    }
    double cut = percentile_linear(pooled, percentile);
    for (std::size_t j = 0; j < d; ++j) {
        bool everywhere = true;
        for (const auto& row : importances)
            if (!(std::abs(row[j]) > cut)) {
                everywhere = false;
                break;
            }
        if (everywhere) out.kept.push_back(j);
    }
    out.degenerate = out.kept.empty();
    return out;
}

SelectionResult select_top_vote(const std::vector<std::vector<double>>& importances,
                                double top_fraction, double support_fraction) {
    check_shape(importances);
    if (!(top_fraction > 0.0 && top_fraction <= 1.0))
        throw ConfigError("top_fraction must lie in (0, 1]");
    if (!(support_fraction > 0.0 && support_fraction <= 1.0))
        throw ConfigError("support_fraction must lie in (0, 1]");
    const std::size_t n = importances.size();
    const std::size_t d = importances.front().size();
    const std::size_t k = std::min(d, std::max<std::size_t>(
                                          1, guarded_ceil(top_fraction * static_cast<double>(d))));
    const std::size_t need = std::max<std::size_t>(
        1, guarded_ceil(support_fraction * static_cast<double>(n)));

    std::vector<std::size_t> votes(d, 0);
    std::vector<std::size_t> idx(d);
    for (const auto& row : importances) {
        for (std::size_t j = 0; j < d; ++j) idx[j] = j;
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            double va = std::abs(row[a]), vb = std::abs(row[b]);
            if (va != vb) return va > vb;
            return a < b;
        });
        for (std::size_t r = 0; r < k; ++r) ++votes[idx[r]];
    }
    SelectionResult out;
    for (std::size_t j = 0; j < d; ++j)
        if (votes[j] >= need) out.kept.push_back(j);
    out.degenerate = out.kept.empty();
    return out;
}

std::pair<FeatureMatrix, Vocabulary> retrain_selected(const FeatureMatrix& m,
                                                      const Vocabulary& vocab,
                                                      const std::vector<std::size_t>& kept) {
    if (kept.empty()) throw EmptySelection("no features were selected, nothing to retrain");
    for (std::size_t j : kept)
        if (j >= m.n_cols) throw DimensionMismatch("selected column is out of range");
    return {slice_columns(m, kept), slice_vocab(vocab, kept)};
}

}  // namespace leakhound
