#include "leakhound/lime.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <type_traits>

#include "leakhound/errors.hpp"
#include "leakhound/threads.hpp"

namespace leakhound {
namespace {

double unit_draw(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <class Model>
std::vector<double> batch_predict_impl(const Model& model, const std::uint8_t* rows,
                                       std::size_t n, std::size_t d, bool allow_parallel) {
    std::vector<double> out(n);
#ifdef _OPENMP
    if (allow_parallel && parallel_enabled()) {
#pragma omp parallel for schedule(static) num_threads(thread_count())
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            auto idx = static_cast<std::size_t>(i);
            if constexpr (std::is_same_v<Model, DecisionTree>)
                out[idx] = dt_predict_row(model, rows + idx * d, d);
            else
                out[idx] = nn_predict_row(model, rows + idx * d, d);
        }
        return out;
    }
#else
    (void)allow_parallel;
#endif
    for (std::size_t i = 0; i < n; ++i) {
        if constexpr (std::is_same_v<Model, DecisionTree>)
            out[i] = dt_predict_row(model, rows + i * d, d);
        else
            out[i] = nn_predict_row(model, rows + i * d, d);
    }
    return out;
}

}  // namespace

std::vector<double> activation_rates(const FeatureMatrix& m) {
    if (m.n_rows == 0) throw ConfigError("activation rates need at least one row");
    std::vector<double> rates(m.n_cols, 0.0);
    for (std::size_t r = 0; r < m.n_rows; ++r)
        for (std::size_t c = 0; c < m.n_cols; ++c) rates[c] += m.at(r, c);
    for (auto& v : rates) v /= static_cast<double>(m.n_rows);
    return rates;
}

PerturbationSet perturb_instance(const std::uint8_t* x, std::size_t d, std::size_t n,
                                 std::uint64_t seed, const std::vector<double>& rates) {
    if (n == 0) throw ConfigError("perturbation set needs at least one row");
    if (rates.size() != d) throw DimensionMismatch("rate vector width does not match d");
    PerturbationSet set;
    set.n = n;
    set.d = d;
    set.data.assign(n * d, 0);
    for (std::size_t j = 0; j < d; ++j) set.data[j] = x[j] ? 1 : 0;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 1; i < n; ++i) {
        std::uint8_t* row = set.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            double u = unit_draw(rng);
            if (x[j])
                row[j] = u < 0.5 ? 0 : 1;
            else
                row[j] = u < rates[j] ? 1 : 0;
        }
    }
    return set;
}

std::size_t hamming_distance(const std::uint8_t* a, const std::uint8_t* b, std::size_t d) {
    std::size_t h = 0;
    for (std::size_t j = 0; j < d; ++j) h += (a[j] != b[j]) ? 1 : 0;
    return h;
}

double kernel_weight(std::size_t hamming, std::size_t d, double width) {
    if (width <= 0.0) width = 0.75 * std::sqrt(static_cast<double>(d));
    return std::exp(-static_cast<double>(hamming) / (width * width));
}

PredictFn make_predict_fn(const DecisionTree& tree) {
    return [&tree](const std::uint8_t* rows, std::size_t n, std::size_t d) {
        return batch_predict(tree, rows, n, d);
    };
}

PredictFn make_predict_fn(const MlpModel& model) {
    return [&model](const std::uint8_t* rows, std::size_t n, std::size_t d) {
        return batch_predict(model, rows, n, d);
    };
}

std::vector<double> batch_predict(const DecisionTree& tree, const std::uint8_t* rows,
                                  std::size_t n, std::size_t d) {
    return batch_predict_impl(tree, rows, n, d, true);
}

std::vector<double> batch_predict(const MlpModel& model, const std::uint8_t* rows,
                                  std::size_t n, std::size_t d) {
    return batch_predict_impl(model, rows, n, d, true);
}

std::vector<double> batch_predict_serial(const DecisionTree& tree, const std::uint8_t* rows,
                                         std::size_t n, std::size_t d) {
    return batch_predict_impl(tree, rows, n, d, false);
}

std::vector<double> batch_predict_serial(const MlpModel& model, const std::uint8_t* rows,
                                         std::size_t n, std::size_t d) {
    return batch_predict_impl(model, rows, n, d, false);
}

std::vector<double> solve_weighted_ridge(const std::vector<std::uint8_t>& Z, std::size_t n,
                                         std::size_t d, const std::vector<double>& y,
                                         const std::vector<double>& w, double lambda) {
    if (Z.size() != n * d || y.size() != n || w.size() != n)
        throw DimensionMismatch("ridge system sizes disagree");
    const std::size_t p = d + 1;  // intercept first
    std::vector<double> A(p * p, 0.0), rhs(p, 0.0);
    // A = Xt W X with X = [1 Z]; accumulate the upper triangle.
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t* z = Z.data() + i * d;
        double wi = w[i];
        if (wi == 0.0) continue;
        A[0] += wi;
        rhs[0] += wi * y[i];
        for (std::size_t a = 0; a < d; ++a) {
            if (!z[a]) continue;
            A[a + 1] += wi;  // row 0 of the upper triangle: intercept times z_a
            rhs[a + 1] += wi * y[i];
            for (std::size_t b = a; b < d; ++b)
                if (z[b]) A[(a + 1) * p + (b + 1)] += wi;
        }
    }
    for (std::size_t j = 1; j < p; ++j) A[j * p + j] += lambda;  // no penalty on intercept

    // Cholesky A = L Lt on the upper triangle view.
    std::vector<double> L(p * p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = A[j * p + i];  // upper triangle holds A[j][i] for j<=i
            for (std::size_t k = 0; k < j; ++k) s -= L[i * p + k] * L[j * p + k];
            if (i == j) {
                if (!(s > 0.0) || !std::isfinite(s))
                    throw SingularSystem("ridge normal equations are not positive definite");
                L[i * p + i] = std::sqrt(s);
            } else {
                L[i * p + j] = s / L[j * p + j];
            }
        }
    }
    std::vector<double> t(p, 0.0), beta(p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        double s = rhs[i];
        for (std::size_t k = 0; k < i; ++k) s -= L[i * p + k] * t[k];
        t[i] = s / L[i * p + i];
    }
    for (std::size_t i = p; i-- > 0;) {
        double s = t[i];
        for (std::size_t k = i + 1; k < p; ++k) s -= L[k * p + i] * beta[k];
        beta[i] = s / L[i * p + i];
    }
    return beta;
}

LimeExplanation lime_explain(const std::uint8_t* x, std::size_t d, const PredictFn& predict,
                             const std::vector<double>& rates, const LimeConfig& cfg) {
    if (d == 0) throw EmptyVocabulary("cannot explain over zero features");
    if (cfg.n_samples < 100) throw ConfigError("lime needs at least 100 perturbations");
    PerturbationSet set = perturb_instance(x, d, cfg.n_samples, cfg.seed, rates);
    std::vector<double> y = predict(set.data.data(), set.n, set.d);
    if (y.size() != set.n) throw DimensionMismatch("prediction count does not match rows");
    std::vector<double> w(set.n);
    for (std::size_t i = 0; i < set.n; ++i)
        w[i] = kernel_weight(hamming_distance(x, set.row(i), d), d, cfg.kernel_width);
    std::vector<double> beta = solve_weighted_ridge(set.data, set.n, set.d, y, w,
                                                    cfg.ridge_lambda);
    LimeExplanation out;
    out.intercept = beta[0];
    out.coef.assign(beta.begin() + 1, beta.end());

    // Weighted R^2 of the surrogate against the model outputs.
    double wsum = 0.0, ymean = 0.0;
    for (std::size_t i = 0; i < set.n; ++i) {
        wsum += w[i];
        ymean += w[i] * y[i];
    }
    ymean /= wsum;
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < set.n; ++i) {
        const std::uint8_t* z = set.row(i);
        double fit = out.intercept;
        for (std::size_t j = 0; j < d; ++j)
            if (z[j]) fit += out.coef[j];
        ss_res += w[i] * (y[i] - fit) * (y[i] - fit);
        ss_tot += w[i] * (y[i] - ymean) * (y[i] - ymean);
    }
    // A target that is constant at working precision leaves ss_tot as pure
    // rounding noise (the weighted mean of a constant is off by an ulp), so
    // the zero test has to be relative to the target scale.
    double tol = 1e-10 * std::max(1.0, std::fabs(ymean));
    if (ss_tot > wsum * tol * tol)
        out.fidelity = std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
    else
        out.fidelity = 1.0;  // constant target, matched exactly by the intercept
    return out;
}

}  // namespace leakhound
