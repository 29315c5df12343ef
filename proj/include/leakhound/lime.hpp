#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "leakhound/features.hpp"
#include "leakhound/mlp.hpp"
#include "leakhound/tree.hpp"

namespace leakhound {

// n binary rows of width d; row 0 is always the unperturbed instance.
struct PerturbationSet {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<std::uint8_t> data;

    const std::uint8_t* row(std::size_t i) const { return data.data() + i * d; }
    std::uint8_t* row(std::size_t i) { return data.data() + i * d; }
};

// Per-column mean of the matrix, used as the turn-on rate for bits that are
// inactive in the explained instance.
std::vector<double> activation_rates(const FeatureMatrix& m);

// Active bits drop with probability 1/2; inactive bits switch on with their
// corpus activation rate. Uniform draws come from the top 53 bits of a
// mt19937_64 stream, row by row, column by column.
PerturbationSet perturb_instance(const std::uint8_t* x, std::size_t d, std::size_t n,
                                 std::uint64_t seed, const std::vector<double>& rates);

std::size_t hamming_distance(const std::uint8_t* a, const std::uint8_t* b, std::size_t d);

// exp(-h / width^2); width <= 0 selects the default 0.75 * sqrt(d).
double kernel_weight(std::size_t hamming, std::size_t d, double width);

using PredictFn =
    std::function<std::vector<double>(const std::uint8_t* rows, std::size_t n, std::size_t d)>;

PredictFn make_predict_fn(const DecisionTree& tree);
PredictFn make_predict_fn(const MlpModel& model);

std::vector<double> batch_predict(const DecisionTree& tree, const std::uint8_t* rows,
                                  std::size_t n, std::size_t d);
std::vector<double> batch_predict(const MlpModel& model, const std::uint8_t* rows,
                                  std::size_t n, std::size_t d);
std::vector<double> batch_predict_serial(const DecisionTree& tree, const std::uint8_t* rows,
                                         std::size_t n, std::size_t d);
std::vector<double> batch_predict_serial(const MlpModel& model, const std::uint8_t* rows,
                                         std::size_t n, std::size_t d);

// Solve (A + lambda*I) beta = rhs for the weighted ridge fit; the intercept
// row is not penalized. Throws SingularSystem when a Cholesky pivot fails.
std::vector<double> solve_weighted_ridge(const std::vector<std::uint8_t>& Z, std::size_t n,
                                         std::size_t d, const std::vector<double>& y,
                                         const std::vector<double>& w, double lambda);

struct LimeConfig {
    std::size_t n_samples = 5000;  // at least 100
    std::uint64_t seed = 1;
    double kernel_width = -1.0;  // <= 0 means 0.75 * sqrt(d)
    double ridge_lambda = 1e-3;
};

struct LimeExplanation {
    std::string instance_id;
    std::vector<double> coef;  // one weight per feature
    double intercept = 0.0;
    double fidelity = 0.0;  // weighted R^2 of the surrogate, in [0,1]
};

LimeExplanation lime_explain(const std::uint8_t* x, std::size_t d, const PredictFn& predict,
                             const std::vector<double>& rates, const LimeConfig& cfg);

}  // namespace leakhound
