#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "leakhound/features.hpp"

namespace leakhound {

// Fully connected net: ReLU hidden layers, one sigmoid output unit.
// W[l] is row major, dims[l+1] x dims[l].
struct MlpModel {
    std::vector<std::size_t> dims;  // input width, hidden widths..., 1
    std::vector<std::vector<double>> W;
    std::vector<std::vector<double>> b;

    std::size_t n_layers() const { return W.size(); }
    std::size_t n_inputs() const { return dims.empty() ? 0 : dims.front(); }
};

struct MlpConfig {
    std::vector<std::size_t> hidden;  // empty collapses to logistic regression
    double learning_rate = 1e-3;
    double gamma = 0.9;      // squared-gradient decay, in (0,1)
    double epsilon = 1e-8;   // accepted range [1e-10, 1e-8]
    std::size_t epochs = 50;
    std::size_t batch_size = 64;
    std::uint64_t seed = 1;
};

// "reduced" = {512,128,64}, "deep" = {2048,1024,512,256,128,64}.
std::vector<std::size_t> arch_preset(const std::string& name);

// He fan-in normal init for weights, zero biases, one generator for the
// whole model in layer order.
MlpModel mlp_init(std::size_t n_inputs, const std::vector<std::size_t>& hidden,
                  std::uint64_t seed);

// Per-layer activations are appended to *acts when it is non-null:
// acts[l] = post-activation of layer l (last entry is the sigmoid output).
double nn_forward(const MlpModel& model, const std::uint8_t* x,
                  std::vector<std::vector<double>>* acts = nullptr);

double bce_loss(double y_hat, int y);

// v <- gamma*v + (1-gamma)*g^2 ; w <- w - lr*g/(sqrt(v)+eps)
void rmsprop_step(std::vector<double>& w, std::vector<double>& v,
                  const std::vector<double>& g, double lr, double gamma, double eps);

// Analytic single-sample gradients, exposed so tests can difference them.
void nn_gradients(const MlpModel& model, const std::uint8_t* x, int y,
                  std::vector<std::vector<double>>& gW, std::vector<std::vector<double>>& gb);

struct FitResult {
    std::vector<double> epoch_losses;  // mean batch loss per epoch
};

FitResult nn_fit(MlpModel& model, const FeatureMatrix& m, const MlpConfig& cfg);

double nn_predict_row(const MlpModel& model, const std::uint8_t* x, std::size_t d);
std::vector<double> nn_predict(const MlpModel& model, const FeatureMatrix& m);

}  // namespace leakhound
