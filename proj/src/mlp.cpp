#include "leakhound/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "leakhound/errors.hpp"

namespace leakhound {
namespace {

// Pre-activations are clamped to +-36: past that point exp underflows enough
// for the quotient to round to exactly 0 or 1 in double, and the output must
// stay strictly inside (0,1).
double sigmoid_clamped(double z) {
    z = std::clamp(z, -36.0, 36.0);
    return 1.0 / (1.0 + std::exp(-z));
}

struct Workspace {
    std::vector<std::vector<double>> a;  // post-activation per layer
    std::vector<std::size_t> active;     // indices of set input bits

    void reset(const MlpModel& model) {
        a.resize(model.n_layers());
        for (std::size_t l = 0; l < model.n_layers(); ++l) a[l].assign(model.dims[l + 1], 0.0);
    }
};

// Forward pass; hidden layers ReLU, output sigmoid. The input is binary, so
// the first layer sums only the active columns (identical arithmetic to the
// dense sum in ascending index order).
double forward_into(const MlpModel& model, const std::uint8_t* x, Workspace& ws) {
    ws.active.clear();
    const std::size_t in0 = model.dims[0];
    for (std::size_t j = 0; j < in0; ++j)
        if (x[j]) ws.active.push_back(j);

    const std::size_t L = model.n_layers();
    for (std::size_t l = 0; l < L; ++l) {
        const std::size_t in = model.dims[l];
        const std::size_t out = model.dims[l + 1];
        const double* W = model.W[l].data();
        const double* b = model.b[l].data();
        double* z = ws.a[l].data();
        if (l == 0) {
            for (std::size_t r = 0; r < out; ++r) {
                double s = b[r];
                const double* wr = W + r * in;
                for (std::size_t j : ws.active) s += wr[j];
                z[r] = s;
            }
        } else {
            const double* prev = ws.a[l - 1].data();
            for (std::size_t r = 0; r < out; ++r) {
                double s = b[r];
                const double* wr = W + r * in;
                for (std::size_t j = 0; j < in; ++j) s += wr[j] * prev[j];
                z[r] = s;
            }
        }
        if (l + 1 < L) {
            for (std::size_t r = 0; r < out; ++r) z[r] = z[r] > 0.0 ? z[r] : 0.0;
        } else {
            for (std::size_t r = 0; r < out; ++r) z[r] = sigmoid_clamped(z[r]);
        }
    }
    return ws.a[L - 1][0];
}

// Backward pass accumulating into gW/gb. ws must hold the forward state of x.
void backward_accumulate(const MlpModel& model, const std::uint8_t* x, int y, Workspace& ws,
                         std::vector<std::vector<double>>& gW,
                         std::vector<std::vector<double>>& gb,
                         std::vector<std::vector<double>>& delta) {
    const std::size_t L = model.n_layers();
    delta.resize(L);
    for (std::size_t l = 0; l < L; ++l) delta[l].assign(model.dims[l + 1], 0.0);

    delta[L - 1][0] = ws.a[L - 1][0] - static_cast<double>(y);
    for (std::size_t l = L - 1; l-- > 0;) {
        const std::size_t out_next = model.dims[l + 2];
        const std::size_t in_next = model.dims[l + 1];
        const double* Wn = model.W[l + 1].data();
        for (std::size_t j = 0; j < in_next; ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < out_next; ++r) s += Wn[r * in_next + j] * delta[l + 1][r];
            delta[l][j] = ws.a[l][j] > 0.0 ? s : 0.0;
        }
    }

    for (std::size_t l = 0; l < L; ++l) {
        const std::size_t in = model.dims[l];
        const std::size_t out = model.dims[l + 1];
        double* gw = gW[l].data();
        for (std::size_t r = 0; r < out; ++r) {
            double d = delta[l][r];
            gb[l][r] += d;
            if (d == 0.0) continue;
            double* gwr = gw + r * in;
            if (l == 0) {
                for (std::size_t j : ws.active) gwr[j] += d;
            } else {
                const double* prev = ws.a[l - 1].data();
                for (std::size_t j = 0; j < in; ++j) gwr[j] += d * prev[j];
            }
        }
    }
    (void)x;
}

}  // namespace

std::vector<std::size_t> arch_preset(const std::string& name) {
    if (name == "reduced") return {512, 128, 64};
    if (name == "deep") return {2048, 1024, 512, 256, 128, 64};
    throw ConfigError("unknown architecture preset: " + name);
}

MlpModel mlp_init(std::size_t n_inputs, const std::vector<std::size_t>& hidden,
                  std::uint64_t seed) {
    if (n_inputs == 0) throw ConfigError("network needs at least one input");
    for (std::size_t h : hidden)
        if (h == 0) throw ConfigError("hidden layer width must be positive");
    MlpModel model;
    model.dims.push_back(n_inputs);
    for (std::size_t h : hidden) model.dims.push_back(h);
    model.dims.push_back(1);

    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l + 1 < model.dims.size(); ++l) {
        std::size_t in = model.dims[l];
        std::size_t out = model.dims[l + 1];
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(in)));
        std::vector<double> W(out * in);
        for (double& w : W) w = dist(rng);
        model.W.push_back(std::move(W));
        model.b.emplace_back(out, 0.0);
    }
    return model;
}

double nn_forward(const MlpModel& model, const std::uint8_t* x,
                  std::vector<std::vector<double>>* acts) {
    Workspace ws;
    ws.reset(model);
    double y = forward_into(model, x, ws);
    if (acts) *acts = ws.a;
    return y;
}

double bce_loss(double y_hat, int y) {
    y_hat = std::clamp(y_hat, 1e-12, 1.0 - 1e-12);
    return y ? -std::log(y_hat) : -std::log(1.0 - y_hat);
}

void rmsprop_step(std::vector<double>& w, std::vector<double>& v,
                  const std::vector<double>& g, double lr, double gamma, double eps) {
    if (w.size() != v.size() || w.size() != g.size())
        throw DimensionMismatch("optimizer state sizes differ");
    for (std::size_t i = 0; i < w.size(); ++i) {
        v[i] = gamma * v[i] + (1.0 - gamma) * g[i] * g[i];
        w[i] -= lr * g[i] / (std::sqrt(v[i]) + eps);
    }
}

void nn_gradients(const MlpModel& model, const std::uint8_t* x, int y,
                  std::vector<std::vector<double>>& gW, std::vector<std::vector<double>>& gb) {
    gW.resize(model.n_layers());
    gb.resize(model.n_layers());
    for (std::size_t l = 0; l < model.n_layers(); ++l) {
        gW[l].assign(model.W[l].size(), 0.0);
        gb[l].assign(model.b[l].size(), 0.0);
    }
    Workspace ws;
    ws.reset(model);
    forward_into(model, x, ws);
    std::vector<std::vector<double>> delta;
    backward_accumulate(model, x, y, ws, gW, gb, delta);
}

FitResult nn_fit(MlpModel& model, const FeatureMatrix& m, const MlpConfig& cfg) {
    if (m.n_cols != model.n_inputs())
        throw DimensionMismatch("matrix width does not match the network input width");
    if (m.n_rows == 0) throw DegenerateLabels("cannot train on zero rows");
    bool any_pos = false, any_neg = false;
    for (int y : m.labels) (y ? any_pos : any_neg) = true;
    if (!any_pos || !any_neg) throw DegenerateLabels("all training labels are identical");
    if (cfg.batch_size == 0) throw ConfigError("batch_size must be positive");
    if (cfg.epochs == 0) throw ConfigError("epochs must be positive");
    if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) throw ConfigError("gamma must be in (0,1)");
    if (!(cfg.epsilon >= 1e-10 && cfg.epsilon <= 1e-8))
        throw ConfigError("epsilon must lie in [1e-10, 1e-8]");

    const std::size_t L = model.n_layers();
    std::vector<std::vector<double>> gW(L), gb(L), vW(L), vb(L), delta;
    for (std::size_t l = 0; l < L; ++l) {
        gW[l].assign(model.W[l].size(), 0.0);
        gb[l].assign(model.b[l].size(), 0.0);
        vW[l].assign(model.W[l].size(), 0.0);
        vb[l].assign(model.b[l].size(), 0.0);
    }
    Workspace ws;
    ws.reset(model);

    FitResult result;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < m.n_rows; start += cfg.batch_size) {
            std::size_t stop = std::min(m.n_rows, start + cfg.batch_size);
            for (std::size_t l = 0; l < L; ++l) {
                std::fill(gW[l].begin(), gW[l].end(), 0.0);
                std::fill(gb[l].begin(), gb[l].end(), 0.0);
            }
            for (std::size_t r = start; r < stop; ++r) {
                const std::uint8_t* x = m.data.data() + r * m.n_cols;
                double y_hat = forward_into(model, x, ws);
                loss_sum += bce_loss(y_hat, m.labels[r]);
                backward_accumulate(model, x, m.labels[r], ws, gW, gb, delta);
            }
            double inv = 1.0 / static_cast<double>(stop - start);
            for (std::size_t l = 0; l < L; ++l) {
                for (double& g : gW[l]) g *= inv;
                for (double& g : gb[l]) g *= inv;
                rmsprop_step(model.W[l], vW[l], gW[l], cfg.learning_rate, cfg.gamma,
                             cfg.epsilon);
                rmsprop_step(model.b[l], vb[l], gb[l], cfg.learning_rate, cfg.gamma,
                             cfg.epsilon);
            }
        }
        double epoch_loss = loss_sum / static_cast<double>(m.n_rows);
        if (!std::isfinite(epoch_loss))
            throw NonFiniteLoss("training loss diverged in epoch " + std::to_string(epoch));
        result.epoch_losses.push_back(epoch_loss);
    }
    return result;
}

double nn_predict_row(const MlpModel& model, const std::uint8_t* x, std::size_t d) {
    if (d != model.n_inputs())
        throw DimensionMismatch("row width does not match the network input width");
    Workspace ws;
    ws.reset(model);
    return forward_into(model, x, ws);
}

std::vector<double> nn_predict(const MlpModel& model, const FeatureMatrix& m) {
    if (m.n_cols != model.n_inputs())
        throw DimensionMismatch("matrix width does not match the network input width");
    std::vector<double> out(m.n_rows);
    Workspace ws;
    ws.reset(model);
    for (std::size_t r = 0; r < m.n_rows; ++r)
        out[r] = forward_into(model, m.data.data() + r * m.n_cols, ws);
    return out;
}

}  // namespace leakhound
