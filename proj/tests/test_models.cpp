// Classifiers: CART against the exhaustive reference, pruning-path
// invariants, evaluation metrics, MLP numerics (forward, loss, RMSProp,
// analytic gradients vs finite differences), training behaviour, and the
// binary model container.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "leakhound/errors.hpp"
#include "leakhound/metrics.hpp"
#include "leakhound/mlp.hpp"
#include "leakhound/model_io.hpp"
#include "leakhound/tree.hpp"
#include "oracles.hpp"

namespace lh = leakhound;

namespace {

lh::FeatureMatrix make_matrix(const std::vector<std::vector<std::uint8_t>>& rows,
                              const std::vector<int>& labels) {
    lh::FeatureMatrix m;
    m.resize(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        m.labels[r] = labels[r];
        m.row_ids[r] = "row" + std::to_string(r);
        for (std::size_t c = 0; c < rows[r].size(); ++c) m.set(r, c, rows[r][c]);
    }
    return m;
}

std::vector<oracle::RefRow> to_ref_rows(const lh::FeatureMatrix& m) {
    std::vector<oracle::RefRow> rows(m.n_rows);
    for (std::size_t r = 0; r < m.n_rows; ++r) {
        rows[r].y = m.labels[r];
        rows[r].x.resize(m.n_cols);
        for (std::size_t c = 0; c < m.n_cols; ++c) rows[r].x[c] = m.at(r, c);
    }
    return rows;
}

bool single_class(const std::vector<int>& labels) {
    bool any0 = false, any1 = false;
    for (int y : labels) (y ? any1 : any0) = true;
    return !(any0 && any1);
}

// Walks a fitted tree and checks the structural bookkeeping invariants.
void check_tree_invariants(const lh::DecisionTree& tree, std::size_t at) {
    const lh::TreeNode& node = tree.nodes[at];
    CHECK(node.gini >= 0.0);
    CHECK(node.gini <= 0.5);
    CHECK(node.positive_fraction >= 0.0);
    CHECK(node.positive_fraction <= 1.0);
    double p = static_cast<double>(node.n_positive) / static_cast<double>(node.n_samples);
    CHECK(node.positive_fraction == p);
    CHECK(node.gini == 2.0 * p * (1.0 - p));
    if (node.feature_index < 0) return;
    REQUIRE(node.left < tree.nodes.size());
    REQUIRE(node.right < tree.nodes.size());
    const lh::TreeNode& l = tree.nodes[node.left];
    const lh::TreeNode& r = tree.nodes[node.right];
    CHECK(l.n_samples + r.n_samples == node.n_samples);
    CHECK(l.n_positive + r.n_positive == node.n_positive);
    CHECK(l.n_samples > 0);
    CHECK(r.n_samples > 0);
    check_tree_invariants(tree, node.left);
    check_tree_invariants(tree, node.right);
}

double train_accuracy(const lh::DecisionTree& tree, const lh::FeatureMatrix& m) {
    return lh::evaluate(lh::dt_predict(tree, m), m.labels).accuracy;
}

// Test-side forward pass over double activations; used both as a second
// forward implementation and to expose the preactivations for the gradient
// checks (the production forward only reports post-activation values).
struct ForwardProbe {
    double output = 0.0;
    double min_abs_hidden_z = 1e300;
    double output_z = 0.0;
};

ForwardProbe probe_forward(const lh::MlpModel& model, const std::vector<std::uint8_t>& x) {
    ForwardProbe probe;
    std::vector<double> a(x.begin(), x.end());
    for (std::size_t l = 0; l < model.n_layers(); ++l) {
        std::size_t n_out = model.dims[l + 1];
        std::size_t n_in = model.dims[l];
        std::vector<double> z(n_out, 0.0);
        for (std::size_t u = 0; u < n_out; ++u) {
            double s = model.b[l][u];
            for (std::size_t i = 0; i < n_in; ++i) s += model.W[l][u * n_in + i] * a[i];
            z[u] = s;
        }
        bool last = l + 1 == model.n_layers();
        if (last) {
            probe.output_z = z[0];
            probe.output = 1.0 / (1.0 + std::exp(-z[0]));
        } else {
            for (double v : z) probe.min_abs_hidden_z = std::min(probe.min_abs_hidden_z, std::fabs(v));
            a.resize(n_out);
            for (std::size_t u = 0; u < n_out; ++u) a[u] = z[u] > 0.0 ? z[u] : 0.0;
        }
    }
    return probe;
}

std::string read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Decision tree
// ---------------------------------------------------------------------------

TEST_CASE("a single informative feature yields a depth-1 tree") {
    auto m = make_matrix({{0}, {0}, {1}, {1}}, {0, 0, 1, 1});
    auto tree = lh::dt_fit(m);
    REQUIRE(tree.nodes.size() == 3);
    CHECK(tree.nodes[0].feature_index == 0);
    CHECK(tree.n_features == 1);
    check_tree_invariants(tree, 0);
    CHECK(train_accuracy(tree, m) == 1.0);
    std::uint8_t zero = 0, one = 1;
    CHECK(lh::dt_predict_row(tree, &zero, 1) == 0.0);
    CHECK(lh::dt_predict_row(tree, &one, 1) == 1.0);
}

TEST_CASE("xor is learned exactly through zero-gain splits") {
    auto m = make_matrix({{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {0, 1, 1, 0});
    auto tree = lh::dt_fit(m);
    CHECK(lh::dt_node_count(tree) == 7);
    CHECK(lh::dt_leaf_count(tree) == 4);
    check_tree_invariants(tree, 0);
    CHECK(train_accuracy(tree, m) == 1.0);
    // Both root candidates are zero gain; the tie resolves to feature 0.
    CHECK(tree.nodes[0].feature_index == 0);
}

TEST_CASE("consistent datasets are fit to 100 percent training accuracy") {
    std::mt19937_64 rng(2024);
    for (int iter = 0; iter < 40; ++iter) {
        std::size_t d = 2 + rng() % 5;
        std::size_t n = 4 + rng() % 28;
        std::map<std::vector<std::uint8_t>, int> truth;
        std::vector<std::vector<std::uint8_t>> rows;
        std::vector<int> labels;
        for (std::size_t r = 0; r < n; ++r) {
            std::vector<std::uint8_t> x(d);
            for (auto& v : x) v = rng() & 1;
            auto it = truth.find(x);
            int y = it != truth.end() ? it->second : static_cast<int>(rng() & 1);
            truth[x] = y;
            rows.push_back(std::move(x));
            labels.push_back(y);
        }
        if (single_class(labels)) continue;
        auto m = make_matrix(rows, labels);
        auto tree = lh::dt_fit(m);
        check_tree_invariants(tree, 0);
        CHECK(train_accuracy(tree, m) == 1.0);
    }
}

TEST_CASE("dt_fit matches the exhaustive reference on all tiny datasets") {
    // Every multiset of labeled rows over f features, f in {1,2}, up to five
    // rows. Rows are the 2^(f+1) combinations of feature bits and label.
    for (std::size_t f = 1; f <= 2; ++f) {
        const std::size_t n_types = std::size_t{1} << (f + 1);
        std::vector<std::size_t> counts(n_types, 0);
        std::size_t checked = 0;

        auto run_one = [&]() {
            std::vector<std::vector<std::uint8_t>> rows;
            std::vector<int> labels;
            for (std::size_t t = 0; t < n_types; ++t) {
                for (std::size_t k = 0; k < counts[t]; ++k) {
                    std::vector<std::uint8_t> x(f);
                    for (std::size_t j = 0; j < f; ++j) x[j] = (t >> j) & 1;
                    rows.push_back(std::move(x));
                    labels.push_back(static_cast<int>((t >> f) & 1));
                }
            }
            if (rows.empty()) return;
            auto m = make_matrix(rows, labels);
            if (single_class(labels)) {
                CHECK_THROWS_AS(lh::dt_fit(m), lh::DegenerateLabels);
                return;
            }
            auto tree = lh::dt_fit(m);
            auto ref = oracle::cart_reference(to_ref_rows(m), f);
            CHECK(oracle::same_tree(tree, 0, *ref));
            ++checked;
        };

        std::function<void(std::size_t, std::size_t)> emit =
            [&](std::size_t type, std::size_t budget) {
                if (type + 1 == n_types) {
                    counts[type] = budget;
                    run_one();
                    counts[type] = 0;
                    return;
                }
                for (std::size_t take = 0; take <= budget; ++take) {
                    counts[type] = take;
                    emit(type + 1, budget - take);
                }
                counts[type] = 0;
            };
        for (std::size_t total = 1; total <= 5; ++total) emit(0, total);
        CHECK(checked >= 80);  // plenty of two-class datasets exercised
    }
}

TEST_CASE("dt_fit matches the reference on random datasets") {
    std::mt19937_64 rng(31337);
    int compared = 0;
    while (compared < 150) {
        std::size_t d = 1 + rng() % 5;
        std::size_t n = 2 + rng() % 24;
        std::vector<std::vector<std::uint8_t>> rows(n, std::vector<std::uint8_t>(d));
        std::vector<int> labels(n);
        for (std::size_t r = 0; r < n; ++r) {
            for (auto& v : rows[r]) v = rng() & 1;
            labels[r] = static_cast<int>(rng() & 1);
        }
        if (single_class(labels)) continue;
        auto m = make_matrix(rows, labels);
        auto tree = lh::dt_fit(m);
        auto ref = oracle::cart_reference(to_ref_rows(m), d);
        CHECK(oracle::same_tree(tree, 0, *ref));
        check_tree_invariants(tree, 0);
        ++compared;
    }
}

TEST_CASE("degenerate labels are rejected") {
    CHECK_THROWS_AS(lh::dt_fit(make_matrix({{0}, {1}}, {1, 1})), lh::DegenerateLabels);
    CHECK_THROWS_AS(lh::dt_fit(make_matrix({{0}, {1}}, {0, 0})), lh::DegenerateLabels);
    CHECK_THROWS_AS(lh::dt_fit(make_matrix({}, {})), lh::DegenerateLabels);
}

TEST_CASE("dt_predict_row validates the width") {
    auto m = make_matrix({{0, 1}, {1, 0}}, {0, 1});
    auto tree = lh::dt_fit(m);
    std::uint8_t x[3] = {1, 0, 1};
    CHECK_THROWS_AS(lh::dt_predict_row(tree, x, 3), lh::DimensionMismatch);
}

TEST_CASE("identical mixed rows become a probabilistic leaf") {
    auto m = make_matrix({{1}, {1}, {1}, {0}}, {1, 0, 1, 0});
    auto tree = lh::dt_fit(m);
    check_tree_invariants(tree, 0);
    // The three x=1 rows are indistinguishable with labels 1,0,1.
    std::uint8_t one = 1;
    CHECK(lh::dt_predict_row(tree, &one, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

// ---------------------------------------------------------------------------
// Pruning path
// ---------------------------------------------------------------------------

TEST_CASE("an all-zero-gain tree collapses in the first pruning entry") {
    auto m = make_matrix({{0}, {0}, {1}, {1}}, {0, 1, 0, 1});
    auto tree = lh::dt_fit(m);
    CHECK(lh::dt_node_count(tree) == 3);  // the zero-gain split was taken
    auto path = lh::ccp_path(tree);
    REQUIRE(path.alphas.size() == 1);
    CHECK(path.alphas[0] == 0.0);
    CHECK(path.n_nodes[0] == 1);
    CHECK(path.trees[0].nodes.size() == 1);
}

TEST_CASE("a single-leaf tree has a length-one path") {
    lh::DecisionTree leaf;
    leaf.n_features = 2;
    lh::TreeNode node;
    node.n_samples = 5;
    node.n_positive = 2;
    node.positive_fraction = 0.4;
    node.gini = 2.0 * 0.4 * 0.6;
    leaf.nodes.push_back(node);
    auto path = lh::ccp_path(leaf);
    REQUIRE(path.alphas.size() == 1);
    CHECK(path.alphas[0] == 0.0);
    CHECK(path.n_nodes[0] == 1);
}

TEST_CASE("a clean split keeps the unpruned tree as the first entry") {
    auto m = make_matrix({{0}, {0}, {1}, {1}, {1}}, {0, 0, 1, 1, 1});
    auto tree = lh::dt_fit(m);
    auto path = lh::ccp_path(tree);
    REQUIRE(path.alphas.size() == 2);
    CHECK(path.alphas[0] == 0.0);
    CHECK(path.n_nodes[0] == 3);  // nothing removed at alpha 0
    CHECK(path.n_nodes[1] == 1);
    CHECK(path.alphas[1] > 0.0);
    // Root impurity 2*(2/5)*(3/5) with pure leaves and one extra leaf.
    CHECK(path.alphas[1] == doctest::Approx(2.0 * 0.4 * 0.6).epsilon(1e-12));
}

TEST_CASE("pruning paths satisfy the documented invariants") {
    std::mt19937_64 rng(555);
    int done = 0;
    while (done < 25) {
        std::size_t d = 2 + rng() % 6;
        std::size_t n = 8 + rng() % 56;
        std::vector<std::vector<std::uint8_t>> rows(n, std::vector<std::uint8_t>(d));
        std::vector<int> labels(n);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < d; ++c) rows[r][c] = rng() & 1;
            // Mostly-informative labels so trees get some depth.
            labels[r] = (rows[r][0] ^ ((rng() % 4) == 0)) ? 1 : 0;
        }
        if (single_class(labels)) continue;
        auto m = make_matrix(rows, labels);
        auto tree = lh::dt_fit(m);
        auto path = lh::ccp_path(tree);

        REQUIRE(!path.alphas.empty());
        CHECK(path.alphas.front() == 0.0);
        CHECK(path.n_nodes.back() == 1);
        REQUIRE(path.alphas.size() == path.n_nodes.size());
        REQUIRE(path.alphas.size() == path.trees.size());
        for (std::size_t k = 0; k + 1 < path.alphas.size(); ++k) {
            CHECK(path.alphas[k] < path.alphas[k + 1]);
            CHECK(path.n_nodes[k] > path.n_nodes[k + 1]);
        }
        double prev_acc = 2.0;
        for (std::size_t k = 0; k < path.trees.size(); ++k) {
            CHECK(lh::dt_node_count(path.trees[k]) == path.n_nodes[k]);
            CHECK(path.trees[k].nodes.size() == path.n_nodes[k]);  // compacted
            check_tree_invariants(path.trees[k], 0);
            double acc = train_accuracy(path.trees[k], m);
            CHECK(acc <= prev_acc + 1e-12);
            prev_acc = acc;
        }
        ++done;
    }
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

TEST_CASE("evaluate hand-computed confusion") {
    std::vector<double> probs = {0.9, 0.9, 0.9, 0.9, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1};
    std::vector<int> labels = {1, 1, 1, 0, 1, 1, 0, 0, 0, 0};
    auto c = lh::confusion(probs, labels);
    CHECK(c.tp == 3);
    CHECK(c.fp == 1);
    CHECK(c.fn == 2);
    CHECK(c.tn == 4);
    auto m = lh::evaluate(probs, labels);
    CHECK(m.accuracy == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(m.precision == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(m.recall == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(m.f1 == doctest::Approx(0.9 / 1.35).epsilon(1e-12));
}

TEST_CASE("probabilities at the threshold count as positive") {
    auto c = lh::confusion({0.5, 0.5}, {1, 0});
    CHECK(c.tp == 1);
    CHECK(c.fp == 1);
    CHECK(c.tn == 0);
    CHECK(c.fn == 0);

    auto m = lh::evaluate(std::vector<double>(10, 0.5),
                          {1, 1, 1, 1, 1, 0, 0, 0, 0, 0});
    CHECK(m.accuracy == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m.precision == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m.recall == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("undefined ratios evaluate to zero") {
    // No predicted positives: precision 0; also no true positives.
    auto m = lh::evaluate({0.1, 0.2}, {1, 0});
    CHECK(m.precision == 0.0);
    CHECK(m.recall == 0.0);
    CHECK(m.f1 == 0.0);
    CHECK(m.accuracy == 0.5);
    // No actual positives: recall 0.
    auto m2 = lh::evaluate({0.9, 0.1}, {0, 0});
    CHECK(m2.recall == 0.0);
    CHECK(m2.precision == 0.0);
    CHECK(m2.f1 == 0.0);
}

TEST_CASE("custom threshold and input validation") {
    auto c = lh::confusion({0.3, 0.3, 0.7}, {1, 0, 1}, 0.3);
    CHECK(c.tp == 2);
    CHECK(c.fp == 1);
    CHECK_THROWS_AS(lh::evaluate({0.5}, {1, 0}), lh::DimensionMismatch);
    CHECK_THROWS_AS(lh::evaluate({}, {}), lh::ConfigError);
}

TEST_CASE("a perfect classifier scores one everywhere") {
    auto m = lh::evaluate({0.9, 0.8, 0.1, 0.2}, {1, 1, 0, 0});
    CHECK(m.accuracy == 1.0);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == 1.0);
}

// ---------------------------------------------------------------------------
// MLP numerics
// ---------------------------------------------------------------------------

TEST_CASE("architecture presets") {
    CHECK(lh::arch_preset("reduced") == std::vector<std::size_t>{512, 128, 64});
    CHECK(lh::arch_preset("deep") ==
          std::vector<std::size_t>{2048, 1024, 512, 256, 128, 64});
    CHECK_THROWS_AS(lh::arch_preset("bogus"), lh::ConfigError);
}

TEST_CASE("mlp_init shapes, determinism, and the fan-in scale") {
    auto m = lh::mlp_init(100, {200, 30}, 42);
    REQUIRE(m.dims == std::vector<std::size_t>{100, 200, 30, 1});
    REQUIRE(m.n_layers() == 3);
    REQUIRE(m.W[0].size() == 200 * 100);
    REQUIRE(m.W[1].size() == 30 * 200);
    REQUIRE(m.W[2].size() == 1 * 30);
    for (const auto& layer : m.b)
        for (double v : layer) CHECK(v == 0.0);

    auto again = lh::mlp_init(100, {200, 30}, 42);
    CHECK(m.W == again.W);
    auto other = lh::mlp_init(100, {200, 30}, 43);
    CHECK(m.W != other.W);

    double sum = 0.0, sq = 0.0;
    for (double w : m.W[0]) {
        sum += w;
        sq += w * w;
    }
    double n = static_cast<double>(m.W[0].size());
    double mean = sum / n;
    double stddev = std::sqrt(sq / n - mean * mean);
    CHECK(std::fabs(mean) < 0.01);
    CHECK(stddev == doctest::Approx(std::sqrt(2.0 / 100.0)).epsilon(0.05));

    CHECK_THROWS_AS(lh::mlp_init(0, {4}, 1), lh::ConfigError);
    CHECK_THROWS_AS(lh::mlp_init(4, {4, 0}, 1), lh::ConfigError);
}

TEST_CASE("nn_forward hand computation and the zero-weight model") {
    lh::MlpModel m;
    m.dims = {2, 1, 1};
    m.W = {{0.5, -0.25}, {0.8}};
    m.b = {{0.1}, {-0.2}};

    std::uint8_t x11[2] = {1, 1};
    double z = (0.5 - 0.25 + 0.1) * 0.8 - 0.2;  // relu passes 0.35 through
    CHECK(lh::nn_forward(m, x11) ==
          doctest::Approx(1.0 / (1.0 + std::exp(-z))).epsilon(1e-12));

    std::uint8_t x01[2] = {0, 1};  // preactivation -0.15 is clipped by relu
    CHECK(lh::nn_forward(m, x01) ==
          doctest::Approx(1.0 / (1.0 + std::exp(0.2))).epsilon(1e-12));

    auto zeroed = lh::mlp_init(7, {5, 3}, 9);
    for (auto& layer : zeroed.W) std::fill(layer.begin(), layer.end(), 0.0);
    std::vector<std::uint8_t> any = {1, 0, 1, 1, 0, 0, 1};
    CHECK(lh::nn_forward(zeroed, any.data()) == 0.5);

    std::vector<std::vector<double>> acts;
    lh::nn_forward(m, x11, &acts);
    REQUIRE(acts.size() == 2);
    REQUIRE(acts[0].size() == 1);
    CHECK(acts[0][0] == doctest::Approx(0.35).epsilon(1e-12));
    REQUIRE(acts[1].size() == 1);
    CHECK(acts[1][0] == doctest::Approx(1.0 / (1.0 + std::exp(-z))).epsilon(1e-12));
}

TEST_CASE("the sigmoid output is strictly inside (0,1)") {
    lh::MlpModel m;
    m.dims = {1, 1};
    m.W = {{1e9}};
    m.b = {{0.0}};
    std::uint8_t one = 1, zero = 0;
    double hi = lh::nn_forward(m, &one);
    CHECK(hi < 1.0);
    CHECK(hi > 0.9999);
    m.W[0][0] = -1e9;
    double lo = lh::nn_forward(m, &one);
    CHECK(lo > 0.0);
    CHECK(lo < 1e-10);
    CHECK(lh::nn_forward(m, &zero) == 0.5);
}

TEST_CASE("binary cross-entropy values") {
    CHECK(std::fabs(lh::bce_loss(0.5, 1) - std::log(2.0)) <= 1e-12);
    CHECK(std::fabs(lh::bce_loss(0.5, 0) - std::log(2.0)) <= 1e-12);
    double mean = 0.5 * (lh::bce_loss(0.9, 1) + lh::bce_loss(0.2, 0));
    CHECK(mean == doctest::Approx(0.16425203348).epsilon(1e-9));
    // Saturated predictions are clamped, not infinite.
    CHECK(lh::bce_loss(1.0, 1) < 1e-10);
    CHECK(lh::bce_loss(0.0, 0) < 1e-10);
    CHECK(std::isfinite(lh::bce_loss(1.0, 0)));
    CHECK(std::isfinite(lh::bce_loss(0.0, 1)));
    CHECK(lh::bce_loss(1.0, 0) > 20.0);  // -ln(1e-12) is about 27.6
}

TEST_CASE("rmsprop hand-computed step") {
    std::vector<double> w = {1.0}, v = {0.0}, g = {2.0};
    lh::rmsprop_step(w, v, g, 0.01, 0.9, 1e-8);
    CHECK(v[0] == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(w[0] == doctest::Approx(1.0 - 0.01 * 2.0 / (std::sqrt(0.4) + 1e-8))
                      .epsilon(1e-12));

    // A zero gradient decays the state but leaves the weight alone.
    std::vector<double> w2 = {3.0}, v2 = {0.16}, g2 = {0.0};
    lh::rmsprop_step(w2, v2, g2, 0.5, 0.9, 1e-8);
    CHECK(w2[0] == 3.0);
    CHECK(v2[0] == doctest::Approx(0.144).epsilon(1e-15));

    // Two constant-gradient steps follow the closed-form recurrence.
    std::vector<double> w3 = {0.0}, v3 = {0.0}, g3 = {-1.5};
    double lr = 0.1, gamma = 0.8, eps = 1e-8;
    lh::rmsprop_step(w3, v3, g3, lr, gamma, eps);
    lh::rmsprop_step(w3, v3, g3, lr, gamma, eps);
    double ev = (1 - gamma) * 2.25;
    double ew = 0.0 - lr * -1.5 / (std::sqrt(ev) + eps);
    ev = gamma * ev + (1 - gamma) * 2.25;
    ew -= lr * -1.5 / (std::sqrt(ev) + eps);
    CHECK(v3[0] == doctest::Approx(ev).epsilon(1e-14));
    CHECK(w3[0] == doctest::Approx(ew).epsilon(1e-12));

    std::vector<double> short_g = {1.0};
    std::vector<double> w4 = {0, 0}, v4 = {0, 0};
    CHECK_THROWS_AS(lh::rmsprop_step(w4, v4, short_g, 0.1, 0.9, 1e-8),
                    lh::DimensionMismatch);
}

TEST_CASE("analytic gradients match central finite differences") {
    std::mt19937_64 rng(7101);
    const double h = 1e-5;
    int done = 0;
    while (done < 12) {
        std::size_t d = 2 + rng() % 5;
        std::vector<std::size_t> hidden;
        switch (rng() % 3) {
            case 0: break;
            case 1: hidden = {2 + rng() % 4}; break;
            default: hidden = {3 + rng() % 3, 2 + rng() % 3}; break;
        }
        auto model = lh::mlp_init(d, hidden, rng());
        std::normal_distribution<double> jitter(0.0, 0.1);
        for (auto& layer : model.b)
            for (double& v : layer) v = jitter(rng);

        std::vector<std::uint8_t> x(d, 0);
        for (auto& v : x) v = rng() & 1;
        x[rng() % d] = 1;
        int y = static_cast<int>(rng() & 1);

        // Stay away from the relu kink and the clamped sigmoid tails where
        // finite differences are meaningless.
        auto probe = probe_forward(model, x);
        if (probe.min_abs_hidden_z < 1e-3 && !hidden.empty()) continue;
        if (std::fabs(probe.output_z) > 20.0) continue;

        // The probe doubles as an independent forward implementation.
        CHECK(std::fabs(lh::nn_forward(model, x.data()) - probe.output) <= 1e-12);

        std::vector<std::vector<double>> gW, gb;
        lh::nn_gradients(model, x.data(), y, gW, gb);
        REQUIRE(gW.size() == model.n_layers());
        REQUIRE(gb.size() == model.n_layers());

        double dot_aa = 0.0, dot_ff = 0.0, dot_diff = 0.0;
        auto accumulate = [&](double analytic, double fd) {
            dot_aa += analytic * analytic;
            dot_ff += fd * fd;
            dot_diff += (analytic - fd) * (analytic - fd);
        };
        auto loss_at = [&]() { return lh::bce_loss(lh::nn_forward(model, x.data()), y); };
        for (std::size_t l = 0; l < model.n_layers(); ++l) {
            for (std::size_t i = 0; i < model.W[l].size(); ++i) {
                double keep = model.W[l][i];
                model.W[l][i] = keep + h;
                double up = loss_at();
                model.W[l][i] = keep - h;
                double down = loss_at();
                model.W[l][i] = keep;
                accumulate(gW[l][i], (up - down) / (2 * h));
            }
            for (std::size_t i = 0; i < model.b[l].size(); ++i) {
                double keep = model.b[l][i];
                model.b[l][i] = keep + h;
                double up = loss_at();
                model.b[l][i] = keep - h;
                double down = loss_at();
                model.b[l][i] = keep;
                accumulate(gb[l][i], (up - down) / (2 * h));
            }
        }
        double denom = std::max(std::sqrt(dot_aa) + std::sqrt(dot_ff), 1e-300);
        CHECK(std::sqrt(dot_diff) / denom < 1e-4);
        ++done;
    }
}

TEST_CASE("nn_fit learns a separable toy problem deterministically") {
    std::vector<std::vector<std::uint8_t>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 8; ++i) {
        rows.push_back({1, 0});
        labels.push_back(1);
        rows.push_back({0, 1});
        labels.push_back(0);
    }
    auto m = make_matrix(rows, labels);

    lh::MlpConfig cfg;
    cfg.hidden = {4};
    cfg.learning_rate = 0.05;
    cfg.epochs = 150;
    cfg.batch_size = 4;
    cfg.seed = 11;

    auto model = lh::mlp_init(m.n_cols, cfg.hidden, cfg.seed);
    auto fit = lh::nn_fit(model, m, cfg);
    REQUIRE(fit.epoch_losses.size() == cfg.epochs);
    CHECK(fit.epoch_losses.back() < fit.epoch_losses.front());
    CHECK(fit.epoch_losses.back() < 0.05);

    auto metrics = lh::evaluate(lh::nn_predict(model, m), m.labels);
    CHECK(metrics.accuracy == 1.0);

    // Transient upticks stay under five percent of the transitions.
    std::size_t upticks = 0;
    for (std::size_t e = 0; e + 1 < fit.epoch_losses.size(); ++e)
        if (fit.epoch_losses[e + 1] > fit.epoch_losses[e]) ++upticks;
    CHECK(upticks <= 1 + fit.epoch_losses.size() / 20);

    // Bitwise determinism, including the saved artifact.
    auto model2 = lh::mlp_init(m.n_cols, cfg.hidden, cfg.seed);
    auto fit2 = lh::nn_fit(model2, m, cfg);
    CHECK(model.W == model2.W);
    CHECK(model.b == model2.b);
    CHECK(fit.epoch_losses == fit2.epoch_losses);

    lh::save_model(model, "models_tmp_a.bin");
    lh::save_model(model2, "models_tmp_b.bin");
    CHECK(read_bytes("models_tmp_a.bin") == read_bytes("models_tmp_b.bin"));
    std::remove("models_tmp_a.bin");
    std::remove("models_tmp_b.bin");

    // Logistic-regression collapse: no hidden layers still learns.
    lh::MlpConfig flat = cfg;
    flat.hidden = {};
    auto lr_model = lh::mlp_init(m.n_cols, flat.hidden, 3);
    lh::nn_fit(lr_model, m, flat);
    CHECK(lh::evaluate(lh::nn_predict(lr_model, m), m.labels).accuracy == 1.0);
}

TEST_CASE("nn_fit validates its configuration") {
    auto m = make_matrix({{1, 0}, {0, 1}}, {1, 0});
    auto fresh = [&] { return lh::mlp_init(2, {3}, 1); };
    lh::MlpConfig cfg;
    cfg.hidden = {3};

    auto expect_config_error = [&](auto mutate) {
        lh::MlpConfig bad = cfg;
        mutate(bad);
        auto model = fresh();
        CHECK_THROWS_AS(lh::nn_fit(model, m, bad), lh::ConfigError);
    };
    expect_config_error([](lh::MlpConfig& c) { c.epochs = 0; });
    expect_config_error([](lh::MlpConfig& c) { c.batch_size = 0; });
    expect_config_error([](lh::MlpConfig& c) { c.learning_rate = 0.0; });
    expect_config_error([](lh::MlpConfig& c) { c.learning_rate = -0.5; });
    expect_config_error([](lh::MlpConfig& c) { c.gamma = 0.0; });
    expect_config_error([](lh::MlpConfig& c) { c.gamma = 1.0; });
    expect_config_error([](lh::MlpConfig& c) { c.epsilon = 1e-11; });
    expect_config_error([](lh::MlpConfig& c) { c.epsilon = 1e-7; });

    auto model = fresh();
    auto single = make_matrix({{1, 0}, {0, 1}}, {1, 1});
    CHECK_THROWS_AS(lh::nn_fit(model, single, cfg), lh::DegenerateLabels);
    lh::FeatureMatrix empty;  // zero rows at the right width
    empty.resize(0, 2);
    CHECK_THROWS_AS(lh::nn_fit(model, empty, cfg), lh::DegenerateLabels);

    auto wide = make_matrix({{1, 0, 1}, {0, 1, 0}}, {1, 0});
    auto narrow_model = fresh();
    CHECK_THROWS_AS(lh::nn_fit(narrow_model, wide, cfg), lh::DimensionMismatch);

    lh::MlpConfig wild = cfg;
    wild.learning_rate = 1e300;
    wild.epochs = 5;
    auto diverging = fresh();
    CHECK_THROWS_AS(lh::nn_fit(diverging, m, wild), lh::NonFiniteLoss);

    std::uint8_t x[3] = {1, 0, 1};
    auto narrow = fresh();
    CHECK_THROWS_AS(lh::nn_predict_row(narrow, x, 3), lh::DimensionMismatch);
}

// ---------------------------------------------------------------------------
// Model container
// ---------------------------------------------------------------------------

TEST_CASE("tree models round-trip byte for byte") {
    std::mt19937_64 rng(9001);
    std::vector<std::vector<std::uint8_t>> rows(30, std::vector<std::uint8_t>(6));
    std::vector<int> labels(30);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (auto& v : rows[r]) v = rng() & 1;
        labels[r] = rows[r][2] ^ (rng() % 5 == 0);
    }
    auto m = make_matrix(rows, labels);
    auto tree = lh::dt_fit(m);

    lh::save_model(tree, "models_tmp_tree1.bin");
    CHECK(lh::peek_model_kind("models_tmp_tree1.bin") == lh::ModelKind::tree);
    auto back = lh::load_tree("models_tmp_tree1.bin");
    CHECK(back.n_features == tree.n_features);
    REQUIRE(back.nodes.size() == tree.nodes.size());
    CHECK(lh::dt_predict(back, m) == lh::dt_predict(tree, m));

    lh::save_model(back, "models_tmp_tree2.bin");
    CHECK(read_bytes("models_tmp_tree1.bin") == read_bytes("models_tmp_tree2.bin"));
    CHECK(!lh::model_to_text(tree).empty());
    std::remove("models_tmp_tree1.bin");
    std::remove("models_tmp_tree2.bin");
}

TEST_CASE("network models round-trip byte for byte") {
    auto model = lh::mlp_init(9, {6, 4}, 77);
    lh::save_model(model, "models_tmp_net1.bin");
    CHECK(lh::peek_model_kind("models_tmp_net1.bin") == lh::ModelKind::network);
    auto back = lh::load_network("models_tmp_net1.bin");
    CHECK(back.dims == model.dims);
    CHECK(back.W == model.W);
    CHECK(back.b == model.b);
    lh::save_model(back, "models_tmp_net2.bin");
    CHECK(read_bytes("models_tmp_net1.bin") == read_bytes("models_tmp_net2.bin"));
    CHECK(!lh::model_to_text(model).empty());
    std::remove("models_tmp_net1.bin");
    std::remove("models_tmp_net2.bin");
}

TEST_CASE("the loader rejects other kinds, garbage, and truncation") {
    auto model = lh::mlp_init(3, {2}, 5);
    lh::save_model(model, "models_tmp_net.bin");
    auto m = make_matrix({{0}, {1}}, {0, 1});
    auto tree = lh::dt_fit(m);
    lh::save_model(tree, "models_tmp_tree.bin");

    CHECK_THROWS_AS(lh::load_tree("models_tmp_net.bin"), lh::UnsupportedFormat);
    CHECK_THROWS_AS(lh::load_network("models_tmp_tree.bin"), lh::UnsupportedFormat);

    {
        std::ofstream junk("models_tmp_junk.bin", std::ios::binary);
        junk << "this is not a model";
    }
    CHECK_THROWS_AS(lh::peek_model_kind("models_tmp_junk.bin"), lh::UnsupportedFormat);
    CHECK_THROWS_AS(lh::load_tree("models_tmp_junk.bin"), lh::UnsupportedFormat);

    std::string full = read_bytes("models_tmp_net.bin");
    {
        std::ofstream cut("models_tmp_cut.bin", std::ios::binary);
        cut << full.substr(0, full.size() / 2);
    }
    CHECK_THROWS_AS(lh::load_network("models_tmp_cut.bin"), lh::UnsupportedFormat);

    CHECK_THROWS_AS(lh::load_tree("models_tmp_absent.bin"), lh::UnsupportedFormat);

    std::remove("models_tmp_net.bin");
    std::remove("models_tmp_tree.bin");
    std::remove("models_tmp_junk.bin");
    std::remove("models_tmp_cut.bin");
}
