#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "leakhound/features.hpp"

namespace leakhound {

inline constexpr std::size_t kNoChild = std::numeric_limits<std::size_t>::max();

struct TreeNode {
    int feature_index = -1;  // -1 marks a leaf
    std::size_t left = kNoChild;   // feature bit 0 goes left
    std::size_t right = kNoChild;  // feature bit 1 goes right
    double gini = 0.0;
    std::size_t n_samples = 0;
    std::size_t n_positive = 0;
    double positive_fraction = 0.0;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // node 0 is the root
    std::size_t n_features = 0;
};

// Greedy binary CART on 0/1 features. Split quality is compared exactly with
// integer rationals so ties always resolve to the lowest feature index.
// Zero-gain splits are taken when nothing better exists and both sides are
// nonempty, which lets parity concepts still be learned.
DecisionTree dt_fit(const FeatureMatrix& m);

double dt_predict_row(const DecisionTree& tree, const std::uint8_t* x, std::size_t d);
std::vector<double> dt_predict(const DecisionTree& tree, const FeatureMatrix& m);

std::size_t dt_node_count(const DecisionTree& tree);  // reachable nodes
std::size_t dt_leaf_count(const DecisionTree& tree);

struct PruningPath {
    std::vector<double> alphas;        // starts at 0, strictly increasing
    std::vector<std::size_t> n_nodes;  // nonincreasing, ends at 1
    std::vector<DecisionTree> trees;   // compacted subtree for each alpha
};

// Minimal cost-complexity pruning: repeatedly collapse the internal nodes
// with the weakest impurity-per-leaf improvement.
PruningPath ccp_path(const DecisionTree& tree);

}  // namespace leakhound
