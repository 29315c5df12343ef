#include "leakhound/tree.hpp"

#include <algorithm>

#include "leakhound/errors.hpp"

namespace leakhound {
namespace {

using u64 = std::uint64_t;
using i128 = __int128;

// Compare a1/n1 + a2/n2 with b1/m1 + b2/m2 without floating point.
// All denominators are positive. Magnitudes stay far below 2^127 for any
// realistic row count (safe up to a few million rows).
int cmp_cost(u64 a1, u64 n1, u64 a2, u64 n2, u64 b1, u64 m1, u64 b2, u64 m2) {
    i128 lhs = (static_cast<i128>(a1) * n2 + static_cast<i128>(a2) * n1) *
               (static_cast<i128>(m1) * m2);
    i128 rhs = (static_cast<i128>(b1) * m2 + static_cast<i128>(b2) * m1) *
               (static_cast<i128>(n1) * n2);
    if (lhs < rhs) return -1;
    if (lhs > rhs) return 1;
    return 0;
}

double gini_of(std::size_t pos, std::size_t n) {
    if (n == 0) return 0.0;
    double p = static_cast<double>(pos) / static_cast<double>(n);
    return 2.0 * p * (1.0 - p);
}

struct PendingNode {
    std::size_t node;
    std::vector<std::size_t> rows;
};

}  // namespace

DecisionTree dt_fit(const FeatureMatrix& m) {
    if (m.n_rows == 0) throw DegenerateLabels("cannot fit a tree on zero rows");
    std::size_t total_pos = 0;
    for (int y : m.labels) total_pos += y ? 1 : 0;
    if (total_pos == 0 || total_pos == m.n_rows)
        throw DegenerateLabels("all training labels are identical");

    DecisionTree tree;
    tree.n_features = m.n_cols;
    tree.nodes.emplace_back();

    std::vector<PendingNode> stack;
    {
        std::vector<std::size_t> all(m.n_rows);
        for (std::size_t i = 0; i < m.n_rows; ++i) all[i] = i;
        stack.push_back({0, std::move(all)});
    }

    while (!stack.empty()) {
        PendingNode cur = std::move(stack.back());
        stack.pop_back();
        const auto& rows = cur.rows;
        std::size_t n = rows.size();
        std::size_t pos = 0;
        for (std::size_t r : rows) pos += m.labels[r] ? 1 : 0;

        TreeNode& node = tree.nodes[cur.node];
        node.n_samples = n;
        node.n_positive = pos;
        node.gini = gini_of(pos, n);
        node.positive_fraction = static_cast<double>(pos) / static_cast<double>(n);
        if (pos == 0 || pos == n) continue;  // pure leaf

        // Best split: minimize pL*negL/nL + pR*negR/nR, lowest index on ties.
        bool have_best = false;
        int best_f = -1;
        u64 ba1 = 0, bn1 = 1, ba2 = 0, bn2 = 1;
        for (std::size_t f = 0; f < m.n_cols; ++f) {
            u64 n_r = 0, pos_r = 0;
            for (std::size_t r : rows) {
                if (m.at(r, f)) {
                    ++n_r;
                    pos_r += m.labels[r] ? 1 : 0;
                }
            }
            u64 n_l = n - n_r;
            if (n_l == 0 || n_r == 0) continue;
            u64 pos_l = pos - pos_r;
            u64 a1 = pos_l * (n_l - pos_l);
            u64 a2 = pos_r * (n_r - pos_r);
            if (!have_best || cmp_cost(a1, n_l, a2, n_r, ba1, bn1, ba2, bn2) < 0) {
                have_best = true;
                best_f = static_cast<int>(f);
                ba1 = a1;
                bn1 = n_l;
                ba2 = a2;
                bn2 = n_r;
            }
        }
        if (!have_best) continue;  // indistinguishable rows, mixed leaf

        std::vector<std::size_t> left_rows, right_rows;
        left_rows.reserve(n);
        right_rows.reserve(n);
        for (std::size_t r : rows)
            (m.at(r, static_cast<std::size_t>(best_f)) ? right_rows : left_rows).push_back(r);

        node.feature_index = best_f;
        std::size_t li = tree.nodes.size();
        tree.nodes.emplace_back();
        std::size_t ri = tree.nodes.size();
        tree.nodes.emplace_back();
        tree.nodes[cur.node].left = li;
        tree.nodes[cur.node].right = ri;
        stack.push_back({li, std::move(left_rows)});
        stack.push_back({ri, std::move(right_rows)});
    }
    return tree;
}

double dt_predict_row(const DecisionTree& tree, const std::uint8_t* x, std::size_t d) {
    if (d != tree.n_features)
        throw DimensionMismatch("row width does not match the trained feature count");
    std::size_t i = 0;
    while (tree.nodes[i].feature_index >= 0) {
        const TreeNode& nd = tree.nodes[i];
        i = x[static_cast<std::size_t>(nd.feature_index)] ? nd.right : nd.left;
    }
    return tree.nodes[i].positive_fraction;
}

std::vector<double> dt_predict(const DecisionTree& tree, const FeatureMatrix& m) {
    if (m.n_cols != tree.n_features)
        throw DimensionMismatch("matrix width does not match the trained feature count");
    std::vector<double> out(m.n_rows);
    for (std::size_t r = 0; r < m.n_rows; ++r)
        out[r] = dt_predict_row(tree, m.data.data() + r * m.n_cols, m.n_cols);
    return out;
}

namespace {

void count_reachable(const DecisionTree& tree, std::size_t i, std::size_t& nodes,
                     std::size_t& leaves) {
    ++nodes;
    if (tree.nodes[i].feature_index < 0) {
        ++leaves;
        return;
    }
    count_reachable(tree, tree.nodes[i].left, nodes, leaves);
    count_reachable(tree, tree.nodes[i].right, nodes, leaves);
}

std::size_t compact_into(const DecisionTree& src, std::size_t i, DecisionTree& dst) {
    std::size_t at = dst.nodes.size();
    dst.nodes.push_back(src.nodes[i]);
    if (src.nodes[i].feature_index >= 0) {
        std::size_t l = compact_into(src, src.nodes[i].left, dst);
        std::size_t r = compact_into(src, src.nodes[i].right, dst);
        dst.nodes[at].left = l;
        dst.nodes[at].right = r;
    } else {
        dst.nodes[at].left = kNoChild;
        dst.nodes[at].right = kNoChild;
    }
    return at;
}

DecisionTree compact(const DecisionTree& src) {
    DecisionTree out;
    out.n_features = src.n_features;
    compact_into(src, 0, out);
    return out;
}

// Subtree stats for pruning: impurity mass of the leaves and the leaf count.
struct SubtreeStat {
    long double leaf_mass = 0;  // sum over leaves of (n_leaf / n_root) * gini_leaf
    std::size_t leaves = 0;
};

SubtreeStat subtree_stat(const DecisionTree& t, std::size_t i, long double n_root) {
    const TreeNode& nd = t.nodes[i];
    if (nd.feature_index < 0)
        return {static_cast<long double>(nd.gini) * nd.n_samples / n_root, 1};
    SubtreeStat l = subtree_stat(t, nd.left, n_root);
    SubtreeStat r = subtree_stat(t, nd.right, n_root);
    return {l.leaf_mass + r.leaf_mass, l.leaves + r.leaves};
}

void collect_internal(const DecisionTree& t, std::size_t i, std::vector<std::size_t>& out) {
    if (t.nodes[i].feature_index < 0) return;
    out.push_back(i);
    collect_internal(t, t.nodes[i].left, out);
    collect_internal(t, t.nodes[i].right, out);
}

void collapse(DecisionTree& t, std::size_t i) { t.nodes[i].feature_index = -1; }

long double link_strength(const DecisionTree& t, std::size_t i, long double n_root) {
    const TreeNode& nd = t.nodes[i];
    SubtreeStat st = subtree_stat(t, i, n_root);
    long double r_node = static_cast<long double>(nd.gini) * nd.n_samples / n_root;
    return (r_node - st.leaf_mass) / static_cast<long double>(st.leaves - 1);
}

// Collapse every reachable internal node whose strength is <= alpha,
// rescanning until none remain (collapsing children can weaken an ancestor).
void collapse_at(DecisionTree& work, long double alpha, long double n_root) {
    for (;;) {
        if (work.nodes[0].feature_index < 0) return;
        std::vector<std::size_t> internal;
        collect_internal(work, 0, internal);
        bool collapsed = false;
        for (std::size_t i : internal) {
            if (work.nodes[i].feature_index < 0) continue;
            if (link_strength(work, i, n_root) <= alpha) {
                collapse(work, i);
                collapsed = true;
            }
        }
        if (!collapsed) return;
    }
}

long double weakest_link(const DecisionTree& work, long double n_root) {
    std::vector<std::size_t> internal;
    collect_internal(work, 0, internal);
    long double best = 0;
    bool have = false;
    for (std::size_t i : internal) {
        long double g = link_strength(work, i, n_root);
        if (!have || g < best) {
            best = g;
            have = true;
        }
    }
    return best;
}

}  // namespace

std::size_t dt_node_count(const DecisionTree& tree) {
    std::size_t nodes = 0, leaves = 0;
    count_reachable(tree, 0, nodes, leaves);
    return nodes;
}

std::size_t dt_leaf_count(const DecisionTree& tree) {
    std::size_t nodes = 0, leaves = 0;
    count_reachable(tree, 0, nodes, leaves);
    return leaves;
}

PruningPath ccp_path(const DecisionTree& tree) {
    PruningPath path;
    DecisionTree work = tree;  // collapsed in place, snapshots are compacted
    const long double n_root = static_cast<long double>(work.nodes[0].n_samples);

    // The alpha=0 entry is the smallest subtree with the full tree's training
    // impurity: subtrees that improve nothing are collapsed away first.
    collapse_at(work, 0.0L, n_root);
    path.alphas.push_back(0.0);
    path.n_nodes.push_back(dt_node_count(work));
    path.trees.push_back(compact(work));

    while (work.nodes[0].feature_index >= 0) {
        long double alpha = weakest_link(work, n_root);
        collapse_at(work, alpha, n_root);
        double rounded = static_cast<double>(alpha);
        if (rounded == path.alphas.back()) {
            // Distinct in extended precision but equal once rounded: the two
            // collapse events merge into a single path entry.
            path.n_nodes.back() = dt_node_count(work);
            path.trees.back() = compact(work);
            continue;
        }
        path.alphas.push_back(rounded);
        path.n_nodes.push_back(dt_node_count(work));
        path.trees.push_back(compact(work));
    }
    return path;
}

}  // namespace leakhound
