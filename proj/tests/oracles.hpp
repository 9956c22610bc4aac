#pragma once

// Independent reference implementations used as test oracles. Everything in
// this header is deliberately written from scratch against the definitions,
// not by calling the library code it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "tagscope/gbdt.hpp"

namespace oracles {

// O(n^2) DFT magnitude spectrum; independent of the library FFT.
inline std::vector<double> dft_magnitudes(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<double> mags(n / 2 + 1);
    for (std::size_t k = 0; k <= n / 2; ++k) {
        double re = 0.0, im = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double ang = -2.0 * 3.14159265358979323846 * static_cast<double>(k) *
                               static_cast<double>(i) / static_cast<double>(n);
            re += x[i] * std::cos(ang);
            im += x[i] * std::sin(ang);
        }
        mags[k] = std::sqrt(re * re + im * im);
    }
    return mags;
}

// ---- brute-force Shapley over the cover-weighted conditional expectation ----

inline double cond_expectation(const tagscope::gbdt::Tree& tree, int node, const double* x,
                               const std::set<int>& known) {
    const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
    if (nd.is_leaf()) return nd.leaf_value;
    if (known.count(nd.feature)) {
        const int next = x[static_cast<std::size_t>(nd.feature)] < nd.threshold ? nd.left : nd.right;
        return cond_expectation(tree, next, x, known);
    }
    const double cl = tree.nodes[static_cast<std::size_t>(nd.left)].cover;
    const double cr = tree.nodes[static_cast<std::size_t>(nd.right)].cover;
    return (cl * cond_expectation(tree, nd.left, x, known) +
            cr * cond_expectation(tree, nd.right, x, known)) /
           (cl + cr);
}

// Exponential-time Shapley values of one tree for the features it uses.
inline std::vector<double> brute_force_shapley(const tagscope::gbdt::Tree& tree,
                                               const std::vector<double>& x, std::size_t n_features) {
    std::vector<int> used;
    {
        std::set<int> s;
        for (const auto& nd : tree.nodes)
            if (!nd.is_leaf()) s.insert(nd.feature);
        used.assign(s.begin(), s.end());
    }
    const std::size_t m = used.size();
    std::vector<double> phi(n_features, 0.0);
    if (m == 0) return phi;

    std::vector<double> value(static_cast<std::size_t>(1) << m);
    for (std::uint64_t mask = 0; mask < value.size(); ++mask) {
        std::set<int> known;
        for (std::size_t b = 0; b < m; ++b)
            if (mask & (1ull << b)) known.insert(used[b]);
        value[mask] = cond_expectation(tree, 0, x.data(), known);
    }

    std::vector<double> fact(m + 1, 1.0);
    for (std::size_t i = 1; i <= m; ++i) fact[i] = fact[i - 1] * static_cast<double>(i);

    for (std::size_t b = 0; b < m; ++b) {
        double acc = 0.0;
        for (std::uint64_t mask = 0; mask < value.size(); ++mask) {
            if (mask & (1ull << b)) continue;
            const std::size_t s = static_cast<std::size_t>(__builtin_popcountll(mask));
            const double weight = fact[s] * fact[m - s - 1] / fact[m];
            acc += weight * (value[mask | (1ull << b)] - value[mask]);
        }
        phi[static_cast<std::size_t>(used[b])] = acc;
    }
    return phi;
}

// ---- minimal reference gradient booster (binary logistic, exact greedy) ----

struct RefNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1, right = -1;
    double value = 0.0;
};

struct RefTree {
    std::vector<RefNode> nodes;

    double predict(const std::vector<double>& x) const {
        int n = 0;
        while (nodes[static_cast<std::size_t>(n)].feature >= 0) {
            const auto& nd = nodes[static_cast<std::size_t>(n)];
            n = x[static_cast<std::size_t>(nd.feature)] < nd.threshold ? nd.left : nd.right;
        }
        return nodes[static_cast<std::size_t>(n)].value;
    }
};

struct RefBooster {
    double base = 0.0;
    std::vector<RefTree> trees;

    double margin(const std::vector<double>& x) const {
        double m = base;
        for (const auto& t : trees) m += t.predict(x);
        return m;
    }
};

inline int ref_build(RefTree& tree, const std::vector<std::vector<double>>& rows,
                     const std::vector<double>& g, const std::vector<double>& h,
                     std::vector<std::size_t> members, int depth, int max_depth, double lr,
                     double lambda, double min_child_weight) {
    double gs = 0.0, hs = 0.0;
    for (std::size_t r : members) {
        gs += g[r];
        hs += h[r];
    }

    int best_f = -1;
    double best_gain = 0.0, best_thr = 0.0;
    if (depth < max_depth) {
        const std::size_t d = rows[0].size();
        for (std::size_t f = 0; f < d; ++f) {
            std::vector<std::size_t> order = members;
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                if (rows[a][f] != rows[b][f]) return rows[a][f] < rows[b][f];
                return a < b;
            });
            double gl = 0.0, hl = 0.0;
            for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                gl += g[order[i]];
                hl += h[order[i]];
                if (rows[order[i + 1]][f] == rows[order[i]][f]) continue;
                const double hr = hs - hl;
                if (hl < min_child_weight || hr < min_child_weight) continue;
                const double gr = gs - gl;
                const double gain = 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) -
                                           gs * gs / (hs + lambda));
                if (gain > best_gain) {
                    best_gain = gain;
                    best_f = static_cast<int>(f);
                    best_thr = 0.5 * (rows[order[i]][f] + rows[order[i + 1]][f]);
                }
            }
        }
    }

    const int me = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    if (best_f < 0) {
        tree.nodes[static_cast<std::size_t>(me)].value = -lr * gs / (hs + lambda);
        return me;
    }
    std::vector<std::size_t> lm, rm;
    for (std::size_t r : members)
        (rows[r][static_cast<std::size_t>(best_f)] < best_thr ? lm : rm).push_back(r);
    tree.nodes[static_cast<std::size_t>(me)].feature = best_f;
    tree.nodes[static_cast<std::size_t>(me)].threshold = best_thr;
    const int l = ref_build(tree, rows, g, h, lm, depth + 1, max_depth, lr, lambda, min_child_weight);
    const int r = ref_build(tree, rows, g, h, rm, depth + 1, max_depth, lr, lambda, min_child_weight);
    tree.nodes[static_cast<std::size_t>(me)].left = l;
    tree.nodes[static_cast<std::size_t>(me)].right = r;
    return me;
}

inline RefBooster ref_train(const std::vector<std::vector<double>>& rows,
                            const std::vector<double>& y, int n_trees, int max_depth, double lr,
                            double lambda, double min_child_weight) {
    RefBooster booster;
    std::size_t pos = 0;
    for (double v : y)
        if (v == 1.0) ++pos;
    booster.base = std::log(static_cast<double>(pos) / static_cast<double>(y.size() - pos));

    std::vector<double> margins(rows.size(), booster.base);
    std::vector<std::size_t> all(rows.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

    for (int t = 0; t < n_trees; ++t) {
        std::vector<double> g(rows.size()), h(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const double p = 1.0 / (1.0 + std::exp(-margins[i]));
            g[i] = p - y[i];
            h[i] = p * (1.0 - p);
        }
        RefTree tree;
        ref_build(tree, rows, g, h, all, 0, max_depth, lr, lambda, min_child_weight);
        for (std::size_t i = 0; i < rows.size(); ++i) margins[i] += tree.predict(rows[i]);
        booster.trees.push_back(std::move(tree));
    }
    return booster;
}

// ---- random forest generator for the exactness suites ----

// Trees are grown over a small feature pool with internal covers equal to the
// sum of their children, matching the trained-model invariant.
inline tagscope::gbdt::Tree random_tree(tagscope::Rng& rng, int max_depth, int feature_pool) {
    using tagscope::gbdt::Tree;
    using tagscope::gbdt::TreeNode;
    Tree tree;

    struct Item {
        int node;
        int depth;
    };
    tree.nodes.push_back({});
    std::vector<Item> stack = {{0, 0}};
    while (!stack.empty()) {
        const Item it = stack.back();
        stack.pop_back();
        const bool leaf = it.depth >= max_depth || rng.next_unit() < 0.25;
        if (leaf) {
            tree.nodes[static_cast<std::size_t>(it.node)].feature = -1;
            tree.nodes[static_cast<std::size_t>(it.node)].leaf_value = rng.next_range(-2.0, 2.0);
            tree.nodes[static_cast<std::size_t>(it.node)].cover = rng.next_range(0.5, 5.0);
            continue;
        }
        const int left = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes.push_back({});
        TreeNode& nd = tree.nodes[static_cast<std::size_t>(it.node)];
        nd.feature = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(feature_pool)));
        nd.threshold = rng.next_range(-1.0, 1.0);
        nd.left = left;
        nd.right = left + 1;
        stack.push_back({left, it.depth + 1});
        stack.push_back({left + 1, it.depth + 1});
    }
    // covers bottom-up
    for (std::size_t i = tree.nodes.size(); i-- > 0;) {
        auto& nd = tree.nodes[i];
        if (!nd.is_leaf())
            nd.cover = tree.nodes[static_cast<std::size_t>(nd.left)].cover +
                       tree.nodes[static_cast<std::size_t>(nd.right)].cover;
    }
    return tree;
}

}  // namespace oracles
