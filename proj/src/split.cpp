#include "damf/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace damf {

GrowParams GrowParams::from(const BoostConfig& cfg) {
    GrowParams p;
    p.lambda = cfg.lambda;
    p.gamma = cfg.gamma;
    p.max_depth = cfg.max_depth;
    p.min_child_weight = cfg.min_child_weight;
    return p;
}

double score_term(double g, double h, double lambda) noexcept {
    const double denom = h + lambda;
    return denom > 0.0 ? g * g / denom : 0.0;
}

double split_gain(double gl, double hl, double gr, double hr, double lambda) noexcept {
    return score_term(gl, hl, lambda) + score_term(gr, hr, lambda) - score_term(gl + gr, hl + hr, lambda);
}

double leaf_weight(double g, double h, double lambda) noexcept {
    const double denom = h + lambda;
    return denom > 0.0 && g != 0.0 ? -g / denom : 0.0;
}

double midpoint_threshold(double lo, double hi) noexcept {
    const double mid = std::midpoint(lo, hi);
    return mid < hi ? mid : lo;
}

NodeTotals sum_rows(const GradHess& gh, std::span<const std::size_t> rows) noexcept {
    NodeTotals t;
    for (std::size_t r : rows) {
        t.g += gh.g[r];
        t.h += gh.h[r];
    }
    return t;
}

std::optional<SplitCandidate> exact_best_split(const Matrix& X, std::span<const std::size_t> rows,
                                               std::span<const std::size_t> features, const GradHess& gh,
                                               const GrowParams& params) {
    if (rows.size() < 2) {
        return std::nullopt;
    }
    const NodeTotals total = sum_rows(gh, rows);
    std::optional<SplitCandidate> best;
    double best_net = 0.0;
    std::vector<std::size_t> order(rows.begin(), rows.end());

    for (std::size_t f : features) {
        std::copy(rows.begin(), rows.end(), order.begin());
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return X(a, f) < X(b, f); });

        double gl = 0.0;
        double hl = 0.0;
        std::size_t nl = 0;
        std::size_t k = 0;
        while (k < order.size()) {
            // Accumulate one group of equal values, then add it to the left side.
            const double v = X(order[k], f);
            double group_g = 0.0;
            double group_h = 0.0;
            std::size_t group_n = 0;
            while (k < order.size() && X(order[k], f) == v) {
                group_g += gh.g[order[k]];
                group_h += gh.h[order[k]];
                ++group_n;
                ++k;
            }
            gl += group_g;
            hl += group_h;
            nl += group_n;
            if (k == order.size()) {
                break;
            }
            const std::size_t nr = order.size() - nl;
            const double gr = total.g - gl;
            const double hr = total.h - hl;
            if (nl < params.min_samples_leaf || nr < params.min_samples_leaf || hl < params.min_child_weight ||
                hr < params.min_child_weight) {
                continue;
            }
            const double gain = split_gain(gl, hl, gr, hr, params.lambda);
            const double net = gain - params.gamma;
            if (net > best_net) {
                best_net = net;
                best = SplitCandidate{f, midpoint_threshold(v, X(order[k], f)), gain, gl, gr, hl, hr, nl, nr};
            }
        }
    }
    return best;
}

DecisionTree build_tree_levelwise(const Matrix& X, std::span<const std::size_t> rows,
                                  std::span<const std::size_t> features, const GradHess& gh,
                                  const GrowParams& params) {
    DecisionTree tree;
    struct Pending {
        std::size_t node;
        std::vector<std::size_t> rows;
    };
    std::vector<Pending> frontier;
    frontier.push_back({0, std::vector<std::size_t>(rows.begin(), rows.end())});
    std::vector<Pending> leaves;

    for (int depth = 0; depth < params.max_depth && !frontier.empty(); ++depth) {
        std::vector<Pending> next;
        for (Pending& p : frontier) {
            const auto split = exact_best_split(X, p.rows, features, gh, params);
            if (!split) {
                leaves.push_back(std::move(p));
                continue;
            }
            const auto [l, r] = tree.split(p.node, split->feature, split->threshold);
            Pending left{l, {}};
            Pending right{r, {}};
            for (std::size_t row : p.rows) {
                (X(row, split->feature) <= split->threshold ? left.rows : right.rows).push_back(row);
            }
            next.push_back(std::move(left));
            next.push_back(std::move(right));
        }
        frontier = std::move(next);
    }
    for (Pending& p : frontier) {
        leaves.push_back(std::move(p));
    }
    for (const Pending& p : leaves) {
        const NodeTotals t = sum_rows(gh, p.rows);
        tree.set_weight(p.node, leaf_weight(t.g, t.h, params.lambda));
    }
    return tree;
}

void assign_leaf_weights(DecisionTree& tree, const Matrix& X, std::span<const std::size_t> rows, const GradHess& gh,
                         double lambda) {
    const std::size_t n_nodes = tree.nodes().size();
    std::vector<double> g(n_nodes, 0.0);
    std::vector<double> h(n_nodes, 0.0);
    for (std::size_t r : rows) {
        const std::size_t leaf = tree.leaf_index(X.row(r));
        g[leaf] += gh.g[r];
        h[leaf] += gh.h[r];
    }
    for (std::size_t i = 0; i < n_nodes; ++i) {
        if (tree.nodes()[i].is_leaf()) {
            tree.set_weight(i, leaf_weight(g[i], h[i], lambda));
        }
    }
}

}  // namespace damf
