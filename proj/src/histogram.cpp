#include "damf/histogram.hpp"

#include <algorithm>

namespace damf {

std::size_t FeatureBins::bin_of(double v) const noexcept {
    return static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), v) - edges.begin());
}

FeatureBins make_feature_bins(const Matrix& X, std::size_t feature, std::span<const std::size_t> rows,
                              std::size_t max_bins) {
    FeatureBins bins;
    if (rows.empty() || max_bins < 2) {
        return bins;
    }
    std::vector<double> values(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        values[i] = X(rows[i], feature);
    }
    std::sort(values.begin(), values.end());
    std::vector<double> distinct;
    std::vector<std::size_t> upto;  // number of values <= distinct[k]
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (distinct.empty() || values[i] != distinct.back()) {
            distinct.push_back(values[i]);
            upto.push_back(0);
        }
        upto.back() = i + 1;
    }
    if (distinct.size() <= max_bins) {
        for (std::size_t k = 0; k + 1 < distinct.size(); ++k) {
            bins.edges.push_back(midpoint_threshold(distinct[k], distinct[k + 1]));
        }
        return bins;
    }
    // Cut after the distinct value that reaches each quantile target.
    const std::size_t n = values.size();
    std::size_t k = 0;
    for (std::size_t q = 1; q < max_bins; ++q) {
        const std::size_t target = (q * n + max_bins - 1) / max_bins;
        while (k + 1 < distinct.size() && upto[k] < target) {
            ++k;
        }
        if (k + 1 >= distinct.size()) {
            break;
        }
        const double edge = midpoint_threshold(distinct[k], distinct[k + 1]);
        if (bins.edges.empty() || edge > bins.edges.back()) {
            bins.edges.push_back(edge);
        }
    }
    return bins;
}

HistogramLayout make_histogram_layout(const Matrix& X, std::span<const std::size_t> root_rows, std::size_t max_bins) {
    HistogramLayout layout;
    layout.n_features = X.cols();
    layout.bins.reserve(X.cols());
    for (std::size_t f = 0; f < X.cols(); ++f) {
        layout.bins.push_back(make_feature_bins(X, f, root_rows, max_bins));
    }
    layout.codes.assign(X.rows() * X.cols(), 0);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        for (std::size_t f = 0; f < X.cols(); ++f) {
            layout.codes[r * X.cols() + f] = static_cast<std::uint32_t>(layout.bins[f].bin_of(X(r, f)));
        }
    }
    return layout;
}

std::vector<FeatureHistogram> build_histograms(const HistogramLayout& layout, std::span<const std::size_t> rows,
                                               std::span<const std::size_t> features, const GradHess& gh) {
    std::vector<FeatureHistogram> hist(layout.n_features);
    for (std::size_t f : features) {
        const std::size_t nb = layout.bins[f].bin_count();
        hist[f].g.assign(nb, 0.0);
        hist[f].h.assign(nb, 0.0);
        hist[f].count.assign(nb, 0);
    }
    for (std::size_t r : rows) {
        for (std::size_t f : features) {
            const std::uint32_t b = layout.code(r, f);
            hist[f].g[b] += gh.g[r];
            hist[f].h[b] += gh.h[r];
            hist[f].count[b] += 1;
        }
    }
    return hist;
}

std::vector<FeatureHistogram> subtract_histograms(const std::vector<FeatureHistogram>& parent,
                                                  const std::vector<FeatureHistogram>& child) {
    std::vector<FeatureHistogram> out(parent.size());
    for (std::size_t f = 0; f < parent.size(); ++f) {
        const std::size_t nb = parent[f].g.size();
        out[f].g.resize(nb);
        out[f].h.resize(nb);
        out[f].count.resize(nb);
        for (std::size_t b = 0; b < nb; ++b) {
            out[f].g[b] = parent[f].g[b] - child[f].g[b];
            out[f].h[b] = parent[f].h[b] - child[f].h[b];
            out[f].count[b] = parent[f].count[b] - child[f].count[b];
        }
    }
    return out;
}

std::optional<SplitCandidate> best_split_histogram(const HistogramLayout& layout,
                                                   const std::vector<FeatureHistogram>& hist,
                                                   std::span<const std::size_t> features, NodeTotals total,
                                                   std::size_t node_rows, const GrowParams& params) {
    std::optional<SplitCandidate> best;
    if (node_rows < 2) {
        return best;
    }
    double best_net = 0.0;
    for (std::size_t f : features) {
        const FeatureHistogram& fh = hist[f];
        const auto& edges = layout.bins[f].edges;
        double gl = 0.0;
        double hl = 0.0;
        std::size_t nl = 0;
        for (std::size_t b = 0; b < edges.size(); ++b) {
            if (fh.count[b] == 0) {
                continue;
            }
            gl += fh.g[b];
            hl += fh.h[b];
            nl += fh.count[b];
            if (nl == node_rows) {
                break;
            }
            const std::size_t nr = node_rows - nl;
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
                best = SplitCandidate{f, edges[b], gain, gl, gr, hl, hr, nl, nr};
            }
        }
    }
    return best;
}

DecisionTree build_tree_leafwise(const Matrix& X, const HistogramLayout& layout, std::span<const std::size_t> rows,
                                 std::span<const std::size_t> features, const GradHess& gh, const GrowParams& params) {
    (void)X;
    struct Leaf {
        std::size_t node;
        int depth;
        std::vector<std::size_t> rows;
        std::vector<FeatureHistogram> hist;
        NodeTotals totals;
        std::optional<SplitCandidate> best;
    };
    auto evaluate = [&](Leaf& leaf) {
        leaf.best.reset();
        if (leaf.depth < params.max_depth) {
            leaf.best = best_split_histogram(layout, leaf.hist, features, leaf.totals, leaf.rows.size(), params);
        }
    };

    DecisionTree tree;
    std::vector<Leaf> leaves;
    {
        Leaf root{0, 0, std::vector<std::size_t>(rows.begin(), rows.end()), {}, sum_rows(gh, rows), std::nullopt};
        root.hist = build_histograms(layout, root.rows, features, gh);
        evaluate(root);
        leaves.push_back(std::move(root));
    }
    const std::size_t budget = params.max_leaves == 0 ? static_cast<std::size_t>(-1) : params.max_leaves;

    while (leaves.size() < budget) {
        // Leaves are kept in creation order (node index), so the first maximum wins ties.
        std::size_t pick = leaves.size();
        double pick_net = 0.0;
        for (std::size_t i = 0; i < leaves.size(); ++i) {
            if (leaves[i].best && leaves[i].best->net_gain(params.gamma) > pick_net) {
                pick_net = leaves[i].best->net_gain(params.gamma);
                pick = i;
            }
        }
        if (pick == leaves.size()) {
            break;
        }
        Leaf parent = std::move(leaves[pick]);
        leaves.erase(leaves.begin() + static_cast<std::ptrdiff_t>(pick));
        const SplitCandidate& s = *parent.best;
        const std::size_t edge_bin = layout.bins[s.feature].bin_of(s.threshold);

        const auto [l, r] = tree.split(parent.node, s.feature, s.threshold);
        Leaf left{l, parent.depth + 1, {}, {}, {}, std::nullopt};
        Leaf right{r, parent.depth + 1, {}, {}, {}, std::nullopt};
        for (std::size_t row : parent.rows) {
            (layout.code(row, s.feature) <= edge_bin ? left.rows : right.rows).push_back(row);
        }
        left.totals = sum_rows(gh, left.rows);
        right.totals = sum_rows(gh, right.rows);
        // Build the smaller child directly; derive its sibling from the parent.
        Leaf& small = left.rows.size() <= right.rows.size() ? left : right;
        Leaf& large = left.rows.size() <= right.rows.size() ? right : left;
        small.hist = build_histograms(layout, small.rows, features, gh);
        large.hist = subtract_histograms(parent.hist, small.hist);
        evaluate(left);
        evaluate(right);
        leaves.push_back(std::move(left));
        leaves.push_back(std::move(right));
        std::sort(leaves.begin(), leaves.end(), [](const Leaf& a, const Leaf& b) { return a.node < b.node; });
    }
    for (const Leaf& leaf : leaves) {
        tree.set_weight(leaf.node, leaf_weight(leaf.totals.g, leaf.totals.h, params.lambda));
    }
    return tree;
}

}  // namespace damf
