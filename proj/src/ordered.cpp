#include "damf/ordered.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

#include "damf/error.hpp"

namespace damf {

std::size_t OrderedContext::prefix_slot(std::size_t pos) const {
    const auto it = std::upper_bound(schedule.begin(), schedule.end(), pos);
    return static_cast<std::size_t>(it - schedule.begin()) - 1;
}

OrderedContext OrderedContext::make(std::size_t n, std::uint64_t seed, PrefixSchedule schedule, double prior,
                                    double prior_strength) {
    if (!(prior_strength > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "prior strength must be > 0");
    }
    OrderedContext ctx;
    ctx.prior = prior;
    ctx.prior_strength = prior_strength;
    ctx.perm.resize(n);
    std::iota(ctx.perm.begin(), ctx.perm.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(ctx.perm[i - 1], ctx.perm[pick(rng)]);
    }
    ctx.position.resize(n);
    for (std::size_t p = 0; p < n; ++p) {
        ctx.position[ctx.perm[p]] = p;
    }
    ctx.schedule.push_back(0);
    if (schedule == PrefixSchedule::stride1) {
        for (std::size_t j = 1; j < n; ++j) {
            ctx.schedule.push_back(j);
        }
    } else {
        for (std::size_t j = 1; j < n; j *= 2) {
            ctx.schedule.push_back(j);
        }
    }
    return ctx;
}

std::vector<double> ordered_target_encode(std::span<const double> values, std::span<const double> y,
                                          const OrderedContext& ctx) {
    if (values.size() != ctx.size() || y.size() != ctx.size()) {
        throw Error(ErrorCode::LengthMismatch, "ordered encoding needs one value and target per permuted row");
    }
    std::vector<double> out(values.size());
    std::map<double, std::pair<double, double>> seen;
    for (std::size_t row : ctx.perm) {
        auto& [sum, count] = seen[values[row]];
        out[row] = (sum + ctx.prior_strength * ctx.prior) / (count + ctx.prior_strength);
        sum += y[row];
        count += 1.0;
    }
    return out;
}

Matrix ordered_encode_matrix(const Matrix& X, std::span<const double> y, std::span<const std::size_t> slots,
                             const OrderedContext& ctx) {
    Matrix out = X;
    for (std::size_t c : slots) {
        const std::vector<double> col = X.column(c);
        const std::vector<double> enc = ordered_target_encode(col, y, ctx);
        for (std::size_t r = 0; r < X.rows(); ++r) {
            out(r, c) = enc[r];
        }
    }
    return out;
}

CategoricalEncoding full_target_encoding(const Matrix& X, std::span<const double> y,
                                         std::span<const std::size_t> slots, double prior, double prior_strength) {
    CategoricalEncoding enc;
    enc.prior = prior;
    enc.prior_strength = prior_strength;
    for (std::size_t c : slots) {
        CategoricalEncoding::Slot slot;
        slot.column = c;
        for (std::size_t r = 0; r < X.rows(); ++r) {
            auto& [sum, count] = slot.stats[X(r, c)];
            sum += y[r];
            count += 1.0;
        }
        enc.slots.push_back(std::move(slot));
    }
    return enc;
}

std::vector<ObliviousLevel> find_oblivious_structure(const Matrix& X, std::span<const std::size_t> rows,
                                                     std::span<const std::size_t> features, const GradHess& gh,
                                                     const GrowParams& params) {
    std::vector<ObliviousLevel> levels;
    if (rows.size() < 2) {
        return levels;
    }
    // Rows presorted per feature once; node membership changes per level.
    std::vector<std::vector<std::size_t>> sorted(features.size());
    for (std::size_t k = 0; k < features.size(); ++k) {
        const std::size_t f = features[k];
        sorted[k].assign(rows.begin(), rows.end());
        std::stable_sort(sorted[k].begin(), sorted[k].end(),
                         [&](std::size_t a, std::size_t b) { return X(a, f) < X(b, f); });
    }
    std::vector<std::size_t> node_of(X.rows(), 0);
    std::size_t nodes = 1;

    while (static_cast<int>(levels.size()) < params.max_depth) {
        std::vector<double> g_tot(nodes, 0.0);
        std::vector<double> h_tot(nodes, 0.0);
        for (std::size_t r : rows) {
            g_tot[node_of[r]] += gh.g[r];
            h_tot[node_of[r]] += gh.h[r];
        }
        std::vector<double> parent(nodes);
        for (std::size_t i = 0; i < nodes; ++i) {
            parent[i] = score_term(g_tot[i], h_tot[i], params.lambda);
        }

        bool found = false;
        ObliviousLevel best;
        double best_gain = 0.0;
        std::vector<double> gl(nodes);
        std::vector<double> hl(nodes);
        std::vector<double> contrib(nodes);
        for (std::size_t k = 0; k < features.size(); ++k) {
            const std::size_t f = features[k];
            const auto& order = sorted[k];
            std::fill(gl.begin(), gl.end(), 0.0);
            std::fill(hl.begin(), hl.end(), 0.0);
            std::fill(contrib.begin(), contrib.end(), 0.0);
            double total = 0.0;  // summed gain at the current sweep point
            std::size_t i = 0;
            while (i < order.size()) {
                const double v = X(order[i], f);
                while (i < order.size() && X(order[i], f) == v) {
                    const std::size_t r = order[i];
                    const std::size_t nd = node_of[r];
                    gl[nd] += gh.g[r];
                    hl[nd] += gh.h[r];
                    const double c = score_term(gl[nd], hl[nd], params.lambda) +
                                     score_term(g_tot[nd] - gl[nd], h_tot[nd] - hl[nd], params.lambda) - parent[nd];
                    total += c - contrib[nd];
                    contrib[nd] = c;
                    ++i;
                }
                if (i == order.size()) {
                    break;
                }
                if (total > best_gain) {
                    best_gain = total;
                    best = ObliviousLevel{f, midpoint_threshold(v, X(order[i], f)), total};
                    found = true;
                }
            }
        }
        if (!found) {
            break;
        }
        // Exact summed gain of the winner, free of sweep drift.
        std::fill(gl.begin(), gl.end(), 0.0);
        std::fill(hl.begin(), hl.end(), 0.0);
        for (std::size_t r : rows) {
            if (X(r, best.feature) <= best.threshold) {
                gl[node_of[r]] += gh.g[r];
                hl[node_of[r]] += gh.h[r];
            }
        }
        double exact = 0.0;
        for (std::size_t nd = 0; nd < nodes; ++nd) {
            exact += split_gain(gl[nd], hl[nd], g_tot[nd] - gl[nd], h_tot[nd] - hl[nd], params.lambda);
        }
        best.gain = exact;
        if (!(exact - params.gamma * static_cast<double>(nodes) > 0.0)) {
            break;
        }
        levels.push_back(best);
        for (std::size_t r : rows) {
            node_of[r] = 2 * node_of[r] + (X(r, best.feature) <= best.threshold ? 0 : 1);
        }
        nodes *= 2;
    }
    return levels;
}

DecisionTree make_oblivious_tree(std::span<const ObliviousLevel> levels) {
    DecisionTree tree;
    std::vector<std::size_t> frontier{0};
    for (const ObliviousLevel& lv : levels) {
        std::vector<std::size_t> next;
        next.reserve(frontier.size() * 2);
        for (std::size_t node : frontier) {
            const auto [l, r] = tree.split(node, lv.feature, lv.threshold);
            next.push_back(l);
            next.push_back(r);
        }
        frontier = std::move(next);
    }
    return tree;
}

DecisionTree build_tree_oblivious(const Matrix& X, std::span<const std::size_t> rows,
                                  std::span<const std::size_t> features, const GradHess& gh, const GrowParams& params) {
    const std::vector<ObliviousLevel> levels = find_oblivious_structure(X, rows, features, gh, params);
    DecisionTree tree = make_oblivious_tree(levels);
    assign_leaf_weights(tree, X, rows, gh, params.lambda);
    return tree;
}

OrderedPrefixModels::OrderedPrefixModels(const Matrix& design, std::span<const double> y, const OrderedContext& ctx,
                                         LossKind loss, double learning_rate, const GrowParams& params)
    : design_(design), y_(y.begin(), y.end()), ctx_(ctx), loss_(loss), learning_rate_(learning_rate),
      params_(params) {
    const std::size_t n = ctx.size();
    if (n == 0 || ctx.schedule.empty()) {
        throw Error(ErrorCode::ScheduleEmpty, "ordered boosting needs at least one row and one prefix model");
    }
    if (design.rows() != n || y.size() != n) {
        throw Error(ErrorCode::LengthMismatch, "ordered context, design and targets differ in length");
    }
    all_features_.resize(design.cols());
    std::iota(all_features_.begin(), all_features_.end(), std::size_t{0});
    prefixes_.resize(ctx.schedule.size());
    for (std::size_t s = 0; s < prefixes_.size(); ++s) {
        Prefix& p = prefixes_[s];
        p.length = ctx.schedule[s];
        p.reach = s + 1 < ctx.schedule.size() ? ctx.schedule[s + 1] : n;
        double base = ctx.prior;
        if (p.length > 0) {
            double sum = 0.0;
            for (std::size_t pos = 0; pos < p.length; ++pos) {
                sum += y_[ctx.perm[pos]];
            }
            base = sum / static_cast<double>(p.length);
        }
        p.pred.assign(n, base);
    }
}

std::vector<double> OrderedPrefixModels::ordered_predictions() const {
    std::vector<double> out(ctx_.size());
    for (std::size_t s = 0; s < prefixes_.size(); ++s) {
        const Prefix& p = prefixes_[s];
        for (std::size_t pos = p.length; pos < p.reach; ++pos) {
            const std::size_t row = ctx_.perm[pos];
            out[row] = p.pred[row];
        }
    }
    return out;
}

GradHess OrderedPrefixModels::ordered_residuals() const {
    return compute_grad_hess(loss_, y_, ordered_predictions());
}

void OrderedPrefixModels::advance() {
    for (Prefix& p : prefixes_) {
        if (p.length == 0) {
            continue;
        }
        const std::span<const std::size_t> rows(ctx_.perm.data(), p.length);
        const GradHess gh = compute_grad_hess(loss_, y_, p.pred);
        const DecisionTree tree = build_tree_oblivious(design_, rows, all_features_, gh, params_);
        for (std::size_t pos = 0; pos < p.reach; ++pos) {
            const std::size_t row = ctx_.perm[pos];
            p.pred[row] += learning_rate_ * tree.predict(design_.row(row));
        }
    }
}

}  // namespace damf
