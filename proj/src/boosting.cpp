#include "damf/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "damf/error.hpp"

namespace damf {

GradHess compute_grad_hess(LossKind loss, std::span<const double> y, std::span<const double> y_hat) {
    if (y.size() != y_hat.size()) {
        throw Error(ErrorCode::LengthMismatch,
                    "targets " + std::to_string(y.size()) + " vs predictions " + std::to_string(y_hat.size()));
    }
    GradHess gh;
    gh.g.resize(y.size());
    gh.h.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double diff = y_hat[i] - y[i];
        switch (loss) {
        case LossKind::squared:
        case LossKind::rmse_objective:
            gh.g[i] = diff;
            gh.h[i] = 1.0;
            break;
        case LossKind::absolute:
            gh.g[i] = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
            gh.h[i] = kHessianFloor;
            break;
        }
    }
    return gh;
}

double loss_value(LossKind loss, double y, double y_hat) {
    const double diff = y_hat - y;
    return loss == LossKind::absolute ? std::abs(diff) : 0.5 * diff * diff;
}

std::string_view to_string(Variant v) noexcept {
    switch (v) {
    case Variant::levelwise_exact: return "levelwise_exact";
    case Variant::leafwise_histogram: return "leafwise_histogram";
    case Variant::oblivious_ordered: return "oblivious_ordered";
    }
    return "unknown";
}

bool parse_variant(std::string_view text, Variant& out) {
    for (Variant v : {Variant::levelwise_exact, Variant::leafwise_histogram, Variant::oblivious_ordered}) {
        if (text == to_string(v)) {
            out = v;
            return true;
        }
    }
    return false;
}

std::string_view to_string(LossKind k) noexcept {
    switch (k) {
    case LossKind::squared: return "squared";
    case LossKind::absolute: return "absolute";
    case LossKind::rmse_objective: return "rmse";
    }
    return "unknown";
}

bool parse_loss(std::string_view text, LossKind& out) {
    for (LossKind k : {LossKind::squared, LossKind::absolute, LossKind::rmse_objective}) {
        if (text == to_string(k)) {
            out = k;
            return true;
        }
    }
    return false;
}

void BoostConfig::validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) fail("learning_rate must be in (0, 1]");
    if (n_trees < 0) fail("n_trees must be >= 0");
    if (!(lambda >= 0.0)) fail("lambda must be >= 0");
    if (!(gamma >= 0.0)) fail("gamma must be >= 0");
    if (max_depth < 0) fail("max_depth must be >= 0");
    if (!(subsample > 0.0 && subsample <= 1.0)) fail("subsample must be in (0, 1]");
    if (!(colsample_bytree > 0.0 && colsample_bytree <= 1.0)) fail("colsample_bytree must be in (0, 1]");
    if (!(min_child_weight >= 0.0)) fail("min_child_weight must be >= 0");
}

double Ensemble::predict_row(std::span<const double> raw_row) const {
    std::vector<double> x(transformed_width(transform, raw_row.size()));
    transform_row(transform, raw_row, x);
    double s = base_score;
    for (const DecisionTree& t : trees) {
        s += learning_rate * t.predict(x);
    }
    return s;
}

std::vector<double> ensemble_predict(const Ensemble& model, const Matrix& X) {
    if (X.cols() != model.n_features) {
        throw Error(ErrorCode::FeatureCountMismatch, "model expects " + std::to_string(model.n_features) +
                                                         " features, got " + std::to_string(X.cols()));
    }
    std::vector<double> out(X.rows());
    for (std::size_t r = 0; r < X.rows(); ++r) {
        out[r] = model.predict_row(X.row(r));
    }
    return out;
}

namespace {

std::vector<std::size_t> draw_without_replacement(std::size_t n, std::size_t k, std::mt19937_64& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

std::size_t sample_count(std::size_t n, double fraction) {
    const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    return std::clamp<std::size_t>(k, n == 0 ? 0 : 1, n);
}

}  // namespace

std::vector<std::size_t> sample_rows(std::size_t n, double fraction, std::mt19937_64& rng) {
    return draw_without_replacement(n, sample_count(n, fraction), rng);
}

std::vector<std::size_t> sample_columns(std::size_t n, double fraction, std::mt19937_64& rng) {
    return draw_without_replacement(n, sample_count(n, fraction), rng);
}

BoostFit boost_fit(const SupervisedDataset& train, TreeLearner& learner, const BoostConfig& cfg) {
    cfg.validate();
    const std::size_t n = train.size();
    if (n == 0) {
        throw Error(ErrorCode::EmptyDataset, "no training rows");
    }
    if (train.X.rows() != n) {
        throw Error(ErrorCode::LengthMismatch, "feature rows differ from target length");
    }

    try {
        learner.prepare(train.X, train.y, train.categorical_slots, cfg);
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(ErrorCode::LearnerFailure, e.what());
    }
    const Matrix& design = learner.design();

    BoostFit fit;
    Ensemble& model = fit.ensemble;
    model.variant = learner.variant();
    model.learning_rate = cfg.learning_rate;
    model.n_features = train.X.cols();
    model.transform = learner.transform();
    model.base_score = std::accumulate(train.y.begin(), train.y.end(), 0.0) / static_cast<double>(n);

    std::vector<double>& pred = fit.train_predictions;
    pred.assign(n, model.base_score);
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});

    model.trees.reserve(static_cast<std::size_t>(cfg.n_trees));
    for (int t = 0; t < cfg.n_trees; ++t) {
        const GradHess gh = compute_grad_hess(cfg.loss, train.y, pred);
        const std::vector<std::size_t> rows =
            learner.samples_rows() ? all_rows : sample_rows(n, cfg.subsample, rng);
        const std::vector<std::size_t> cols = sample_columns(design.cols(), cfg.colsample_bytree, rng);
        DecisionTree tree;
        try {
            tree = learner.grow(gh, rows, cols, cfg, rng);
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw Error(ErrorCode::LearnerFailure, e.what());
        }
        for (std::size_t i = 0; i < n; ++i) {
            pred[i] += cfg.learning_rate * tree.predict(design.row(i));
        }
        model.trees.push_back(std::move(tree));
    }
    return fit;
}

}  // namespace damf
