#include "damf/learners.hpp"

#include "damf/goss.hpp"

namespace damf {

void LevelwiseExactLearner::prepare(const Matrix& X, std::span<const double>, std::span<const std::size_t>,
                                    const BoostConfig&) {
    design_ = X;
}

DecisionTree LevelwiseExactLearner::grow(const GradHess& gh, std::span<const std::size_t> rows,
                                         std::span<const std::size_t> features, const BoostConfig& cfg,
                                         std::mt19937_64&) {
    return build_tree_levelwise(design_, rows, features, gh, GrowParams::from(cfg));
}

void LeafwiseHistogramLearner::prepare(const Matrix& X, std::span<const double>, std::span<const std::size_t>,
                                       const BoostConfig&) {
    if (opts_.bundle_features) {
        BundledFeatures b = bundle_exclusive_features(X);
        design_ = std::move(b.X);
        bundles_ = std::move(b.map);
    } else {
        design_ = X;
        bundles_.reset();
    }
}

FeatureTransform LeafwiseHistogramLearner::transform() const {
    if (bundles_) {
        return *bundles_;
    }
    return {};
}

DecisionTree LeafwiseHistogramLearner::grow(const GradHess& gh, std::span<const std::size_t> rows,
                                            std::span<const std::size_t> features, const BoostConfig& cfg,
                                            std::mt19937_64& rng) {
    GradHess subset;
    subset.g.reserve(rows.size());
    subset.h.reserve(rows.size());
    for (std::size_t r : rows) {
        subset.g.push_back(gh.g[r]);
        subset.h.push_back(gh.h[r]);
    }
    GossSample sample = goss_sample(subset, opts_.goss_top, opts_.goss_other, rng);
    for (std::size_t& r : sample.rows) {
        r = rows[r];
    }
    const GradHess weighted = apply_goss_weights(gh, sample);

    GrowParams params = GrowParams::from(cfg);
    params.max_leaves = opts_.max_leaves;
    params.min_samples_leaf = opts_.min_samples_leaf;
    params.min_child_weight = opts_.min_child_weight;
    const HistogramLayout layout = make_histogram_layout(design_, sample.rows, opts_.max_bins);
    return build_tree_leafwise(design_, layout, sample.rows, features, weighted, params);
}

void ObliviousOrderedLearner::prepare(const Matrix& X, std::span<const double> y,
                                      std::span<const std::size_t> categorical_slots, const BoostConfig& cfg) {
    ctx_ = OrderedContext::make(X.rows(), cfg.seed, opts_.schedule, opts_.prior, opts_.prior_strength);
    design_ = ordered_encode_matrix(X, y, categorical_slots, ctx_);
    encoding_ = full_target_encoding(X, y, categorical_slots, opts_.prior, opts_.prior_strength);
    GrowParams params = GrowParams::from(cfg);
    params.min_child_weight = 0.0;
    prefix_ = std::make_unique<OrderedPrefixModels>(design_, y, ctx_, cfg.loss, cfg.learning_rate, params);
}

DecisionTree ObliviousOrderedLearner::grow(const GradHess& gh, std::span<const std::size_t> rows,
                                           std::span<const std::size_t> features, const BoostConfig& cfg,
                                           std::mt19937_64&) {
    GrowParams params = GrowParams::from(cfg);
    params.min_child_weight = 0.0;
    const GradHess ordered = prefix_->ordered_residuals();
    const std::vector<ObliviousLevel> levels = find_oblivious_structure(design_, rows, features, ordered, params);
    DecisionTree tree = make_oblivious_tree(levels);
    assign_leaf_weights(tree, design_, rows, gh, params.lambda);
    prefix_->advance();
    return tree;
}

BoostConfig preset_config(Variant v) {
    BoostConfig cfg;
    cfg.learning_rate = 0.01;
    cfg.max_depth = 10;
    cfg.subsample = 0.8;
    cfg.seed = 42;
    switch (v) {
    case Variant::levelwise_exact:
    case Variant::leafwise_histogram:
        cfg.n_trees = 300;
        cfg.loss = LossKind::squared;
        cfg.colsample_bytree = 0.9;
        cfg.lambda = 1.0;
        cfg.gamma = 0.0;
        cfg.min_child_weight = 1.0;
        break;
    case Variant::oblivious_ordered:
        cfg.n_trees = 500;
        cfg.loss = LossKind::rmse_objective;
        cfg.colsample_bytree = 1.0;
        cfg.lambda = 3.0;
        cfg.gamma = 0.0;
        cfg.min_child_weight = 0.0;
        break;
    }
    return cfg;
}

std::unique_ptr<TreeLearner> make_learner(Variant v, const LearnerOptions& opts) {
    switch (v) {
    case Variant::levelwise_exact: return std::make_unique<LevelwiseExactLearner>();
    case Variant::leafwise_histogram: return std::make_unique<LeafwiseHistogramLearner>(opts.leafwise);
    case Variant::oblivious_ordered: return std::make_unique<ObliviousOrderedLearner>(opts.oblivious);
    }
    return nullptr;
}

}  // namespace damf
