#pragma once

#include <cstddef>
#include <memory>
#include <optional>

#include "damf/boosting.hpp"
#include "damf/bundling.hpp"
#include "damf/histogram.hpp"
#include "damf/ordered.hpp"
#include "damf/split.hpp"

namespace damf {

class LevelwiseExactLearner final : public TreeLearner {
public:
    Variant variant() const override { return Variant::levelwise_exact; }
    void prepare(const Matrix& X, std::span<const double> y, std::span<const std::size_t> categorical_slots,
                 const BoostConfig& cfg) override;
    const Matrix& design() const override { return design_; }
    FeatureTransform transform() const override { return {}; }
    DecisionTree grow(const GradHess& gh, std::span<const std::size_t> rows, std::span<const std::size_t> features,
                      const BoostConfig& cfg, std::mt19937_64& rng) override;

private:
    Matrix design_;
};

struct LeafwiseOptions {
    std::size_t max_leaves = 31;
    std::size_t min_samples_leaf = 20;
    double min_child_weight = 1e-3;
    std::size_t max_bins = kDefaultMaxBins;
    double goss_top = 0.2;
    double goss_other = 0.6;
    bool bundle_features = true;
};

class LeafwiseHistogramLearner final : public TreeLearner {
public:
    explicit LeafwiseHistogramLearner(LeafwiseOptions opts = {}) : opts_(opts) {}

    Variant variant() const override { return Variant::leafwise_histogram; }
    void prepare(const Matrix& X, std::span<const double> y, std::span<const std::size_t> categorical_slots,
                 const BoostConfig& cfg) override;
    const Matrix& design() const override { return design_; }
    FeatureTransform transform() const override;
    bool samples_rows() const override { return true; }
    DecisionTree grow(const GradHess& gh, std::span<const std::size_t> rows, std::span<const std::size_t> features,
                      const BoostConfig& cfg, std::mt19937_64& rng) override;

    const LeafwiseOptions& options() const noexcept { return opts_; }

private:
    LeafwiseOptions opts_;
    Matrix design_;
    std::optional<BundleMap> bundles_;
};

struct ObliviousOptions {
    double prior = 0.5;
    double prior_strength = 1.0;
    PrefixSchedule schedule = PrefixSchedule::exponential;
};

// Tree structure comes from ordered residuals; leaf values from the plain
// gradients handed in by the boosting loop.
class ObliviousOrderedLearner final : public TreeLearner {
public:
    explicit ObliviousOrderedLearner(ObliviousOptions opts = {}) : opts_(opts) {}

    Variant variant() const override { return Variant::oblivious_ordered; }
    void prepare(const Matrix& X, std::span<const double> y, std::span<const std::size_t> categorical_slots,
                 const BoostConfig& cfg) override;
    const Matrix& design() const override { return design_; }
    FeatureTransform transform() const override { return encoding_; }
    DecisionTree grow(const GradHess& gh, std::span<const std::size_t> rows, std::span<const std::size_t> features,
                      const BoostConfig& cfg, std::mt19937_64& rng) override;

    const OrderedContext& context() const noexcept { return ctx_; }
    const OrderedPrefixModels& prefix_models() const { return *prefix_; }

private:
    ObliviousOptions opts_;
    OrderedContext ctx_;
    Matrix design_;
    CategoricalEncoding encoding_;
    std::unique_ptr<OrderedPrefixModels> prefix_;
};

// Per-variant hyperparameters used by the benchmark.
BoostConfig preset_config(Variant v);

struct LearnerOptions {
    LeafwiseOptions leafwise;
    ObliviousOptions oblivious;
};

std::unique_ptr<TreeLearner> make_learner(Variant v, const LearnerOptions& opts = {});

}  // namespace damf
