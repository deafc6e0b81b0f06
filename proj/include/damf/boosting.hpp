#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "damf/dataset.hpp"
#include "damf/feature_transform.hpp"
#include "damf/matrix.hpp"
#include "damf/tree.hpp"

namespace damf {

enum class LossKind { squared, absolute, rmse_objective };

// Hessian floor for losses whose second derivative vanishes (absolute error).
inline constexpr double kHessianFloor = 1.0;

struct GradHess {
    std::vector<double> g;
    std::vector<double> h;

    std::size_t size() const noexcept { return g.size(); }
};

GradHess compute_grad_hess(LossKind loss, std::span<const double> y, std::span<const double> y_hat);
double loss_value(LossKind loss, double y, double y_hat);

enum class Variant { levelwise_exact, leafwise_histogram, oblivious_ordered };

std::string_view to_string(Variant v) noexcept;
bool parse_variant(std::string_view text, Variant& out);
std::string_view to_string(LossKind k) noexcept;
bool parse_loss(std::string_view text, LossKind& out);

struct BoostConfig {
    double learning_rate = 0.01;
    int n_trees = 300;
    LossKind loss = LossKind::squared;
    double lambda = 1.0;
    double gamma = 0.0;
    int max_depth = 10;
    double subsample = 0.8;
    double colsample_bytree = 0.9;
    std::uint64_t seed = 42;
    double min_child_weight = 1.0;  // minimum hessian sum per child

    void validate() const;  // throws InvalidArgument
};

// Additive model: prediction = base_score + learning_rate * sum of tree outputs.
// Trees split on transform(x) rather than on x directly.
struct Ensemble {
    Variant variant = Variant::levelwise_exact;
    double base_score = 0.0;
    double learning_rate = 1.0;
    std::size_t n_features = 0;  // raw input width
    FeatureTransform transform;
    std::vector<DecisionTree> trees;

    double predict_row(std::span<const double> raw_row) const;
};

std::vector<double> ensemble_predict(const Ensemble& model, const Matrix& X);

// Tree-construction strategy plugged into the boosting loop.
class TreeLearner {
public:
    virtual ~TreeLearner() = default;

    virtual Variant variant() const = 0;
    // Called once per fit before the first tree.
    virtual void prepare(const Matrix& X, std::span<const double> y, std::span<const std::size_t> categorical_slots,
                         const BoostConfig& cfg) = 0;
    // Matrix the trees split on (X after the learner's transform).
    virtual const Matrix& design() const = 0;
    virtual FeatureTransform transform() const = 0;
    // True when the learner performs its own row sampling (the loop then hands it every row).
    virtual bool samples_rows() const { return false; }
    virtual DecisionTree grow(const GradHess& gh, std::span<const std::size_t> rows,
                              std::span<const std::size_t> features, const BoostConfig& cfg,
                              std::mt19937_64& rng) = 0;
};

struct BoostFit {
    Ensemble ensemble;
    // Predictions the loop holds for the training rows after the last tree.
    std::vector<double> train_predictions;
};

BoostFit boost_fit(const SupervisedDataset& train, TreeLearner& learner, const BoostConfig& cfg);

// Row subsample without replacement, sorted ascending; fraction 1 returns every row.
std::vector<std::size_t> sample_rows(std::size_t n, double fraction, std::mt19937_64& rng);
std::vector<std::size_t> sample_columns(std::size_t n, double fraction, std::mt19937_64& rng);

}  // namespace damf
