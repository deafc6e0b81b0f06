#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "damf/boosting.hpp"
#include "damf/feature_transform.hpp"
#include "damf/matrix.hpp"
#include "damf/split.hpp"
#include "damf/tree.hpp"

namespace damf {

enum class PrefixSchedule { exponential, stride1 };

struct OrderedContext {
    std::vector<std::size_t> perm;      // perm[position] = row
    std::vector<std::size_t> position;  // position[row]
    double prior = 0.5;
    double prior_strength = 1.0;
    // Prefix lengths with a materialized model, ascending, always starting at 0.
    std::vector<std::size_t> schedule;

    std::size_t size() const noexcept { return perm.size(); }
    // Index into `schedule` of the longest prefix not exceeding `pos`.
    std::size_t prefix_slot(std::size_t pos) const;

    // exponential: prefixes 0, 1, 2, 4, ... < n. stride1: 0, 1, ..., n-1.
    static OrderedContext make(std::size_t n, std::uint64_t seed, PrefixSchedule schedule, double prior = 0.5,
                               double prior_strength = 1.0);
};

// (sum of same-category targets earlier in the permutation + a*p) / (count + a).
std::vector<double> ordered_target_encode(std::span<const double> values, std::span<const double> y,
                                          const OrderedContext& ctx);
// X with every categorical slot replaced by its ordered encoding.
Matrix ordered_encode_matrix(const Matrix& X, std::span<const double> y, std::span<const std::size_t> slots,
                             const OrderedContext& ctx);
// Statistics over all rows, for encoding unseen data.
CategoricalEncoding full_target_encoding(const Matrix& X, std::span<const double> y,
                                         std::span<const std::size_t> slots, double prior, double prior_strength);

// Oblivious tree layout: one (feature, threshold) per level.
struct ObliviousLevel {
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = 0.0;  // summed over the level's nodes, before gamma

    friend bool operator==(const ObliviousLevel&, const ObliviousLevel&) = default;
};

// Greedy level-by-level search. Each level picks the condition with the largest
// summed gain over all current nodes (ties: lowest feature, then threshold) and
// stops when that sum minus gamma per node is not positive.
std::vector<ObliviousLevel> find_oblivious_structure(const Matrix& X, std::span<const std::size_t> rows,
                                                     std::span<const std::size_t> features, const GradHess& gh,
                                                     const GrowParams& params);
// Complete binary tree with 2^levels leaves, all weights zero.
DecisionTree make_oblivious_tree(std::span<const ObliviousLevel> levels);
DecisionTree build_tree_oblivious(const Matrix& X, std::span<const std::size_t> rows,
                                  std::span<const std::size_t> features, const GradHess& gh, const GrowParams& params);

// Boosted models over permutation prefixes. The model for prefix j sees only
// rows at positions < j: it starts from their mean target (the prior when the
// prefix is empty) and grows its own oblivious trees on them. The row at
// position p is scored by the model of the longest scheduled prefix <= p.
class OrderedPrefixModels {
public:
    OrderedPrefixModels(const Matrix& design, std::span<const double> y, const OrderedContext& ctx, LossKind loss,
                        double learning_rate, const GrowParams& params);

    // Per row: prediction of the prefix model that scores it.
    std::vector<double> ordered_predictions() const;
    GradHess ordered_residuals() const;
    // Adds one tree to every prefix model.
    void advance();

private:
    struct Prefix {
        std::size_t length = 0;
        std::size_t reach = 0;     // positions [0, reach) carry predictions
        std::vector<double> pred;  // by row; meaningful for rows at positions < reach
    };

    const Matrix& design_;
    std::vector<double> y_;
    const OrderedContext& ctx_;
    LossKind loss_;
    double learning_rate_;
    GrowParams params_;
    std::vector<std::size_t> all_features_;
    std::vector<Prefix> prefixes_;
};

}  // namespace damf
