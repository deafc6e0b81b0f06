#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "damf/boosting.hpp"
#include "damf/matrix.hpp"
#include "damf/tree.hpp"

namespace damf {

struct GrowParams {
    double lambda = 1.0;
    double gamma = 0.0;
    int max_depth = 6;
    double min_child_weight = 0.0;    // minimum hessian sum on each side of a split
    std::size_t min_samples_leaf = 1;  // minimum row count on each side of a split
    std::size_t max_leaves = 0;        // leaf-wise budget; 0 = unbounded

    static GrowParams from(const BoostConfig& cfg);
};

struct SplitCandidate {
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = 0.0;  // before the gamma penalty
    double g_left = 0.0;
    double g_right = 0.0;
    double h_left = 0.0;
    double h_right = 0.0;
    std::size_t n_left = 0;
    std::size_t n_right = 0;

    double net_gain(double gamma) const noexcept { return gain - gamma; }
};

// Loss reduction of splitting (G, H) into (gl, hl) | (gr, hr):
// gl^2/(hl+l) + gr^2/(hr+l) - (gl+gr)^2/(hl+hr+l).
double split_gain(double gl, double hl, double gr, double hr, double lambda) noexcept;
// One score term g^2/(h+lambda); zero when the denominator vanishes.
double score_term(double g, double h, double lambda) noexcept;
// Newton leaf value -G/(H+lambda); zero for an empty leaf.
double leaf_weight(double g, double h, double lambda) noexcept;
// Threshold t with lo <= t < hi, normally the midpoint.
double midpoint_threshold(double lo, double hi) noexcept;

struct NodeTotals {
    double g = 0.0;
    double h = 0.0;
};
NodeTotals sum_rows(const GradHess& gh, std::span<const std::size_t> rows) noexcept;

// Enumerates midpoints between consecutive distinct values of every listed
// feature (features must be ascending). Returns the candidate maximizing
// gain - gamma; ties go to the lowest feature, then the lowest threshold.
// nullopt when no candidate has positive net gain.
std::optional<SplitCandidate> exact_best_split(const Matrix& X, std::span<const std::size_t> rows,
                                               std::span<const std::size_t> features, const GradHess& gh,
                                               const GrowParams& params);

// Breadth-first growth: every frontier node is split at each depth.
DecisionTree build_tree_levelwise(const Matrix& X, std::span<const std::size_t> rows,
                                  std::span<const std::size_t> features, const GradHess& gh,
                                  const GrowParams& params);

// Sets every leaf of `tree` to -G/(H+lambda) over the rows reaching it.
void assign_leaf_weights(DecisionTree& tree, const Matrix& X, std::span<const std::size_t> rows, const GradHess& gh,
                         double lambda);

}  // namespace damf
