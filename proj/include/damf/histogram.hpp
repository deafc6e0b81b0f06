#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "damf/boosting.hpp"
#include "damf/matrix.hpp"
#include "damf/split.hpp"
#include "damf/tree.hpp"

namespace damf {

inline constexpr std::size_t kDefaultMaxBins = 255;

// Upper bin edges for one feature: bin b holds values v with
// edges[b-1] < v <= edges[b]; the last bin is unbounded above.
struct FeatureBins {
    std::vector<double> edges;

    std::size_t bin_count() const noexcept { return edges.size() + 1; }
    std::size_t bin_of(double v) const noexcept;
};

// Quantile edges from the given rows. When the rows carry no more distinct
// values than max_bins, every distinct value gets its own bin.
FeatureBins make_feature_bins(const Matrix& X, std::size_t feature, std::span<const std::size_t> rows,
                              std::size_t max_bins);

// Bin edges for every column plus the bin code of every row, computed once at
// the root of a tree and kept for all of its nodes.
struct HistogramLayout {
    std::vector<FeatureBins> bins;
    std::vector<std::uint32_t> codes;  // row-major, rows x features
    std::size_t n_features = 0;

    std::uint32_t code(std::size_t row, std::size_t feature) const noexcept { return codes[row * n_features + feature]; }
};

HistogramLayout make_histogram_layout(const Matrix& X, std::span<const std::size_t> root_rows, std::size_t max_bins);

struct FeatureHistogram {
    std::vector<double> g;
    std::vector<double> h;
    std::vector<std::size_t> count;

    friend bool operator==(const FeatureHistogram&, const FeatureHistogram&) = default;
};

// One histogram per column of the layout; columns not in `features` stay empty.
std::vector<FeatureHistogram> build_histograms(const HistogramLayout& layout, std::span<const std::size_t> rows,
                                               std::span<const std::size_t> features, const GradHess& gh);

// parent - child, bin by bin.
std::vector<FeatureHistogram> subtract_histograms(const std::vector<FeatureHistogram>& parent,
                                                  const std::vector<FeatureHistogram>& child);

// Cumulative sweep over bin boundaries. `total` holds the node's G and H; the
// right side is total - left. Only boundaries directly after a non-empty bin
// are candidates. Same tie rule as exact_best_split.
std::optional<SplitCandidate> best_split_histogram(const HistogramLayout& layout,
                                                   const std::vector<FeatureHistogram>& hist,
                                                   std::span<const std::size_t> features, NodeTotals total,
                                                   std::size_t node_rows, const GrowParams& params);

// Leaf-wise growth: repeatedly split the leaf with the largest net gain,
// ties to the earliest-created leaf, until params.max_leaves leaves exist,
// params.max_depth is reached, or no split has positive net gain.
DecisionTree build_tree_leafwise(const Matrix& X, const HistogramLayout& layout, std::span<const std::size_t> rows,
                                 std::span<const std::size_t> features, const GradHess& gh, const GrowParams& params);

}  // namespace damf
