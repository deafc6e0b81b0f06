#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "damf/feature_transform.hpp"
#include "damf/matrix.hpp"

namespace damf {

struct BundledFeatures {
    Matrix X;
    BundleMap map;
};

// Greedy exclusive feature bundling. Features are visited by nonzero count
// (descending, then index) and join the first bundle whose rows they do not
// share a nonzero with; a single conflict keeps them apart.
BundledFeatures bundle_exclusive_features(const Matrix& X);

// A split `bundled[bundle] <= threshold` restated over raw rows.
struct UnbundledSplit {
    std::vector<std::size_t> sources;  // bundle members in encoding order
    bool zero_left = true;             // rows where every member is zero
    std::vector<std::size_t> left_sources;  // members whose nonzero rows all go left
    std::optional<std::size_t> partial;     // member cut inside its own range
    double partial_offset = 0.0;
    double partial_min = 0.0;
    double partial_max = 0.0;
    double threshold = 0.0;
    // Raw threshold on the partial member (or the singleton's source).
    double raw_threshold = 0.0;

    bool goes_left(std::span<const double> raw_row) const;
};

UnbundledSplit unbundle_split(const BundleMap& map, std::size_t bundle, double threshold);

}  // namespace damf
