#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "damf/boosting.hpp"

namespace damf {

struct GossSample {
    std::vector<std::size_t> rows;  // ascending
    std::vector<double> weights;    // parallel to rows
};

// Keeps the floor(a*n) rows with the largest |g| at weight 1, then draws
// floor(b*n) of the remaining rows uniformly without replacement at weight (1-a)/b.
// Equal |g| keep the lower row index first. Throws InvalidArgument for a or b
// outside [0, 1] or a + b > 1, and EmptySample when nothing would be kept.
GossSample goss_sample(const GradHess& gh, double a, double b, std::mt19937_64& rng);
GossSample goss_sample(const GradHess& gh, double a, double b, std::uint64_t seed);

// Copy of gh with g and h of every sampled row multiplied by its weight.
GradHess apply_goss_weights(const GradHess& gh, const GossSample& sample);

}  // namespace damf
