#include "damf/goss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "damf/error.hpp"

namespace damf {

GossSample goss_sample(const GradHess& gh, double a, double b, std::mt19937_64& rng) {
    if (!(a >= 0.0 && a <= 1.0) || !(b >= 0.0 && b <= 1.0) || a + b > 1.0 + 1e-12) {
        throw Error(ErrorCode::InvalidArgument, "GOSS fractions must satisfy 0 <= a, b and a + b <= 1");
    }
    const std::size_t n = gh.size();
    const double nd = static_cast<double>(n);
    const auto top = static_cast<std::size_t>(std::floor(a * nd + 1e-9));
    const auto other = std::min(static_cast<std::size_t>(std::floor(b * nd + 1e-9)), n - top);
    if (top + other == 0) {
        throw Error(ErrorCode::EmptySample, "GOSS keeps no rows (n=" + std::to_string(n) + ")");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return std::abs(gh.g[x]) > std::abs(gh.g[y]); });

    std::vector<std::pair<std::size_t, double>> kept;
    kept.reserve(top + other);
    for (std::size_t i = 0; i < top; ++i) {
        kept.emplace_back(order[i], 1.0);
    }
    const double w = b > 0.0 ? (1.0 - a) / b : 1.0;
    std::vector<std::size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(top), order.end());
    for (std::size_t i = 0; i < other; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, rest.size() - 1);
        std::swap(rest[i], rest[pick(rng)]);
        kept.emplace_back(rest[i], w);
    }
    std::sort(kept.begin(), kept.end());

    GossSample s;
    s.rows.reserve(kept.size());
    s.weights.reserve(kept.size());
    for (const auto& [row, weight] : kept) {
        s.rows.push_back(row);
        s.weights.push_back(weight);
    }
    return s;
}

GossSample goss_sample(const GradHess& gh, double a, double b, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return goss_sample(gh, a, b, rng);
}

GradHess apply_goss_weights(const GradHess& gh, const GossSample& sample) {
    GradHess out = gh;
    for (std::size_t i = 0; i < sample.rows.size(); ++i) {
        out.g[sample.rows[i]] *= sample.weights[i];
        out.h[sample.rows[i]] *= sample.weights[i];
    }
    return out;
}

}  // namespace damf
