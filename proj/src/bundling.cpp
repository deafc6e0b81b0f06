#include "damf/bundling.hpp"

#include <algorithm>
#include <numeric>

namespace damf {

BundledFeatures bundle_exclusive_features(const Matrix& X) {
    const std::size_t n = X.rows();
    const std::size_t f_count = X.cols();
    std::vector<std::vector<std::size_t>> support(f_count);
    for (std::size_t f = 0; f < f_count; ++f) {
        for (std::size_t r = 0; r < n; ++r) {
            if (X(r, f) != 0.0) {
                support[f].push_back(r);
            }
        }
    }
    std::vector<std::size_t> order(f_count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return support[a].size() > support[b].size(); });

    std::vector<std::vector<std::size_t>> groups;
    std::vector<std::vector<char>> used;  // per group: row has a nonzero
    for (std::size_t f : order) {
        bool placed = false;
        for (std::size_t g = 0; g < groups.size() && !placed; ++g) {
            const bool conflict =
                std::any_of(support[f].begin(), support[f].end(), [&](std::size_t r) { return used[g][r] != 0; });
            if (!conflict) {
                groups[g].push_back(f);
                for (std::size_t r : support[f]) {
                    used[g][r] = 1;
                }
                placed = true;
            }
        }
        if (!placed) {
            groups.push_back({f});
            used.emplace_back(n, 0);
            for (std::size_t r : support[f]) {
                used.back()[r] = 1;
            }
        }
    }
    for (auto& g : groups) {
        std::sort(g.begin(), g.end());
    }
    std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });

    BundledFeatures out;
    out.map.source_count = f_count;
    for (const auto& g : groups) {
        BundleMap::Bundle bundle;
        double offset = 1.0;
        for (std::size_t f : g) {
            BundleMap::Member m;
            m.source = f;
            if (!support[f].empty()) {
                m.min_value = X(support[f].front(), f);
                m.max_value = m.min_value;
                for (std::size_t r : support[f]) {
                    m.min_value = std::min(m.min_value, X(r, f));
                    m.max_value = std::max(m.max_value, X(r, f));
                }
            }
            m.offset = offset;
            offset += (m.max_value - m.min_value) + 1.0;
            bundle.members.push_back(m);
        }
        out.map.bundles.push_back(std::move(bundle));
    }
    out.X = out.map.apply(X);
    return out;
}

UnbundledSplit unbundle_split(const BundleMap& map, std::size_t bundle, double threshold) {
    const BundleMap::Bundle& b = map.bundles[bundle];
    UnbundledSplit s;
    s.threshold = threshold;
    for (const auto& m : b.members) {
        s.sources.push_back(m.source);
    }
    if (b.singleton()) {
        s.partial = b.members.front().source;
        s.raw_threshold = threshold;
        s.zero_left = 0.0 <= threshold;
        return s;
    }
    s.zero_left = 0.0 <= threshold;
    for (const auto& m : b.members) {
        const double top = m.offset + (m.max_value - m.min_value);
        if (top <= threshold) {
            s.left_sources.push_back(m.source);
        } else if (m.offset <= threshold && !s.partial) {
            s.partial = m.source;
            s.partial_offset = m.offset;
            s.partial_min = m.min_value;
            s.partial_max = m.max_value;
            s.raw_threshold = m.min_value + (threshold - m.offset);
        }
    }
    return s;
}

bool UnbundledSplit::goes_left(std::span<const double> raw_row) const {
    if (sources.size() == 1) {
        return raw_row[sources.front()] <= threshold;
    }
    for (std::size_t src : sources) {
        const double v = raw_row[src];
        if (v == 0.0) {
            continue;
        }
        if (std::find(left_sources.begin(), left_sources.end(), src) != left_sources.end()) {
            return true;
        }
        if (partial && *partial == src) {
            return partial_offset + (std::clamp(v, partial_min, partial_max) - partial_min) <= threshold;
        }
        return false;
    }
    return zero_left;
}

}  // namespace damf
