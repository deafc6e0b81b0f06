#include "damf/feature_transform.hpp"

#include <algorithm>

namespace damf {

double BundleMap::encode(std::size_t bundle, std::span<const double> raw_row) const {
    const Bundle& b = bundles[bundle];
    if (b.singleton()) {
        return raw_row[b.members.front().source];
    }
    for (const Member& m : b.members) {
        const double v = raw_row[m.source];
        if (v != 0.0) {
            return m.offset + (std::clamp(v, m.min_value, m.max_value) - m.min_value);
        }
    }
    return 0.0;
}

void BundleMap::apply_row(std::span<const double> raw_row, std::span<double> out) const {
    for (std::size_t b = 0; b < bundles.size(); ++b) {
        out[b] = encode(b, raw_row);
    }
}

Matrix BundleMap::apply(const Matrix& raw) const {
    Matrix out(raw.rows(), bundles.size());
    for (std::size_t r = 0; r < raw.rows(); ++r) {
        apply_row(raw.row(r), out.row(r));
    }
    return out;
}

double CategoricalEncoding::encode(const Slot& slot, double category) const {
    const auto it = slot.stats.find(category);
    if (it == slot.stats.end()) {
        return prior;
    }
    return (it->second.first + prior_strength * prior) / (it->second.second + prior_strength);
}

void CategoricalEncoding::apply_row(std::span<const double> raw_row, std::span<double> out) const {
    std::copy(raw_row.begin(), raw_row.end(), out.begin());
    for (const Slot& s : slots) {
        out[s.column] = encode(s, raw_row[s.column]);
    }
}

Matrix CategoricalEncoding::apply(const Matrix& raw) const {
    Matrix out(raw.rows(), raw.cols());
    for (std::size_t r = 0; r < raw.rows(); ++r) {
        apply_row(raw.row(r), out.row(r));
    }
    return out;
}

std::size_t transformed_width(const FeatureTransform& t, std::size_t raw_width) {
    if (const auto* b = std::get_if<BundleMap>(&t)) {
        return b->bundled_count();
    }
    return raw_width;
}

void transform_row(const FeatureTransform& t, std::span<const double> raw_row, std::span<double> out) {
    if (const auto* b = std::get_if<BundleMap>(&t)) {
        b->apply_row(raw_row, out);
    } else if (const auto* c = std::get_if<CategoricalEncoding>(&t)) {
        c->apply_row(raw_row, out);
    } else {
        std::copy(raw_row.begin(), raw_row.end(), out.begin());
    }
}

Matrix transform_matrix(const FeatureTransform& t, const Matrix& raw) {
    if (const auto* b = std::get_if<BundleMap>(&t)) {
        return b->apply(raw);
    }
    if (const auto* c = std::get_if<CategoricalEncoding>(&t)) {
        return c->apply(raw);
    }
    return raw;
}

}  // namespace damf
