#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <variant>
#include <vector>

#include "damf/matrix.hpp"

namespace damf {

// Exclusive-feature bundle layout. Each output column is a bundle of source
// features whose nonzero supports never overlap. A singleton bundle passes
// its feature through unchanged; in a multi-member bundle, member k's nonzero
// values are clamped to its training range [min, max] and shifted to
// offset + (v - min), with offsets chosen so ranges are disjoint and >= 1.
// A row where every member is zero encodes as 0.
struct BundleMap {
    struct Member {
        std::size_t source = 0;
        double offset = 0.0;
        double min_value = 0.0;
        double max_value = 0.0;

        friend bool operator==(const Member&, const Member&) = default;
    };
    struct Bundle {
        std::vector<Member> members;

        bool singleton() const noexcept { return members.size() == 1; }
        friend bool operator==(const Bundle&, const Bundle&) = default;
    };

    std::size_t source_count = 0;
    std::vector<Bundle> bundles;

    std::size_t bundled_count() const noexcept { return bundles.size(); }
    double encode(std::size_t bundle, std::span<const double> raw_row) const;
    void apply_row(std::span<const double> raw_row, std::span<double> out) const;
    Matrix apply(const Matrix& raw) const;

    friend bool operator==(const BundleMap&, const BundleMap&) = default;
};

// Target statistics of categorical slots over the full training set, used to
// encode rows at prediction time: (sum + a*p) / (count + a); unseen -> p.
struct CategoricalEncoding {
    struct Slot {
        std::size_t column = 0;
        std::map<double, std::pair<double, double>> stats;  // category -> (target sum, count)

        friend bool operator==(const Slot&, const Slot&) = default;
    };
    double prior = 0.0;
    double prior_strength = 1.0;
    std::vector<Slot> slots;

    double encode(const Slot& slot, double category) const;
    void apply_row(std::span<const double> raw_row, std::span<double> out) const;
    Matrix apply(const Matrix& raw) const;

    friend bool operator==(const CategoricalEncoding&, const CategoricalEncoding&) = default;
};

using FeatureTransform = std::variant<std::monostate, BundleMap, CategoricalEncoding>;

std::size_t transformed_width(const FeatureTransform& t, std::size_t raw_width);
void transform_row(const FeatureTransform& t, std::span<const double> raw_row, std::span<double> out);
Matrix transform_matrix(const FeatureTransform& t, const Matrix& raw);

}  // namespace damf
