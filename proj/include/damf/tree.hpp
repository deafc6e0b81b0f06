#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace damf {

struct TreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;     // x[feature] <= threshold goes left
    std::int32_t left = -1;
    std::int32_t right = -1;
    double weight = 0.0;  // leaf output

    bool is_leaf() const noexcept { return feature < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

// Binary regression tree. nodes[0] is the root; children are appended in the
// order splits were made, so node indices record growth order.
class DecisionTree {
public:
    DecisionTree() : nodes_(1) {}
    explicit DecisionTree(double leaf_weight) : nodes_(1) { nodes_[0].weight = leaf_weight; }

    std::size_t leaf_index(std::span<const double> x) const {
        std::size_t i = 0;
        while (!nodes_[i].is_leaf()) {
            const TreeNode& n = nodes_[i];
            i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
        }
        return i;
    }
    double predict(std::span<const double> x) const { return nodes_[leaf_index(x)].weight; }

    // Turns leaf `node` into a split and returns the (left, right) child indices.
    std::pair<std::size_t, std::size_t> split(std::size_t node, std::size_t feature, double threshold);
    void set_weight(std::size_t node, double w) { nodes_[node].weight = w; }

    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    std::vector<TreeNode>& mutable_nodes() noexcept { return nodes_; }
    std::size_t leaf_count() const noexcept;
    int depth() const noexcept;
    // Depth of every node (root = 0).
    std::vector<int> node_depths() const;

    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

private:
    std::vector<TreeNode> nodes_;
};

}  // namespace damf
