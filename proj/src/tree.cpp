#include "damf/tree.hpp"

#include <algorithm>

namespace damf {

std::pair<std::size_t, std::size_t> DecisionTree::split(std::size_t node, std::size_t feature, double threshold) {
    const auto left = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    nodes_.emplace_back();
    TreeNode& n = nodes_[node];
    n.feature = static_cast<std::int32_t>(feature);
    n.threshold = threshold;
    n.left = left;
    n.right = left + 1;
    n.weight = 0.0;
    return {static_cast<std::size_t>(left), static_cast<std::size_t>(left + 1)};
}

std::size_t DecisionTree::leaf_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::vector<int> DecisionTree::node_depths() const {
    std::vector<int> depth(nodes_.size(), 0);
    // Children always have larger indices than their parent.
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!nodes_[i].is_leaf()) {
            depth[static_cast<std::size_t>(nodes_[i].left)] = depth[i] + 1;
            depth[static_cast<std::size_t>(nodes_[i].right)] = depth[i] + 1;
        }
    }
    return depth;
}

int DecisionTree::depth() const noexcept {
    const auto d = node_depths();
    return d.empty() ? 0 : *std::max_element(d.begin(), d.end());
}

}  // namespace damf
