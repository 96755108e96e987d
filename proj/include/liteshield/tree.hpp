#pragma once

#include "liteshield/random.hpp"
#include "liteshield/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace liteshield {

struct TreeOptions {
    int max_depth = 32;
    int min_samples_split = 2;
    int max_features = -1;  // candidate features per split; >= d or < 1 means all
};

// CART classification tree with Gini impurity. Thresholds are held as float
// so a serialized tree predicts exactly like the trained one.
class DecisionTree {
public:
    struct Node {
        std::int32_t feature = -1;  // -1 marks a leaf
        float threshold = 0.0f;     // go left when x[feature] <= threshold
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::int32_t leaf = -1;     // index into leaf distributions
    };

    DecisionTree() = default;
    DecisionTree(int n_classes, std::vector<Node> nodes, std::vector<std::uint32_t> leaf_counts);

    // Grows a tree on the given sample (row indices, repeats allowed).
    // When importance is non-null, per-feature weighted Gini decrease is added to it.
    static DecisionTree grow(const Matrix& x, const Labels& y, int n_classes, std::vector<Eigen::Index> sample,
                             const TreeOptions& options, Rng& rng, std::vector<double>* importance = nullptr);

    template <typename Derived>
    int predict_row(const Eigen::MatrixBase<Derived>& row) const {
        std::int32_t at = 0;
        while (nodes_[static_cast<std::size_t>(at)].feature >= 0) {
            const Node& node = nodes_[static_cast<std::size_t>(at)];
            at = static_cast<double>(row(node.feature)) <= static_cast<double>(node.threshold) ? node.left : node.right;
        }
        return leaf_class_[static_cast<std::size_t>(nodes_[static_cast<std::size_t>(at)].leaf)];
    }

    int n_classes() const noexcept { return n_classes_; }
    int depth() const;
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    // n_leaves × n_classes training counts, row-major.
    const std::vector<std::uint32_t>& leaf_counts() const noexcept { return leaf_counts_; }
    std::size_t accounted_bytes() const noexcept;

private:
    int n_classes_ = 0;
    std::vector<Node> nodes_;
    std::vector<std::uint32_t> leaf_counts_;
    std::vector<int> leaf_class_;  // argmax of each leaf, ties to lower class
};

struct ForestOptions {
    int trees = 100;
    TreeOptions tree{32, 2, 0};
    bool bootstrap = true;
};

class RandomForest {
public:
    RandomForest() = default;
    RandomForest(std::vector<DecisionTree> trees, std::vector<std::uint64_t> seeds);

    // Tree t draws its bootstrap sample and feature bags from derive_seed(seed, t).
    // Trees are grown concurrently; the result does not depend on scheduling.
    // When importance is non-null it receives per-tree-normalised Gini
    // importances averaged over trees (length d).
    static RandomForest grow(const Matrix& x, const Labels& y, int n_classes, const ForestOptions& options,
                             std::uint64_t seed, std::vector<double>* importance = nullptr);

    template <typename Derived>
    int predict_row(const Eigen::MatrixBase<Derived>& row, std::vector<int>& votes) const {
        std::fill(votes.begin(), votes.end(), 0);
        for (const auto& tree : trees_) ++votes[static_cast<std::size_t>(tree.predict_row(row))];
        int best = 0;
        for (std::size_t c = 1; c < votes.size(); ++c) {
            if (votes[c] > votes[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
        }
        return best;
    }

    const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
    const std::vector<std::uint64_t>& seeds() const noexcept { return seeds_; }
    std::size_t accounted_bytes() const noexcept;

private:
    std::vector<DecisionTree> trees_;
    std::vector<std::uint64_t> seeds_;
};

// floor(sqrt(d)) clamped to [1, d].
int sqrt_features(Eigen::Index d);

}  // namespace liteshield
