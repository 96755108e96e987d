#include "liteshield/tree.hpp"

#include "liteshield/error.hpp"
#include "liteshield/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace liteshield {

namespace {

struct Pending {
    std::size_t begin;
    std::size_t end;
    int depth;
    std::int32_t node;
};

struct Split {
    int feature = -1;
    float threshold = 0.0f;
    double impurity = 0.0;  // n_left*gini_left + n_right*gini_right
};

// Sum over classes of count^2.
double sum_squares(std::span<const std::uint32_t> counts) {
    double s = 0.0;
    for (auto c : counts) s += static_cast<double>(c) * static_cast<double>(c);
    return s;
}

}  // namespace

DecisionTree::DecisionTree(int n_classes, std::vector<Node> nodes, std::vector<std::uint32_t> leaf_counts)
    : n_classes_(n_classes), nodes_(std::move(nodes)), leaf_counts_(std::move(leaf_counts)) {
    if (n_classes_ < 1 || nodes_.empty()) throw DataError("tree needs at least one node and one class");
    const std::size_t k = static_cast<std::size_t>(n_classes_);
    if (leaf_counts_.size() % k != 0) throw DataError("tree leaf counts are not a multiple of the class count");
    const std::size_t leaves = leaf_counts_.size() / k;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        const auto count = static_cast<std::int32_t>(nodes_.size());
        if (n.feature < 0) {
            if (n.leaf < 0 || static_cast<std::size_t>(n.leaf) >= leaves) throw DataError("tree leaf index out of range");
        } else if (n.left <= static_cast<std::int32_t>(i) || n.right <= static_cast<std::int32_t>(i) ||
                   n.left >= count || n.right >= count) {
            // Children always follow their parent, which also rules out cycles.
            throw DataError("tree child index out of range");
        }
    }
    leaf_class_.resize(leaves);
    for (std::size_t l = 0; l < leaves; ++l) {
        const auto* row = leaf_counts_.data() + l * k;
        leaf_class_[l] = static_cast<int>(std::max_element(row, row + k) - row);
    }
}

DecisionTree DecisionTree::grow(const Matrix& x, const Labels& y, int n_classes, std::vector<Eigen::Index> sample,
                                const TreeOptions& options, Rng& rng, std::vector<double>* importance) {
    if (sample.empty()) throw DataError("cannot grow a tree on an empty sample");
    const auto d = static_cast<int>(x.cols());
    const int bag = (options.max_features < 1 || options.max_features >= d) ? d : options.max_features;
    const std::size_t k = static_cast<std::size_t>(n_classes);

    std::vector<Node> nodes(1);
    std::vector<std::uint32_t> leaf_counts;
    std::vector<Pending> stack{{0, sample.size(), 0, 0}};

    std::vector<int> feature_pool(static_cast<std::size_t>(d));
    std::vector<int> candidates;
    std::vector<std::pair<double, int>> column;
    std::vector<std::uint32_t> counts(k), left_counts(k);

    while (!stack.empty()) {
        const Pending job = stack.back();
        stack.pop_back();
        const std::size_t n = job.end - job.begin;

        std::fill(counts.begin(), counts.end(), 0u);
        for (std::size_t i = job.begin; i < job.end; ++i) ++counts[static_cast<std::size_t>(y(sample[i]))];
        const bool pure = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }) <= 1;

        auto make_leaf = [&] {
            Node& node = nodes[static_cast<std::size_t>(job.node)];
            node.feature = -1;
            node.leaf = static_cast<std::int32_t>(leaf_counts.size() / k);
            leaf_counts.insert(leaf_counts.end(), counts.begin(), counts.end());
        };
        if (pure || job.depth >= options.max_depth || n < static_cast<std::size_t>(std::max(2, options.min_samples_split))) {
            make_leaf();
            continue;
        }

        candidates.clear();
        if (bag == d) {
            for (int f = 0; f < d; ++f) candidates.push_back(f);
        } else {
            std::iota(feature_pool.begin(), feature_pool.end(), 0);
            for (int i = 0; i < bag; ++i) {
                const auto j = static_cast<std::size_t>(i) + uniform_index(rng, static_cast<std::uint64_t>(d - i));
                std::swap(feature_pool[static_cast<std::size_t>(i)], feature_pool[j]);
                candidates.push_back(feature_pool[static_cast<std::size_t>(i)]);
            }
            std::sort(candidates.begin(), candidates.end());
        }

        const double total = static_cast<double>(n);
        const double parent_impurity = total - sum_squares(counts) / total;
        Split best;
        best.impurity = std::numeric_limits<double>::infinity();
        for (int f : candidates) {
            column.clear();
            for (std::size_t i = job.begin; i < job.end; ++i) column.emplace_back(x(sample[i], f), y(sample[i]));
            std::sort(column.begin(), column.end());
            if (column.front().first == column.back().first) continue;

            std::fill(left_counts.begin(), left_counts.end(), 0u);
            double left_sq = 0.0;
            double right_sq = sum_squares(counts);
            for (std::size_t i = 0; i + 1 < n; ++i) {
                const auto c = static_cast<std::size_t>(column[i].second);
                const double lc = left_counts[c];
                const double rc = static_cast<double>(counts[c]) - lc;
                left_sq += 2.0 * lc + 1.0;
                right_sq -= 2.0 * rc - 1.0;
                ++left_counts[c];
                const double lo = column[i].first;
                const double hi = column[i + 1].first;
                if (lo == hi) continue;
                const double nl = static_cast<double>(i + 1);
                const double nr = total - nl;
                const double impurity = (nl - left_sq / nl) + (nr - right_sq / nr);
                if (!(impurity < best.impurity)) continue;
                const auto threshold = static_cast<float>(lo + (hi - lo) / 2.0);
                // The float threshold must still separate lo from hi.
                if (!(static_cast<double>(threshold) >= lo && static_cast<double>(threshold) < hi)) continue;
                best = {f, threshold, impurity};
            }
        }
        if (best.feature < 0) {
            make_leaf();
            continue;
        }

        const auto mid_it = std::stable_partition(
            sample.begin() + static_cast<std::ptrdiff_t>(job.begin), sample.begin() + static_cast<std::ptrdiff_t>(job.end),
            [&](Eigen::Index r) { return x(r, best.feature) <= static_cast<double>(best.threshold); });
        const auto mid = static_cast<std::size_t>(mid_it - sample.begin());
        if (importance) (*importance)[static_cast<std::size_t>(best.feature)] += parent_impurity - best.impurity;

        const auto left = static_cast<std::int32_t>(nodes.size());
        const auto right = left + 1;
        nodes.resize(nodes.size() + 2);
        Node& node = nodes[static_cast<std::size_t>(job.node)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = left;
        node.right = right;
        // Right pushed first so the left subtree is expanded first.
        stack.push_back({mid, job.end, job.depth + 1, right});
        stack.push_back({job.begin, mid, job.depth + 1, left});
    }
    return DecisionTree(n_classes, std::move(nodes), std::move(leaf_counts));
}

int DecisionTree::depth() const {
    std::vector<int> depth(nodes_.size(), 0);
    int deepest = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        deepest = std::max(deepest, depth[i]);
        if (nodes_[i].feature >= 0) {
            depth[static_cast<std::size_t>(nodes_[i].left)] = depth[i] + 1;
            depth[static_cast<std::size_t>(nodes_[i].right)] = depth[i] + 1;
        }
    }
    return deepest;
}

std::size_t DecisionTree::accounted_bytes() const noexcept {
    return nodes_.size() * sizeof(Node) + leaf_counts_.size() * sizeof(std::uint32_t) + leaf_class_.size() * sizeof(int);
}

RandomForest::RandomForest(std::vector<DecisionTree> trees, std::vector<std::uint64_t> seeds)
    : trees_(std::move(trees)), seeds_(std::move(seeds)) {
    if (trees_.empty()) throw DataError("forest needs at least one tree");
    if (seeds_.size() != trees_.size()) throw DataError("forest seed count does not match tree count");
}

RandomForest RandomForest::grow(const Matrix& x, const Labels& y, int n_classes, const ForestOptions& options,
                                std::uint64_t seed, std::vector<double>* importance) {
    const auto n = static_cast<std::size_t>(x.rows());
    const auto d = static_cast<std::size_t>(x.cols());
    const auto count = static_cast<std::size_t>(options.trees);
    std::vector<DecisionTree> trees(count);
    std::vector<std::uint64_t> seeds(count);
    std::vector<std::vector<double>> per_tree(importance ? count : 0, std::vector<double>(d, 0.0));

    parallel_for(count, [&](std::size_t t) {
        seeds[t] = derive_seed(seed, t);
        Rng rng(seeds[t]);
        std::vector<Eigen::Index> sample(n);
        if (options.bootstrap) {
            for (auto& s : sample) s = static_cast<Eigen::Index>(uniform_index(rng, n));
        } else {
            std::iota(sample.begin(), sample.end(), Eigen::Index{0});
        }
        trees[t] = DecisionTree::grow(x, y, n_classes, std::move(sample), options.tree, rng,
                                      importance ? &per_tree[t] : nullptr);
    });

    if (importance) {
        importance->assign(d, 0.0);
        for (const auto& imp : per_tree) {
            const double sum = std::accumulate(imp.begin(), imp.end(), 0.0);
            if (sum <= 0.0) continue;
            for (std::size_t f = 0; f < d; ++f) (*importance)[f] += imp[f] / sum;
        }
        for (auto& v : *importance) v /= static_cast<double>(count);
    }
    return RandomForest(std::move(trees), std::move(seeds));
}

std::size_t RandomForest::accounted_bytes() const noexcept {
    std::size_t bytes = seeds_.size() * sizeof(std::uint64_t);
    for (const auto& t : trees_) bytes += t.accounted_bytes();
    return bytes;
}

int sqrt_features(Eigen::Index d) {
    const auto root = static_cast<int>(std::floor(std::sqrt(static_cast<double>(d))));
    return std::clamp(root, 1, static_cast<int>(std::max<Eigen::Index>(d, 1)));
}

}  // namespace liteshield
