#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "medestim/rng.hpp"

// Bagged CART regression trees: bootstrap resample per tree, ceil(sqrt(d))
// candidate features per split, variance (SSE) split criterion, leaf mean
// prediction. On 0/1 targets the variance criterion coincides with Gini, so
// the classifier is the same machinery with leaf-frequency outputs.

namespace medestim {

struct ForestParams {
    int n_trees = 100;
    int min_leaf = 5;
    int max_depth = -1; // < 0 means unbounded
};

namespace detail {

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

class RegressionTree {
public:
    void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<Eigen::Index> rows,
             const ForestParams& params, Rng& rng) {
        nodes_.clear();
        nodes_.reserve(rows.size());
        build(x, y, std::move(rows), params, rng, 0);
    }

    double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
        int node = 0;
        while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
            const TreeNode& nd = nodes_[static_cast<std::size_t>(node)];
            node = x(nd.feature) <= nd.threshold ? nd.left : nd.right;
        }
        return nodes_[static_cast<std::size_t>(node)].value;
    }

private:
    int build(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<Eigen::Index> rows,
              const ForestParams& params, Rng& rng, int depth) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();

        const auto n = static_cast<Eigen::Index>(rows.size());
        double sum = 0.0;
        for (Eigen::Index r : rows) sum += y(r);
        const double mean = sum / static_cast<double>(n);
        nodes_[static_cast<std::size_t>(id)].value = mean;

        const bool depth_ok = params.max_depth < 0 || depth < params.max_depth;
        if (!depth_ok || n < 2 * static_cast<Eigen::Index>(params.min_leaf)) return id;

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_gain = 1e-12; // require a strict SSE improvement
        const int d = static_cast<int>(x.cols());
        const int mtry = std::min(d, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d)))));
        const std::vector<int> features = sample_features(d, mtry, rng);

        std::vector<Eigen::Index> order(rows);
        for (int f : features) {
            std::sort(order.begin(), order.end(),
                      [&](Eigen::Index a, Eigen::Index b) { return x(a, f) < x(b, f); });
            double left_sum = 0.0;
            for (Eigen::Index i = 0; i + 1 < n; ++i) {
                left_sum += y(order[static_cast<std::size_t>(i)]);
                const Eigen::Index nl = i + 1, nr = n - nl;
                if (nl < params.min_leaf || nr < params.min_leaf) continue;
                const double xa = x(order[static_cast<std::size_t>(i)], f);
                const double xb = x(order[static_cast<std::size_t>(i + 1)], f);
                if (!(xa < xb)) continue;
                const double right_sum = sum - left_sum;
                // SSE reduction = sum_l^2/n_l + sum_r^2/n_r - sum^2/n
                const double gain = left_sum * left_sum / static_cast<double>(nl) +
                                    right_sum * right_sum / static_cast<double>(nr) -
                                    sum * sum / static_cast<double>(n);
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = f;
                    best_threshold = 0.5 * (xa + xb);
                }
            }
        }
        if (best_feature < 0) return id;

        std::vector<Eigen::Index> left_rows, right_rows;
        left_rows.reserve(rows.size());
        right_rows.reserve(rows.size());
        for (Eigen::Index r : rows)
            (x(r, best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
        if (left_rows.empty() || right_rows.empty()) return id;

        nodes_[static_cast<std::size_t>(id)].feature = best_feature;
        nodes_[static_cast<std::size_t>(id)].threshold = best_threshold;
        const int left = build(x, y, std::move(left_rows), params, rng, depth + 1);
        nodes_[static_cast<std::size_t>(id)].left = left;
        const int right = build(x, y, std::move(right_rows), params, rng, depth + 1);
        nodes_[static_cast<std::size_t>(id)].right = right;
        return id;
    }

    static std::vector<int> sample_features(int d, int mtry, Rng& rng) {
        std::vector<int> all(static_cast<std::size_t>(d));
        std::iota(all.begin(), all.end(), 0);
        for (int i = 0; i < mtry; ++i) {
            const auto j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(d - i))) + i;
            std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
        }
        all.resize(static_cast<std::size_t>(mtry));
        std::sort(all.begin(), all.end());
        return all;
    }

    std::vector<TreeNode> nodes_;
};

} // namespace detail

class RandomForest {
public:
    // Deterministic given seed: tree k draws from Rng(derive_seed(seed, k)).
    void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ForestParams& params,
             std::uint64_t seed) {
        trees_.assign(static_cast<std::size_t>(params.n_trees), {});
        const auto n = x.rows();
        for (int k = 0; k < params.n_trees; ++k) {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k), 0x7f0e57ULL));
            std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
            for (Eigen::Index i = 0; i < n; ++i)
                rows[static_cast<std::size_t>(i)] =
                    static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(n)));
            trees_[static_cast<std::size_t>(k)].fit(x, y, std::move(rows), params, rng);
        }
    }

    double predict_one(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
        double sum = 0.0;
        for (const auto& tree : trees_) sum += tree.predict(x);
        return sum / static_cast<double>(trees_.size());
    }

    Eigen::VectorXd predict(const Eigen::MatrixXd& x) const {
        Eigen::VectorXd out(x.rows());
        for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = predict_one(x.row(i));
        return out;
    }

private:
    std::vector<detail::RegressionTree> trees_;
};

} // namespace medestim
