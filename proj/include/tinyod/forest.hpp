// Copyright 2026 The tinyod authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "tinyod/features.hpp"
#include "tinyod/rng.hpp"

namespace tinyod {

struct ForestParams {
    int tree_count = 100;
    int max_depth = 12;
    int min_leaf = 5;
    int mtry = 4;  // features drawn per split
    int max_threshold_candidates = 32;
};

// Flat binary regression tree. Internal nodes route on feature < threshold;
// leaves store the mean label of the samples that reached them.
struct Tree {
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;
        int count = 0;
    };
    std::vector<Node> nodes;

    double predict(std::span<const double> x) const {
        int i = 0;
        while (nodes[i].feature >= 0) i = x[nodes[i].feature] < nodes[i].threshold ? nodes[i].left : nodes[i].right;
        return nodes[i].value;
    }
};

struct ForestModel {
    ForestParams params;
    int feature_dim = kProposalFeatureDim;
    int schema_version = kProposalFeatureSchemaVersion;
    std::vector<Tree> trees;

    // Forest output: plain average of the per-tree outputs.
    double predict(std::span<const double> x) const {
        require(static_cast<int>(x.size()) == feature_dim, "forest predict: feature dim mismatch");
        double acc = 0.0;
        for (const Tree& t : trees) acc += t.predict(x);
        return acc / static_cast<double>(trees.size());
    }
    double predict(const FeatureVector20& x) const { return predict(std::span<const double>(x)); }
};

namespace detail {

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

// Best variance-reduction split for one feature over the index set, honoring
// min_leaf on both children. Candidate thresholds are midpoints of consecutive
// sorted values, thinned to at most max_candidates quantiles.
inline SplitChoice best_split_for_feature(const std::vector<const double*>& x,
                                          const std::vector<double>& y,
                                          const std::vector<int>& idx, int feature,
                                          const ForestParams& p) {
    size_t n = idx.size();
    std::vector<std::pair<double, double>> vals(n);  // (feature value, label)
    for (size_t i = 0; i < n; ++i) vals[i] = {x[idx[i]][feature], y[idx[i]]};
    std::sort(vals.begin(), vals.end());

    SplitChoice best;
    if (vals.front().first == vals.back().first) return best;

    std::vector<double> prefix(n + 1, 0.0);
    for (size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + vals[i].second;
    double total = prefix[n];

    // Candidate cut positions: i means "first i samples go left"; valid only
    // between distinct feature values.
    std::vector<size_t> cuts;
    for (size_t i = static_cast<size_t>(p.min_leaf); i + p.min_leaf <= n; ++i)
        if (vals[i - 1].first < vals[i].first) cuts.push_back(i);
    if (cuts.empty()) return best;
    if (static_cast<int>(cuts.size()) > p.max_threshold_candidates) {
        std::vector<size_t> thin;
        for (int i = 0; i < p.max_threshold_candidates; ++i) {
            size_t pos = cuts[(i * cuts.size()) / p.max_threshold_candidates];
            if (thin.empty() || thin.back() != pos) thin.push_back(pos);
        }
        cuts = std::move(thin);
    }

    for (size_t cut : cuts) {
        double left = prefix[cut];
        double right = total - left;
        // Variance reduction up to constants: sum of squared child sums over
        // child sizes; the parent term is common to all cuts.
        double gain = left * left / cut + right * right / (n - cut);
        if (best.feature < 0 || gain > best.gain) {
            best.feature = feature;
            best.threshold = 0.5 * (vals[cut - 1].first + vals[cut].first);
            best.gain = gain;
        }
    }
    return best;
}

inline int build_node(Tree& tree, const std::vector<const double*>& x, const std::vector<double>& y,
                      std::vector<int>& idx, int begin, int end, int depth, const ForestParams& p,
                      int dim, Rng& rng) {
    int n = end - begin;
    double sum = 0.0, sq = 0.0;
    for (int i = begin; i < end; ++i) {
        sum += y[idx[i]];
        sq += y[idx[i]] * y[idx[i]];
    }
    double mean = sum / n;
    double var = std::max(0.0, sq / n - mean * mean);

    int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(Tree::Node{-1, 0.0, -1, -1, mean, n});
    if (depth >= p.max_depth || n < 2 * p.min_leaf || var <= 1e-15) return node_id;

    // Draw mtry distinct feature indices (partial Fisher-Yates).
    std::vector<int> feats(dim);
    for (int i = 0; i < dim; ++i) feats[i] = i;
    int draws = std::min(p.mtry, dim);
    for (int i = 0; i < draws; ++i) std::swap(feats[i], feats[i + rng.uniform_int(dim - i)]);

    std::vector<int> subset(idx.begin() + begin, idx.begin() + end);
    SplitChoice best;
    double parent_term = sum * sum / n;
    for (int i = 0; i < draws; ++i) {
        SplitChoice c = best_split_for_feature(x, y, subset, feats[i], p);
        if (c.feature >= 0 && c.gain > best.gain) best = c;
    }
    if (best.feature < 0 || best.gain <= parent_term + 1e-12) return node_id;

    auto mid = std::partition(idx.begin() + begin, idx.begin() + end,
                              [&](int i) { return x[i][best.feature] < best.threshold; });
    int split = static_cast<int>(mid - idx.begin());
    if (split == begin || split == end) return node_id;  // numeric edge, keep the leaf

    tree.nodes[node_id].feature = best.feature;
    tree.nodes[node_id].threshold = best.threshold;
    int left = build_node(tree, x, y, idx, begin, split, depth + 1, p, dim, rng);
    tree.nodes[node_id].left = left;
    int right = build_node(tree, x, y, idx, split, end, depth + 1, p, dim, rng);
    tree.nodes[node_id].right = right;
    return node_id;
}

}  // namespace detail

// Trains T trees on bootstrap resamples; splits maximize variance reduction
// over mtry randomly drawn features. Deterministic for a fixed seed.
inline ForestModel train_forest(const std::vector<FeatureVector20>& features,
                                const std::vector<double>& y, const ForestParams& params,
                                uint64_t seed) {
    size_t m = features.size();
    require(m > 0 && m == y.size(), "train_forest: shape mismatch");
    require(static_cast<int>(m) >= params.min_leaf, "train_forest: too few samples");
    for (double v : y) require(v >= 0.0 && v <= 1.0, "train_forest: labels must be in [0,1]");

    std::vector<const double*> x(m);
    for (size_t i = 0; i < m; ++i) x[i] = features[i].data();

    ForestModel model;
    model.params = params;
    model.trees.resize(params.tree_count);
    for (int t = 0; t < params.tree_count; ++t) {
        Rng rng(Rng::derive(seed, static_cast<uint64_t>(t)));
        std::vector<int> idx(m);
        for (size_t i = 0; i < m; ++i) idx[i] = rng.uniform_int(static_cast<int>(m));
        std::sort(idx.begin(), idx.end());  // stable geometry for partitioning
        detail::build_node(model.trees[t], x, y, idx, 0, static_cast<int>(m), 0, params,
                           kProposalFeatureDim, rng);
    }
    return model;
}

// Fraction of internal split nodes that test each feature; all zeros when the
// forest has no internal nodes.
inline std::array<double, kProposalFeatureDim> feature_frequency(const ForestModel& model) {
    std::array<double, kProposalFeatureDim> freq{};
    long long total = 0;
    for (const Tree& t : model.trees)
        for (const Tree::Node& n : t.nodes)
            if (n.feature >= 0) {
                ++freq[n.feature];
                ++total;
            }
    if (total > 0)
        for (double& v : freq) v /= static_cast<double>(total);
    return freq;
}

}  // namespace tinyod
