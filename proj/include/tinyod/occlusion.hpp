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

#include <array>
#include <span>

#include "tinyod/superpixel.hpp"

namespace tinyod {

inline constexpr int kEdgeFeatureDim = 14;
using EdgeFeature = std::array<double, kEdgeFeatureDim>;

// Per-pixel occlusion score map over one layer region; nonzero only on atomic
// edge pixels, clamped to [0,1].
using OcclusionEdgeMap = EdgeMap;

namespace detail {

inline double gray_at(const Raster& img, int x, int y) {
    x = std::clamp(x, 0, img.width - 1);
    y = std::clamp(y, 0, img.height - 1);
    if (img.channels == 1) return img.at(x, y);
    return 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
}

inline double sample_channel(const Raster& img, int x, int y, int c) {
    x = std::clamp(x, 0, img.width - 1);
    y = std::clamp(y, 0, img.height - 1);
    return img.at(x, y, std::min(c, img.channels - 1));
}

}  // namespace detail

// Fixed 14-component atomic-edge descriptor:
//   [0] mean enhanced edge strength along the chain
//   [1] max enhanced edge strength
//   [2] chain length / region diagonal
//   [3] straightness (endpoint distance / chain length)
//   [4..6] per-channel mean color difference across the edge (3 px offsets)
//   [7] color variance on the far side, [8] on the near side
//   [9] chain centroid y / image height
//   [10] centroid distance to region bottom / region height
//   [11] layer index / layer count
//   [12] mean gradient-tangent misalignment (1 = gradient normal to chain)
//   [13] smaller / larger adjacent superpixel area
inline EdgeFeature edge_features(const AtomicEdge& e, const Raster& img, const EdgeMap& enhanced,
                                 const LayerPartition& layers) {
    require(!e.pixels.empty(), "edge_features: empty chain");
    EdgeFeature f{};
    size_t n = e.pixels.size();

    double sum_e = 0.0, max_e = 0.0;
    for (auto [gx, gy] : e.pixels) {
        require(enhanced.contains_global(gx, gy), "edge_features: chain pixel outside region");
        double v = enhanced.at_global(gx, gy);
        sum_e += v;
        max_e = std::max(max_e, v);
    }
    f[0] = sum_e / n;
    f[1] = max_e;

    const BBox& r = enhanced.region;
    double diag = std::hypot(static_cast<double>(r.w), static_cast<double>(r.h));
    f[2] = static_cast<double>(n) / diag;

    auto [x0, y0] = e.pixels.front();
    auto [x1, y1] = e.pixels.back();
    f[3] = n > 1 ? std::hypot(static_cast<double>(x1 - x0), static_cast<double>(y1 - y0)) /
                       static_cast<double>(n)
                 : 1.0;

    // Cross-edge color statistics. The normal at each chain pixel points from
    // the chain's own (higher-label) side toward the lower-label side; the
    // label map is gone by now, so the normal falls back to the local chain
    // tangent rotated 90 degrees.
    const int offset = 3;
    double diff[3] = {0, 0, 0};
    std::vector<double> side_a, side_b;
    side_a.reserve(n);
    side_b.reserve(n);
    double align_sum = 0.0;
    double cx = 0.0, cy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        auto [px, py] = e.pixels[i];
        cx += px;
        cy += py;
        size_t prev = i > 0 ? i - 1 : i;
        size_t next = i + 1 < n ? i + 1 : i;
        double tx = static_cast<double>(e.pixels[next].first - e.pixels[prev].first);
        double ty = static_cast<double>(e.pixels[next].second - e.pixels[prev].second);
        double tl = std::hypot(tx, ty);
        double nxd = 0.0, nyd = 1.0;
        if (tl > 0) {
            nxd = -ty / tl;
            nyd = tx / tl;
        }
        int ox = static_cast<int>(std::lround(nxd * offset));
        int oy = static_cast<int>(std::lround(nyd * offset));
        double ga = 0.0, gb = 0.0;
        for (int c = 0; c < 3; ++c) {
            double a = detail::sample_channel(img, px + ox, py + oy, c);
            double b = detail::sample_channel(img, px - ox, py - oy, c);
            diff[c] += std::abs(a - b);
            ga += a;
            gb += b;
        }
        side_a.push_back(ga / 3.0);
        side_b.push_back(gb / 3.0);

        double gx_img = detail::gray_at(img, px + 1, py) - detail::gray_at(img, px - 1, py);
        double gy_img = detail::gray_at(img, px, py + 1) - detail::gray_at(img, px, py - 1);
        double gl = std::hypot(gx_img, gy_img);
        if (gl > 0 && tl > 0) align_sum += std::abs(gx_img * ty - gy_img * tx) / (gl * tl);
    }
    for (int c = 0; c < 3; ++c) f[4 + c] = diff[c] / n;

    auto variance = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        m /= v.size();
        double acc = 0.0;
        for (double x : v) acc += (x - m) * (x - m);
        return acc / v.size();
    };
    f[7] = variance(side_a);
    f[8] = variance(side_b);

    cx /= n;
    cy /= n;
    f[9] = img.height > 0 ? cy / img.height : 0.0;
    f[10] = r.h > 0 ? (r.y2() - cy) / static_cast<double>(r.h) : 0.0;
    f[11] = layers.k_count > 0 ? static_cast<double>(e.layer) / layers.k_count : 0.0;
    f[12] = align_sum / n;
    double lo = static_cast<double>(std::min(e.area_low, e.area_high));
    double hi = static_cast<double>(std::max(e.area_low, e.area_high));
    f[13] = hi > 0 ? lo / hi : 0.0;
    return f;
}

// Marks each chain as occlusion (1) or trivial (0): positive when at least
// `rho` of its pixels lie within `dist_px` of a ground-truth obstacle contour
// pixel (boundary inclusive).
inline std::vector<int> label_edges(const std::vector<AtomicEdge>& edges, const Mask& gt,
                                    double rho = 0.5, int dist_px = 2) {
    // Obstacle contour: obstacle pixels with a non-obstacle 4-neighbor (or on
    // the image border), dilated by the Euclidean radius.
    Grid<uint8_t> near_contour(gt.width, gt.height, 0);
    static constexpr int nx4[4] = {0, 1, 0, -1};
    static constexpr int ny4[4] = {-1, 0, 1, 0};
    std::vector<std::pair<int, int>> disk;
    for (int dy = -dist_px; dy <= dist_px; ++dy)
        for (int dx = -dist_px; dx <= dist_px; ++dx)
            if (dx * dx + dy * dy <= dist_px * dist_px) disk.emplace_back(dx, dy);

    for (int y = 0; y < gt.height; ++y)
        for (int x = 0; x < gt.width; ++x) {
            if (gt.at(x, y) != label::kObstacle) continue;
            bool contour = false;
            for (int d = 0; d < 4 && !contour; ++d) {
                int px = x + nx4[d], py = y + ny4[d];
                if (!gt.in_bounds(px, py) || gt.at(px, py) != label::kObstacle) contour = true;
            }
            if (!contour) continue;
            for (auto [dx, dy] : disk) {
                int px = x + dx, py = y + dy;
                if (px >= 0 && px < gt.width && py >= 0 && py < gt.height)
                    near_contour.at(px, py) = 1;
            }
        }

    std::vector<int> labels(edges.size(), 0);
    for (size_t i = 0; i < edges.size(); ++i) {
        size_t hit = 0;
        for (auto [px, py] : edges[i].pixels)
            if (near_contour.in_bounds(px, py) && near_contour.at(px, py)) ++hit;
        labels[i] = static_cast<double>(hit) >= rho * edges[i].pixels.size() ? 1 : 0;
    }
    return labels;
}

// Linear occlusion-edge classifier: weights on (optionally standardized)
// features plus a bias, with an L2 penalty weight gamma on the weights.
struct RidgeModel {
    int dim = 0;
    std::vector<double> weights;
    double bias = 0.0;
    double gamma = 1.0;
    // Standardization applied before the dot product; empty means identity.
    std::vector<double> feat_mean;
    std::vector<double> feat_std;

    double predict(std::span<const double> x) const {
        double acc = bias;
        if (feat_mean.empty()) {
            for (int i = 0; i < dim; ++i) acc += weights[i] * x[i];
        } else {
            for (int i = 0; i < dim; ++i)
                acc += weights[i] * ((x[i] - feat_mean[i]) / feat_std[i]);
        }
        return acc;
    }
};

namespace detail {

// Solves A x = b for symmetric positive definite A (in-place Cholesky).
inline std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b, int n) {
    for (int j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (int k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (d <= 0.0) throw InternalError("solve_spd: matrix not positive definite");
        d = std::sqrt(d);
        a[j * n + j] = d;
        for (int i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (int k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / d;
        }
    }
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
        b[i] = s / a[i * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int k = i + 1; k < n; ++k) s -= a[k * n + i] * b[k];
        b[i] = s / a[i * n + i];
    }
    return b;
}

}  // namespace detail

// Closed-form ridge fit on centered data: (Xc^T Xc + gamma I) c = Xc^T uc,
// bias = mean(u) - c . mean(X). No standardization here; callers that want
// z-scored features standardize first and record the stats on the model.
inline RidgeModel train_ridge(const std::vector<std::vector<double>>& x,
                              const std::vector<double>& u, double gamma) {
    size_t m = x.size();
    require(m > 0 && m == u.size(), "train_ridge: shape mismatch");
    int v = static_cast<int>(x[0].size());
    require(static_cast<int>(m) >= v, "train_ridge: need at least V samples");
    require(gamma > 0.0, "train_ridge: gamma must be positive");

    std::vector<double> mean_x(v, 0.0);
    double mean_u = 0.0;
    for (size_t i = 0; i < m; ++i) {
        for (int j = 0; j < v; ++j) mean_x[j] += x[i][j];
        mean_u += u[i];
    }
    for (int j = 0; j < v; ++j) mean_x[j] /= m;
    mean_u /= m;

    std::vector<double> a(static_cast<size_t>(v) * v, 0.0), rhs(v, 0.0);
    std::vector<double> row(v);
    for (size_t i = 0; i < m; ++i) {
        for (int j = 0; j < v; ++j) row[j] = x[i][j] - mean_x[j];
        double uc = u[i] - mean_u;
        for (int j = 0; j < v; ++j) {
            rhs[j] += row[j] * uc;
            for (int k = 0; k <= j; ++k) a[j * v + k] += row[j] * row[k];
        }
    }
    for (int j = 0; j < v; ++j) {
        for (int k = j + 1; k < v; ++k) a[j * v + k] = a[k * v + j];
        a[j * v + j] += gamma;
    }

    RidgeModel model;
    model.dim = v;
    model.gamma = gamma;
    model.weights = detail::solve_spd(std::move(a), std::move(rhs), v);
    model.bias = mean_u;
    for (int j = 0; j < v; ++j) model.bias -= model.weights[j] * mean_x[j];
    return model;
}

inline RidgeModel train_ridge(const std::vector<EdgeFeature>& x, const std::vector<double>& u,
                              double gamma) {
    std::vector<std::vector<double>> rows(x.size());
    for (size_t i = 0; i < x.size(); ++i) rows[i].assign(x[i].begin(), x[i].end());
    return train_ridge(rows, u, gamma);
}

// Ridge fit on z-scored features; the standardization statistics ride on the
// returned model so inference applies them transparently.
inline RidgeModel train_occlusion_classifier(const std::vector<EdgeFeature>& x,
                                             const std::vector<int>& labels, double gamma) {
    size_t m = x.size();
    require(m >= kEdgeFeatureDim, "train_occlusion_classifier: too few edges");
    std::vector<double> mean(kEdgeFeatureDim, 0.0), stdev(kEdgeFeatureDim, 0.0);
    for (const auto& row : x)
        for (int j = 0; j < kEdgeFeatureDim; ++j) mean[j] += row[j];
    for (int j = 0; j < kEdgeFeatureDim; ++j) mean[j] /= m;
    for (const auto& row : x)
        for (int j = 0; j < kEdgeFeatureDim; ++j)
            stdev[j] += (row[j] - mean[j]) * (row[j] - mean[j]);
    for (int j = 0; j < kEdgeFeatureDim; ++j) {
        stdev[j] = std::sqrt(stdev[j] / m);
        if (stdev[j] <= 1e-12) stdev[j] = 1.0;
    }

    std::vector<std::vector<double>> z(m, std::vector<double>(kEdgeFeatureDim));
    std::vector<double> u(m);
    for (size_t i = 0; i < m; ++i) {
        for (int j = 0; j < kEdgeFeatureDim; ++j) z[i][j] = (x[i][j] - mean[j]) / stdev[j];
        u[i] = static_cast<double>(labels[i]);
    }
    RidgeModel model = train_ridge(z, u, gamma);
    model.feat_mean = mean;
    model.feat_std = stdev;
    return model;
}

// Scores every chain with the ridge model and paints the clamped score onto
// the chain pixels; everything off the chains stays zero, so an edge's pixels
// all carry one probability.
inline OcclusionEdgeMap classify(const std::vector<AtomicEdge>& edges,
                                 const std::vector<EdgeFeature>& features, const RidgeModel& model,
                                 const BBox& region) {
    require(edges.size() == features.size(), "classify: feature/edge count mismatch");
    OcclusionEdgeMap out(region);
    for (size_t i = 0; i < edges.size(); ++i) {
        double score = std::clamp(model.predict(features[i]), 0.0, 1.0);
        for (auto [gx, gy] : edges[i].pixels)
            if (out.contains_global(gx, gy)) out.at_global(gx, gy) = score;
    }
    return out;
}

}  // namespace tinyod
