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
#include <limits>
#include <numeric>
#include <tuple>

#include "tinyod/raster.hpp"
#include "tinyod/rng.hpp"

namespace tinyod {

struct ObstacleAnnotation {
    BBox bbox;
    std::string image_id;
};

// 2D stand-in for metric distance: offset of the box center from the image
// bottom plus the pixel area. Larger d_bottom means farther away.
struct PseudoDistance {
    double d_bottom = 0.0;
    double area = 0.0;
};

inline PseudoDistance pseudo_distance(const BBox& b, int image_height) {
    require(b.valid(), "pseudo_distance: invalid box");
    return PseudoDistance{image_height - (b.y + b.h / 2.0), static_cast<double>(b.area())};
}

// Nested sub-regions of the road region. regions[0] is the full road region;
// each deeper region contains only the obstacles at that pseudo distance or
// farther, so regions[k+1] is inside regions[k].
struct LayerPartition {
    int k_count = 1;
    std::vector<BBox> regions;
    BBox road_region;
    // Clustering state kept for serialization and reporting.
    std::array<double, 2> feature_mean{0, 0};
    std::array<double, 2> feature_std{1, 1};
    std::vector<std::array<double, 2>> centroids;  // z-scored space, near to far
    std::vector<std::string> warnings;
};

namespace detail {

inline double sq_dist2(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    double dx = a[0] - b[0], dy = a[1] - b[1];
    return dx * dx + dy * dy;
}

}  // namespace detail

// K-means over z-scored (d_bottom, area). Deterministic: the first center is
// drawn with the seeded generator, the rest by farthest-point traversal; ties
// always resolve to the lowest index. Returns member indices per cluster,
// ordered so mean d_bottom increases with the cluster number (last = farthest).
// Optionally reports the fitted standardization and centroids.
inline std::vector<std::vector<size_t>> cluster_obstacles(const std::vector<PseudoDistance>& points,
                                                          int k, uint64_t seed,
                                                          LayerPartition* fit = nullptr) {
    size_t n = points.size();
    require(k >= 1 && static_cast<size_t>(k) <= n, "cluster_obstacles: need 1 <= K <= |obstacles|");

    std::array<double, 2> mean{0, 0}, stdev{0, 0};
    for (const auto& p : points) {
        mean[0] += p.d_bottom;
        mean[1] += p.area;
    }
    mean[0] /= n;
    mean[1] /= n;
    for (const auto& p : points) {
        stdev[0] += (p.d_bottom - mean[0]) * (p.d_bottom - mean[0]);
        stdev[1] += (p.area - mean[1]) * (p.area - mean[1]);
    }
    stdev[0] = std::sqrt(stdev[0] / n);
    stdev[1] = std::sqrt(stdev[1] / n);
    if (stdev[0] <= 0) stdev[0] = 1.0;
    if (stdev[1] <= 0) stdev[1] = 1.0;

    std::vector<std::array<double, 2>> z(n);
    for (size_t i = 0; i < n; ++i)
        z[i] = {(points[i].d_bottom - mean[0]) / stdev[0], (points[i].area - mean[1]) / stdev[1]};

    // Farthest-point seeding. The seeded draw and all tie-breaks go through a
    // lexicographically sorted view, so the outcome does not depend on the
    // order the points arrived in.
    std::vector<size_t> lex(n);
    std::iota(lex.begin(), lex.end(), 0);
    std::stable_sort(lex.begin(), lex.end(), [&](size_t a, size_t b) {
        return std::tie(z[a][0], z[a][1]) < std::tie(z[b][0], z[b][1]);
    });
    Rng rng(seed);
    std::vector<std::array<double, 2>> centers;
    centers.push_back(z[lex[static_cast<size_t>(rng.uniform_int(static_cast<int>(n)))]]);
    while (static_cast<int>(centers.size()) < k) {
        size_t far_idx = lex[0];
        double far_d = -1.0;
        for (size_t pos = 0; pos < n; ++pos) {
            size_t i = lex[pos];
            double d = std::numeric_limits<double>::max();
            for (const auto& c : centers) d = std::min(d, detail::sq_dist2(z[i], c));
            if (d > far_d) {
                far_d = d;
                far_idx = i;
            }
        }
        centers.push_back(z[far_idx]);
    }

    std::vector<int> assign(n, 0);
    for (int iter = 0; iter < 100; ++iter) {
        for (size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::max();
            for (int c = 0; c < k; ++c) {
                double d = detail::sq_dist2(z[i], centers[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            assign[i] = best;
        }
        std::vector<std::array<double, 2>> next(k, {0, 0});
        std::vector<size_t> count(k, 0);
        for (size_t i = 0; i < n; ++i) {
            next[assign[i]][0] += z[i][0];
            next[assign[i]][1] += z[i][1];
            ++count[assign[i]];
        }
        double shift = 0.0;
        for (int c = 0; c < k; ++c) {
            if (count[c] == 0) {
                // Re-seed an emptied cluster at the point farthest from its center.
                size_t far_idx = lex[0];
                double far_d = -1.0;
                for (size_t pos = 0; pos < n; ++pos) {
                    size_t i = lex[pos];
                    double d = detail::sq_dist2(z[i], centers[assign[i]]);
                    if (d > far_d) {
                        far_d = d;
                        far_idx = i;
                    }
                }
                next[c] = z[far_idx];
                count[c] = 1;
            } else {
                next[c][0] /= count[c];
                next[c][1] /= count[c];
            }
            shift = std::max(shift, std::sqrt(detail::sq_dist2(next[c], centers[c])));
        }
        centers = next;
        if (shift < 1e-6) break;
    }
    for (size_t i = 0; i < n; ++i) {
        int best = 0;
        double best_d = std::numeric_limits<double>::max();
        for (int c = 0; c < k; ++c) {
            double d = detail::sq_dist2(z[i], centers[c]);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        assign[i] = best;
    }

    // Re-index so mean d_bottom increases with the cluster number.
    std::vector<double> mean_d(k, 0.0);
    std::vector<size_t> sizes(k, 0);
    for (size_t i = 0; i < n; ++i) {
        mean_d[assign[i]] += points[i].d_bottom;
        ++sizes[assign[i]];
    }
    for (int c = 0; c < k; ++c)
        mean_d[c] = sizes[c] ? mean_d[c] / sizes[c] : std::numeric_limits<double>::max();
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return mean_d[a] < mean_d[b]; });

    std::vector<std::vector<size_t>> clusters(k);
    std::vector<int> rank(k);
    for (int r = 0; r < k; ++r) rank[order[r]] = r;
    for (size_t i = 0; i < n; ++i) clusters[rank[assign[i]]].push_back(i);

    if (fit) {
        fit->feature_mean = mean;
        fit->feature_std = stdev;
        fit->centroids.resize(k);
        for (int r = 0; r < k; ++r) fit->centroids[r] = centers[order[r]];
    }
    return clusters;
}

// Turns the pseudo-distance partition into nested rectangles. Region k is the
// hull of every obstacle at distance k or farther, padded by `margin`, clipped
// to the road region, then grown just enough to contain region k+1. Region 1
// is always the road region itself. An empty subset collapses its layer onto
// the next deeper one.
inline LayerPartition derive_layers(const std::vector<std::vector<size_t>>& partition,
                                    const std::vector<ObstacleAnnotation>& obstacles,
                                    const BBox& road_region, int margin) {
    require(!partition.empty(), "derive_layers: empty partition");
    require(road_region.valid(), "derive_layers: invalid road region");
    int k = static_cast<int>(partition.size());

    LayerPartition out;
    out.k_count = k;
    out.road_region = road_region;
    out.regions.assign(k, BBox{});

    BBox running{};  // hull of subsets k..K
    for (int c = k - 1; c >= 0; --c) {
        bool empty = partition[c].empty();
        for (size_t idx : partition[c]) running = hull(running, obstacles[idx].bbox);
        if (!running.valid()) {
            // Deepest layers with no obstacles fall back to the road region.
            out.regions[c] = road_region;
            out.warnings.push_back("layer " + std::to_string(c + 1) + " has no obstacles");
            continue;
        }
        BBox r = clip(expand(running, margin), road_region);
        if (c + 1 < k) r = hull(r, out.regions[c + 1]);  // enforce nesting
        out.regions[c] = r.valid() ? r : road_region;
        if (empty)
            out.warnings.push_back("layer " + std::to_string(c + 1) +
                                   " is empty; collapsed onto layer " + std::to_string(c + 2));
    }
    out.regions[0] = road_region;  // deeper regions are already inside it
    return out;
}

}  // namespace tinyod
