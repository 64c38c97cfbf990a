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

#include "tinyod/layering.hpp"
#include "tinyod/raster.hpp"

namespace tinyod {

// Per-pixel edge probability over a sub-rectangle of the image. Coordinates on
// the public surface are global; `values` is stored region-local.
struct EdgeMap {
    BBox region;
    Grid<double> values;

    EdgeMap() = default;
    EdgeMap(const BBox& r, double fill = 0.0) : region(r), values(r.w, r.h, fill) {}

    double at_global(int gx, int gy) const { return values.at(gx - region.x, gy - region.y); }
    double& at_global(int gx, int gy) { return values.at(gx - region.x, gy - region.y); }
    bool contains_global(int gx, int gy) const { return region.contains(gx, gy); }
};

namespace detail {

inline std::vector<double> gaussian_kernel(double sigma) {
    int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += k[i + radius];
    }
    for (double& v : k) v /= sum;
    return k;
}

// Separable convolution with replicated borders.
inline Grid<double> gaussian_smooth(const Grid<double>& src, double sigma) {
    std::vector<double> k = gaussian_kernel(sigma);
    int radius = static_cast<int>(k.size() / 2);
    Grid<double> tmp(src.width, src.height), out(src.width, src.height);
    for (int y = 0; y < src.height; ++y)
        for (int x = 0; x < src.width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += k[i + radius] * src.at(std::clamp(x + i, 0, src.width - 1), y);
            tmp.at(x, y) = acc;
        }
    for (int y = 0; y < src.height; ++y)
        for (int x = 0; x < src.width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += k[i + radius] * tmp.at(x, std::clamp(y + i, 0, src.height - 1));
            out.at(x, y) = acc;
        }
    return out;
}

inline void sobel(const Grid<double>& src, Grid<double>& gx, Grid<double>& gy) {
    int w = src.width, h = src.height;
    gx = Grid<double>(w, h);
    gy = Grid<double>(w, h);
    auto px = [&](int x, int y) { return src.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1)); };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            gx.at(x, y) = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1)) -
                          (px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1));
            gy.at(x, y) = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1)) -
                          (px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1));
        }
}

}  // namespace detail

// Gradient-based edge detector: per-channel Sobel magnitudes at two smoothing
// scales (sigma 1 and 2), max over channels and scales, 3x3 non-maximum
// suppression along the gradient direction, then normalization by the 99th
// percentile of the surviving magnitudes, clamped to [0,1].
inline EdgeMap detect_edges(const Raster& img) {
    int w = img.width, h = img.height;
    Grid<double> mag(w, h, 0.0), dir_x(w, h, 0.0), dir_y(w, h, 0.0);

    for (int c = 0; c < img.channels; ++c) {
        Grid<double> chan(w, h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) chan.at(x, y) = img.at(x, y, c);
        for (double sigma : {1.0, 2.0}) {
            Grid<double> smooth = detail::gaussian_smooth(chan, sigma);
            Grid<double> gx, gy;
            detail::sobel(smooth, gx, gy);
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    double m = std::hypot(gx.at(x, y), gy.at(x, y));
                    if (m > mag.at(x, y)) {
                        mag.at(x, y) = m;
                        dir_x.at(x, y) = gx.at(x, y);
                        dir_y.at(x, y) = gy.at(x, y);
                    }
                }
        }
    }

    // NMS across the gradient direction, quantized to the 8-neighborhood.
    EdgeMap out(BBox{0, 0, w, h});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double m = mag.at(x, y);
            if (m <= 0.0) continue;
            double angle = std::atan2(dir_y.at(x, y), dir_x.at(x, y));
            int oct = static_cast<int>(std::lround(angle * 4.0 / 3.14159265358979323846)) & 3;
            static constexpr int step[4][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}};
            int dx = step[oct][0], dy = step[oct][1];
            auto m_at = [&](int px, int py) {
                return mag.at(std::clamp(px, 0, w - 1), std::clamp(py, 0, h - 1));
            };
            if (m >= m_at(x + dx, y + dy) && m >= m_at(x - dx, y - dy)) out.values.at(x, y) = m;
        }

    std::vector<double> positives;
    positives.reserve(out.values.size() / 8);
    for (double v : out.values.data)
        if (v > 0.0) positives.push_back(v);
    if (positives.empty()) return out;
    size_t idx = static_cast<size_t>(std::ceil(0.99 * positives.size())) - 1;
    std::nth_element(positives.begin(), positives.begin() + idx, positives.end());
    double p99 = positives[idx];
    if (p99 <= 0.0) p99 = 1.0;
    for (double& v : out.values.data) v = std::min(1.0, v / p99);
    return out;
}

inline EdgeMap crop_edge_map(const EdgeMap& src, const BBox& region) {
    require(src.region.contains(region) && region.valid(), "crop_edge_map: region not covered");
    EdgeMap out(region);
    for (int y = 0; y < region.h; ++y)
        for (int x = 0; x < region.w; ++x)
            out.values.at(x, y) = src.at_global(region.x + x, region.y + y);
    return out;
}

inline EdgeMap detect_edges(const Raster& img, const BBox& region) {
    require(region.w >= 3 && region.h >= 3, "detect_edges: region must be at least 3x3");
    require(BBox{0, 0, img.width, img.height}.contains(region), "detect_edges: region outside image");
    return crop_edge_map(detect_edges(img), region);
}

// Far-to-near fusion output. `raw` holds the plain sums (the telescoping
// identity is exact on them); `scaled` divides each layer by its own maximum
// so downstream consumers keep the [0,1] contract.
struct FusedMaps {
    std::vector<EdgeMap> raw;
    std::vector<EdgeMap> scaled;
};

// Sum each enhanced deeper map into its parent layer: the deepest enhanced map
// equals its input, and layer k adds the enhanced layer k+1 values wherever
// region k+1 overlaps.
inline FusedMaps fuse_far_to_near(const std::vector<EdgeMap>& maps, const LayerPartition& layers) {
    require(!maps.empty(), "fuse_far_to_near: no maps");
    require(maps.size() == layers.regions.size(), "fuse_far_to_near: map/layer count mismatch");
    int k = static_cast<int>(maps.size());
    for (int i = 0; i < k; ++i)
        require(maps[i].region == layers.regions[i], "fuse_far_to_near: map region misaligned");
    for (int i = 0; i + 1 < k; ++i)
        require(maps[i].region.contains(maps[i + 1].region), "fuse_far_to_near: regions not nested");

    FusedMaps out;
    out.raw.resize(k);
    out.raw[k - 1] = maps[k - 1];
    for (int i = k - 2; i >= 0; --i) {
        out.raw[i] = maps[i];
        const EdgeMap& deeper = out.raw[i + 1];
        for (int y = deeper.region.y; y < deeper.region.y2(); ++y)
            for (int x = deeper.region.x; x < deeper.region.x2(); ++x)
                out.raw[i].at_global(x, y) += deeper.at_global(x, y);
    }
    out.scaled = out.raw;
    for (EdgeMap& m : out.scaled) {
        double mx = 0.0;
        for (double v : m.values.data) mx = std::max(mx, v);
        if (mx > 0.0)
            for (double& v : m.values.data) v /= mx;
    }
    return out;
}

}  // namespace tinyod
