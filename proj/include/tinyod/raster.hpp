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

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "tinyod/common.hpp"

namespace tinyod {

// Image plane. Samples are row-major, channel-interleaved, normalized to [0,1].
struct Raster {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<double> data;

    Raster() = default;
    Raster(int w, int h, int c, double fill = 0.0)
        : width(w), height(h), channels(c), data(static_cast<size_t>(w) * h * c, fill) {
        require(w >= 0 && h >= 0 && (c == 1 || c == 3), "Raster: channels must be 1 or 3");
    }

    double& at(int x, int y, int c = 0) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    double at(int x, int y, int c = 0) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }

    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
};

// Axis-aligned box of whole pixels: covers x..x+w-1 by y..y+h-1.
struct BBox {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    long long area() const { return static_cast<long long>(w) * h; }
    int x2() const { return x + w; }  // exclusive
    int y2() const { return y + h; }  // exclusive
    double cx() const { return x + w / 2.0; }
    double cy() const { return y + h / 2.0; }
    bool valid() const { return w >= 1 && h >= 1; }

    bool contains(int px, int py) const { return px >= x && px < x2() && py >= y && py < y2(); }
    bool contains(const BBox& b) const {
        return b.x >= x && b.y >= y && b.x2() <= x2() && b.y2() <= y2();
    }

    bool operator==(const BBox&) const = default;
};

inline BBox intersect(const BBox& a, const BBox& b) {
    int x1 = std::max(a.x, b.x);
    int y1 = std::max(a.y, b.y);
    int x2 = std::min(a.x2(), b.x2());
    int y2 = std::min(a.y2(), b.y2());
    if (x2 <= x1 || y2 <= y1) return BBox{0, 0, 0, 0};
    return BBox{x1, y1, x2 - x1, y2 - y1};
}

// Smallest box containing both.
inline BBox hull(const BBox& a, const BBox& b) {
    if (!a.valid()) return b;
    if (!b.valid()) return a;
    int x1 = std::min(a.x, b.x);
    int y1 = std::min(a.y, b.y);
    int x2 = std::max(a.x2(), b.x2());
    int y2 = std::max(a.y2(), b.y2());
    return BBox{x1, y1, x2 - x1, y2 - y1};
}

inline BBox clip(const BBox& b, const BBox& bounds) { return intersect(b, bounds); }

inline BBox expand(const BBox& b, int margin) {
    return BBox{b.x - margin, b.y - margin, b.w + 2 * margin, b.h + 2 * margin};
}

// Intersection over union on integer pixel counts. Disjoint boxes give 0.
inline double iou(const BBox& a, const BBox& b) {
    long long inter = intersect(a, b).area();
    long long uni = a.area() + b.area() - inter;
    if (uni <= 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

// Per-pixel class labels paired with a Raster.
namespace label {
inline constexpr uint8_t kRoad = 0;
inline constexpr uint8_t kObstacle = 1;
inline constexpr uint8_t kNonRoad = 2;
inline constexpr uint8_t kIgnore = 255;

inline bool known(uint8_t v) { return v == kRoad || v == kObstacle || v == kNonRoad || v == kIgnore; }
}  // namespace label

struct Mask {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> labels;

    Mask() = default;
    Mask(int w, int h, uint8_t fill = label::kRoad)
        : width(w), height(h), labels(static_cast<size_t>(w) * h, fill) {}

    uint8_t& at(int x, int y) { return labels[static_cast<size_t>(y) * width + x]; }
    uint8_t at(int x, int y) const { return labels[static_cast<size_t>(y) * width + x]; }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
};

// Summed-area table over a single-channel raster. The accumulator grid has one
// extra row and column so box sums need four reads and no branches.
struct IntegralMap {
    int width = 0;   // source raster width
    int height = 0;  // source raster height
    std::vector<double> sums;  // (width+1) x (height+1)

    double corner(int x, int y) const { return sums[static_cast<size_t>(y) * (width + 1) + x]; }

    double box_sum(const BBox& b) const {
        BBox c = clip(b, BBox{0, 0, width, height});
        if (!c.valid()) return 0.0;
        return corner(c.x2(), c.y2()) - corner(c.x, c.y2()) - corner(c.x2(), c.y) + corner(c.x, c.y);
    }
};

inline IntegralMap integral(const Raster& src) {
    require(src.channels == 1, "integral: input must be single-channel");
    IntegralMap m;
    m.width = src.width;
    m.height = src.height;
    m.sums.assign(static_cast<size_t>(src.width + 1) * (src.height + 1), 0.0);
    for (int y = 0; y < src.height; ++y) {
        double row = 0.0;
        for (int x = 0; x < src.width; ++x) {
            row += src.at(x, y);
            m.sums[static_cast<size_t>(y + 1) * (src.width + 1) + (x + 1)] =
                m.sums[static_cast<size_t>(y) * (src.width + 1) + (x + 1)] + row;
        }
    }
    return m;
}

inline IntegralMap integral(const Grid<double>& src) {
    Raster r(src.width, src.height, 1);
    r.data = src.data;
    return integral(r);
}

inline Raster crop(const Raster& img, const BBox& region) {
    require(BBox{0, 0, img.width, img.height}.contains(region) && region.valid(),
            "crop: region outside raster");
    Raster out(region.w, region.h, img.channels);
    for (int y = 0; y < region.h; ++y)
        for (int x = 0; x < region.w; ++x)
            for (int c = 0; c < img.channels; ++c)
                out.at(x, y, c) = img.at(region.x + x, region.y + y, c);
    return out;
}

inline Raster to_gray(const Raster& img) {
    if (img.channels == 1) return img;
    Raster out(img.width, img.height, 1);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            out.at(x, y) = 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
    return out;
}

// RGB -> HSV with all three components normalized to [0,1].
inline Raster rgb_to_hsv(const Raster& img) {
    require(img.channels == 3, "rgb_to_hsv: input must have 3 channels");
    Raster out(img.width, img.height, 3);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double r = img.at(x, y, 0), g = img.at(x, y, 1), b = img.at(x, y, 2);
            double mx = std::max({r, g, b});
            double mn = std::min({r, g, b});
            double d = mx - mn;
            double h = 0.0;
            if (d > 0.0) {
                if (mx == r)
                    h = std::fmod((g - b) / d, 6.0);
                else if (mx == g)
                    h = (b - r) / d + 2.0;
                else
                    h = (r - g) / d + 4.0;
                h /= 6.0;
                if (h < 0.0) h += 1.0;
            }
            out.at(x, y, 0) = h;
            out.at(x, y, 1) = mx > 0.0 ? d / mx : 0.0;
            out.at(x, y, 2) = mx;
        }
    }
    return out;
}

}  // namespace tinyod
