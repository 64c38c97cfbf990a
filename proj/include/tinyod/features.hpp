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

#include "tinyod/proposals.hpp"

namespace tinyod {

inline constexpr int kProposalFeatureDim = 20;
inline constexpr int kProposalFeatureSchemaVersion = 1;
using FeatureVector20 = std::array<double, kProposalFeatureDim>;

namespace detail {

inline constexpr int kResponseBins = 32;
inline constexpr int kColorBins = 16;
inline constexpr double kEdgePresenceThreshold = 0.1;
inline constexpr int kBorderBand = 2;

inline double cosine_distance(const double* a, const double* b, int n) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (int i = 0; i < n; ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na <= 0.0 || nb <= 0.0) return 0.0;
    return std::clamp(1.0 - dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

}  // namespace detail

// Fixed 20-component proposal descriptor, schema version 1.
//   Edge / structure, measured on the occlusion map inside the box:
//     [0] edge density in a 2 px inner border band
//     [1] mean response, [2] max response
//     [3] histogram mode over 32 bins (as the lower bin edge value)
//     [4] mode bin count / box pixel count
//     [5] fraction of pixels with response > 0.1
//     [6] border-band edge mass / interior edge mass
//   Pseudo distance:
//     [7] box area / image area, [8] cx / width, [9] cy / height
//     [10] h / image height, [11] w / image width, [12] aspect ratio w/h
//   Objectness:
//     [13] the stored proposal objectness
//   Color, on the HSV image:
//     [14..16] per-channel cosine distance between the box histogram and the
//              surrounding ring histogram (box dilated 1.5x, minus box)
//     [17..19] per-channel variance inside the box
inline FeatureVector20 proposal_features(const Proposal& p, const Raster& hsv,
                                         const EdgeMap& enhanced, const OcclusionEdgeMap& occ) {
    (void)enhanced;  // reserved by the schema; v1 reads only the occlusion map
    require(hsv.channels == 3, "proposal_features: hsv raster must have 3 channels");
    const BBox& b = p.bbox;
    require(BBox{0, 0, hsv.width, hsv.height}.contains(b) && b.valid(),
            "proposal_features: box outside image");

    FeatureVector20 f{};
    long long box_pixels = b.area();

    // One pass over the box gathers every occlusion-map statistic.
    double sum = 0.0, max_v = 0.0, band_mass = 0.0, interior_mass = 0.0;
    long long band_pixels = 0, over_threshold = 0;
    std::array<long long, detail::kResponseBins> hist{};
    for (int y = b.y; y < b.y2(); ++y) {
        for (int x = b.x; x < b.x2(); ++x) {
            double v = occ.contains_global(x, y) ? occ.at_global(x, y) : 0.0;
            sum += v;
            max_v = std::max(max_v, v);
            int bin = std::min(detail::kResponseBins - 1,
                               static_cast<int>(v * detail::kResponseBins));
            ++hist[bin];
            if (v > detail::kEdgePresenceThreshold) ++over_threshold;
            bool in_band = x < b.x + detail::kBorderBand || x >= b.x2() - detail::kBorderBand ||
                           y < b.y + detail::kBorderBand || y >= b.y2() - detail::kBorderBand;
            if (in_band) {
                band_mass += v;
                ++band_pixels;
            } else {
                interior_mass += v;
            }
        }
    }
    int mode_bin = 0;
    for (int i = 1; i < detail::kResponseBins; ++i)
        if (hist[i] > hist[mode_bin]) mode_bin = i;

    f[0] = band_pixels > 0 ? band_mass / band_pixels : 0.0;
    f[1] = sum / box_pixels;
    f[2] = max_v;
    f[3] = static_cast<double>(mode_bin) / detail::kResponseBins;
    f[4] = static_cast<double>(hist[mode_bin]) / box_pixels;
    f[5] = static_cast<double>(over_threshold) / box_pixels;
    f[6] = band_mass / std::max(interior_mass, 1e-6);

    f[7] = static_cast<double>(box_pixels) / (static_cast<double>(hsv.width) * hsv.height);
    f[8] = b.cx() / hsv.width;
    f[9] = b.cy() / hsv.height;
    f[10] = static_cast<double>(b.h) / hsv.height;
    f[11] = static_cast<double>(b.w) / hsv.width;
    f[12] = static_cast<double>(b.w) / b.h;

    f[13] = p.objectness;

    // Color contrast against the surrounding ring, plus in-box variance.
    int dw = static_cast<int>(std::lround(b.w * 1.5));
    int dh = static_cast<int>(std::lround(b.h * 1.5));
    BBox ring_outer = clip(BBox{b.x + (b.w - dw) / 2, b.y + (b.h - dh) / 2, dw, dh},
                           BBox{0, 0, hsv.width, hsv.height});

    double box_hist[3][detail::kColorBins] = {};
    double ring_hist[3][detail::kColorBins] = {};
    double mean_c[3] = {}, sq_c[3] = {};
    bool ring_nonempty = false;
    for (int y = ring_outer.y; y < ring_outer.y2(); ++y)
        for (int x = ring_outer.x; x < ring_outer.x2(); ++x) {
            bool in_box = b.contains(x, y);
            for (int c = 0; c < 3; ++c) {
                double v = hsv.at(x, y, c);
                int bin = std::min(detail::kColorBins - 1,
                                   static_cast<int>(v * detail::kColorBins));
                if (in_box) {
                    box_hist[c][bin] += 1.0;
                    mean_c[c] += v;
                    sq_c[c] += v * v;
                } else {
                    ring_hist[c][bin] += 1.0;
                    if (c == 0) ring_nonempty = true;
                }
            }
        }
    for (int c = 0; c < 3; ++c) {
        f[14 + c] = ring_nonempty
                        ? detail::cosine_distance(box_hist[c], ring_hist[c], detail::kColorBins)
                        : 0.0;
        double m = mean_c[c] / box_pixels;
        f[17 + c] = std::max(0.0, sq_c[c] / box_pixels - m * m);
    }
    return f;
}

}  // namespace tinyod
