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

#include "tinyod/raster.hpp"

namespace tinyod {

// Proposal carrying its regressor score, ready for accumulation.
struct ScoredProposal {
    BBox bbox;
    double score = 0.0;
};

// Per-pixel obstacle occupancy probability; zero outside the road region.
struct ProbabilityMap {
    int width = 0;
    int height = 0;
    Grid<double> values;
};

enum class ProbNormalization {
    kGlobalMax,   // divide by the maximum accumulated value
    kCoverCount,  // divide each pixel by the number of covering proposals
};

// Raw score sums per pixel via the box-additive (difference image) trick:
// each box touches four corners, then two prefix passes spread the mass.
inline Grid<double> accumulate_raw(const std::vector<ScoredProposal>& proposals, int width,
                                   int height) {
    Grid<double> diff(width + 1, height + 1, 0.0);
    for (const ScoredProposal& p : proposals) {
        BBox b = clip(p.bbox, BBox{0, 0, width, height});
        if (!b.valid()) continue;
        diff.at(b.x, b.y) += p.score;
        diff.at(b.x2(), b.y) -= p.score;
        diff.at(b.x, b.y2()) -= p.score;
        diff.at(b.x2(), b.y2()) += p.score;
    }
    Grid<double> out(width, height, 0.0);
    std::vector<double> col(static_cast<size_t>(width) + 1, 0.0);
    for (int y = 0; y < height; ++y) {
        double row = 0.0;
        for (int x = 0; x < width; ++x) {
            col[x] += diff.at(x, y);
            row += col[x];
            out.at(x, y) = row;
        }
    }
    return out;
}

// Obstacle occupied probability map: accumulate scores, normalize into [0,1],
// and zero everything outside the road region.
inline ProbabilityMap accumulate(const std::vector<ScoredProposal>& proposals, int width,
                                 int height, const BBox& road_region,
                                 ProbNormalization norm = ProbNormalization::kGlobalMax) {
    for (const ScoredProposal& p : proposals)
        require(BBox{0, 0, width, height}.contains(p.bbox), "accumulate: proposal outside image");

    ProbabilityMap map;
    map.width = width;
    map.height = height;
    map.values = accumulate_raw(proposals, width, height);

    if (norm == ProbNormalization::kGlobalMax) {
        double mx = 0.0;
        for (double v : map.values.data) mx = std::max(mx, v);
        if (mx > 0.0)
            for (double& v : map.values.data) v /= mx;
        else
            std::fill(map.values.data.begin(), map.values.data.end(), 0.0);
    } else {
        std::vector<ScoredProposal> ones(proposals);
        for (ScoredProposal& p : ones) p.score = 1.0;
        Grid<double> count = accumulate_raw(ones, width, height);
        for (size_t i = 0; i < map.values.data.size(); ++i) {
            double c = count.data[i];
            map.values.data[i] = c > 0.5 ? std::clamp(map.values.data[i] / std::round(c), 0.0, 1.0)
                                         : 0.0;
        }
    }

    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            if (!road_region.contains(x, y)) map.values.at(x, y) = 0.0;
    return map;
}

}  // namespace tinyod
