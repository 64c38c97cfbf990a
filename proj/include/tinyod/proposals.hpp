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

#include <set>

#include "tinyod/occlusion.hpp"

namespace tinyod {

// Candidate obstacle box with its edge-based objectness and origin layer.
struct Proposal {
    BBox bbox;  // global image coordinates
    double objectness = 0.0;
    int layer = 0;  // 1-based; 0 until merge stamps it
};

// Connected chain of occlusion-edge pixels with bounded cumulative turning.
struct EdgeGroup {
    std::vector<std::pair<int, int>> pixels;  // global coordinates
    BBox bbox;
    double strength = 0.0;  // sum of member pixel scores
};

struct ProposalParams {
    std::vector<int> window_scales{16, 24, 32, 48, 64, 96, 128};
    std::vector<double> window_aspects{0.5, 1.0, 2.0};
    double stride_fraction = 0.25;
    double component_threshold = 0.3;
    std::vector<double> component_dilations{1.0, 1.2, 1.5};
    double nms_iou = 0.8;
    double kappa = 1.5;
    double eta = 1.0;
};

// Splits the nonzero occlusion pixels into 8-connected walks whose cumulative
// direction change stays below 90 degrees; branches at junctions start fresh
// groups. Deterministic scan order.
inline std::vector<EdgeGroup> extract_edge_groups(const OcclusionEdgeMap& occ) {
    int w = occ.region.w, h = occ.region.h;
    const Grid<double>& v = occ.values;
    Grid<uint8_t> visited(w, h, 0);
    std::vector<EdgeGroup> groups;

    static constexpr int dx8[8] = {0, 1, 1, 1, 0, -1, -1, -1};
    static constexpr int dy8[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
    // Direction index -> angle in 45 degree units.
    auto turn_cost = [](int a, int b) {
        int d = std::abs(a - b) % 8;
        return std::min(d, 8 - d) * 45;
    };

    struct Item {
        int x, y;
        int group;
        int dir;      // incoming direction, -1 if fresh
        int turning;  // cumulative degrees on the walk so far
    };

    for (int sy = 0; sy < h; ++sy) {
        for (int sx = 0; sx < w; ++sx) {
            if (visited.at(sx, sy) || v.at(sx, sy) <= 0.0) continue;
            std::vector<Item> stack;
            visited.at(sx, sy) = 1;
            groups.emplace_back();
            stack.push_back({sx, sy, static_cast<int>(groups.size()) - 1, -1, 0});
            while (!stack.empty()) {
                Item it = stack.back();
                stack.pop_back();
                EdgeGroup& g = groups[it.group];
                g.pixels.emplace_back(occ.region.x + it.x, occ.region.y + it.y);
                g.strength += v.at(it.x, it.y);

                int dirs[8];
                int nn = 0;
                for (int d = 0; d < 8; ++d) {
                    int nx = it.x + dx8[d], ny = it.y + dy8[d];
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                    if (visited.at(nx, ny) || v.at(nx, ny) <= 0.0) continue;
                    dirs[nn++] = d;
                }
                if (it.dir >= 0)  // continue along the smallest turn
                    std::sort(dirs, dirs + nn, [&](int a, int b) {
                        int ta = turn_cost(it.dir, a), tb = turn_cost(it.dir, b);
                        return ta != tb ? ta < tb : a < b;
                    });
                for (int i = 0; i < nn; ++i) {
                    int d = dirs[i];
                    int nx = it.x + dx8[d], ny = it.y + dy8[d];
                    visited.at(nx, ny) = 1;
                    int turning = it.dir < 0 ? 0 : it.turning + turn_cost(it.dir, d);
                    if (i == 0 && turning < 90) {
                        stack.push_back({nx, ny, it.group, d, turning});
                    } else {
                        // Branch or turn budget exhausted: open a new group.
                        groups.emplace_back();
                        stack.push_back({nx, ny, static_cast<int>(groups.size()) - 1, -1, 0});
                    }
                }
            }
        }
    }

    for (EdgeGroup& g : groups) {
        int x1 = g.pixels[0].first, y1 = g.pixels[0].second, x2 = x1, y2 = y1;
        for (auto [px, py] : g.pixels) {
            x1 = std::min(x1, px);
            y1 = std::min(y1, py);
            x2 = std::max(x2, px);
            y2 = std::max(y2, py);
        }
        g.bbox = BBox{x1, y1, x2 - x1 + 1, y2 - y1 + 1};
    }
    return groups;
}

// Edge-box style objectness: groups wholly inside the box count for it, groups
// straddling the border count against it, and the balance is normalized by the
// box perimeter raised to kappa. Never negative.
inline double score_box(const BBox& b, const OcclusionEdgeMap& occ,
                        const std::vector<EdgeGroup>& groups, double kappa = 1.5,
                        double eta = 1.0) {
    require(intersect(b, occ.region).valid(), "score_box: box does not meet the map region");
    double inside = 0.0, straddle = 0.0;
    for (const EdgeGroup& g : groups) {
        if (b.contains(g.bbox)) {
            inside += g.strength;
            continue;
        }
        if (!intersect(b, g.bbox).valid()) continue;
        bool touches = false;
        for (auto [px, py] : g.pixels)
            if (b.contains(px, py)) {
                touches = true;
                break;
            }
        if (touches) straddle += g.strength;
    }
    double denom = std::pow(2.0 * (b.w + b.h), kappa);
    return std::max(0.0, (inside - eta * straddle) / denom);
}

namespace detail {

inline void push_window_candidates(const BBox& region, const ProposalParams& p,
                                   std::vector<BBox>& out) {
    for (int scale : p.window_scales) {
        for (double aspect : p.window_aspects) {
            int bw = static_cast<int>(std::lround(scale * std::sqrt(aspect)));
            int bh = static_cast<int>(std::lround(scale / std::sqrt(aspect)));
            if (bw < 2 || bh < 2 || bw > region.w || bh > region.h) continue;
            int sx = std::max(1, static_cast<int>(std::lround(p.stride_fraction * bw)));
            int sy = std::max(1, static_cast<int>(std::lround(p.stride_fraction * bh)));
            for (int y = region.y;; y += sy) {
                bool last_row = y + bh >= region.y2();
                int yy = last_row ? region.y2() - bh : y;
                for (int x = region.x;; x += sx) {
                    bool last_col = x + bw >= region.x2();
                    int xx = last_col ? region.x2() - bw : x;
                    out.push_back(BBox{xx, yy, bw, bh});
                    if (last_col) break;
                }
                if (last_row) break;
            }
        }
    }
}

inline void push_component_candidates(const OcclusionEdgeMap& occ, const ProposalParams& p,
                                      std::vector<BBox>& out) {
    int w = occ.region.w, h = occ.region.h;
    Grid<uint8_t> seen(w, h, 0);
    static constexpr int dx8[8] = {0, 1, 1, 1, 0, -1, -1, -1};
    static constexpr int dy8[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
    for (int sy = 0; sy < h; ++sy)
        for (int sx = 0; sx < w; ++sx) {
            if (seen.at(sx, sy) || occ.values.at(sx, sy) < p.component_threshold) continue;
            int x1 = sx, y1 = sy, x2 = sx, y2 = sy;
            std::vector<std::pair<int, int>> stack{{sx, sy}};
            seen.at(sx, sy) = 1;
            while (!stack.empty()) {
                auto [cx, cy] = stack.back();
                stack.pop_back();
                x1 = std::min(x1, cx);
                y1 = std::min(y1, cy);
                x2 = std::max(x2, cx);
                y2 = std::max(y2, cy);
                for (int d = 0; d < 8; ++d) {
                    int nx = cx + dx8[d], ny = cy + dy8[d];
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                    if (seen.at(nx, ny) || occ.values.at(nx, ny) < p.component_threshold) continue;
                    seen.at(nx, ny) = 1;
                    stack.emplace_back(nx, ny);
                }
            }
            BBox comp{occ.region.x + x1, occ.region.y + y1, x2 - x1 + 1, y2 - y1 + 1};
            for (double f : p.component_dilations) {
                int bw = std::max(1, static_cast<int>(std::lround(comp.w * f)));
                int bh = std::max(1, static_cast<int>(std::lround(comp.h * f)));
                BBox cand{comp.x + (comp.w - bw) / 2, comp.y + (comp.h - bh) / 2, bw, bh};
                cand = clip(cand, occ.region);
                if (cand.valid()) out.push_back(cand);
            }
        }
}

}  // namespace detail

// Extracts up to `budget` proposals from one layer's occlusion edge map:
// dense sliding windows plus boxes around thresholded occlusion components,
// scored, sorted, and deduplicated by NMS.
inline std::vector<Proposal> extract(const OcclusionEdgeMap& occ, int budget,
                                     const ProposalParams& params = {}) {
    require(budget >= 1, "extract: budget must be at least 1");
    std::vector<EdgeGroup> groups = extract_edge_groups(occ);
    if (groups.empty()) return {};

    std::vector<BBox> candidates;
    detail::push_window_candidates(occ.region, params, candidates);
    detail::push_component_candidates(occ, params, candidates);
    std::sort(candidates.begin(), candidates.end(), [](const BBox& a, const BBox& b) {
        return std::tie(a.x, a.y, a.w, a.h) < std::tie(b.x, b.y, b.w, b.h);
    });
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::vector<Proposal> scored;
    scored.reserve(candidates.size());
    for (const BBox& b : candidates) {
        double s = score_box(b, occ, groups, params.kappa, params.eta);
        if (s > 0.0) scored.push_back(Proposal{b, s, 0});
    }
    std::sort(scored.begin(), scored.end(), [](const Proposal& a, const Proposal& b) {
        if (a.objectness != b.objectness) return a.objectness > b.objectness;
        return std::tie(a.bbox.x, a.bbox.y, a.bbox.w, a.bbox.h) <
               std::tie(b.bbox.x, b.bbox.y, b.bbox.w, b.bbox.h);
    });

    std::vector<Proposal> kept;
    for (const Proposal& cand : scored) {
        if (static_cast<int>(kept.size()) >= budget) break;
        bool suppressed = false;
        for (const Proposal& k : kept)
            if (iou(k.bbox, cand.bbox) >= params.nms_iou) {
                suppressed = true;
                break;
            }
        if (!suppressed) kept.push_back(cand);
    }
    return kept;
}

// Union of the per-layer proposal sets, each tagged with its 1-based origin
// layer. No cross-layer NMS: the layers are complementary.
inline std::vector<Proposal> merge(const std::vector<std::vector<Proposal>>& per_layer) {
    std::vector<Proposal> out;
    for (size_t k = 0; k < per_layer.size(); ++k)
        for (Proposal p : per_layer[k]) {
            p.layer = static_cast<int>(k) + 1;
            out.push_back(p);
        }
    return out;
}

// Keeps proposals that sit mostly on the road region; with ground truth
// available (training time), also drops proposals whose dominant pixel class
// is non-road.
inline std::vector<Proposal> filter_road(const std::vector<Proposal>& all, const BBox& road_region,
                                         const Mask* gt = nullptr, double min_inside = 0.8) {
    std::vector<Proposal> out;
    for (const Proposal& p : all) {
        long long inside = intersect(p.bbox, road_region).area();
        if (static_cast<double>(inside) < min_inside * static_cast<double>(p.bbox.area())) continue;
        if (gt) {
            long long counts[3] = {0, 0, 0};
            BBox b = clip(p.bbox, BBox{0, 0, gt->width, gt->height});
            for (int y = b.y; y < b.y2(); ++y)
                for (int x = b.x; x < b.x2(); ++x) {
                    uint8_t l = gt->at(x, y);
                    if (l <= label::kNonRoad) ++counts[l];
                }
            if (counts[label::kNonRoad] > counts[label::kRoad] &&
                counts[label::kNonRoad] > counts[label::kObstacle])
                continue;
        }
        out.push_back(p);
    }
    return out;
}

}  // namespace tinyod
