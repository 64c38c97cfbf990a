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

#include <cstdlib>
#include <map>

#include "tinyod/edge.hpp"

namespace tinyod {

// Superpixel label map over one layer region. Ids are contiguous 0..count-1
// and every id's pixel set stays 4-connected.
struct SuperpixelLabels {
    BBox region;
    Grid<int> labels;  // region-local storage
    int count = 0;

    int at_global(int gx, int gy) const { return labels.at(gx - region.x, gy - region.y); }
};

struct SuperpixelParams {
    double edge_weight = 0.5;  // lambda on the (1 - edge) crossing term
    int max_iterations = 10;
    // Near-tied costs resolve toward a clearly larger neighbor, so twin
    // fragments of one uniform region get absorbed instead of deadlocking.
    double tie_band = 0.04;
    double absorb_ratio = 1.25;
};

namespace detail {

// Picks a grid whose tile count lands as close to `target` as possible while
// roughly matching the region aspect.
inline void choose_grid(int target, int w, int h, int& gx, int& gy) {
    gx = 1;
    gy = 1;
    long long best_err = std::numeric_limits<long long>::max();
    double best_aspect = std::numeric_limits<double>::max();
    for (int rows = 1; rows <= std::min(h, target); ++rows) {
        int cols = std::max(1, static_cast<int>(std::lround(static_cast<double>(target) / rows)));
        cols = std::min(cols, w);
        long long err = std::llabs(static_cast<long long>(cols) * rows - target);
        double aspect = std::abs(static_cast<double>(cols) / rows - static_cast<double>(w) / h);
        if (err < best_err || (err == best_err && aspect < best_aspect)) {
            best_err = err;
            best_aspect = aspect;
            gx = cols;
            gy = rows;
        }
    }
}

// True when removing p from its superpixel keeps the remaining member pixels
// of that superpixel 4-connected around p (local simple-point test).
inline bool removal_keeps_connected(const Grid<int>& labels, int x, int y) {
    int own = labels.at(x, y);
    // Ring positions clockwise from north; orthogonal neighbors sit at even slots.
    static constexpr int rx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
    static constexpr int ry[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
    bool member[8];
    int ortho = 0;
    for (int i = 0; i < 8; ++i) {
        int nx = x + rx[i], ny = y + ry[i];
        member[i] = labels.in_bounds(nx, ny) && labels.at(nx, ny) == own;
        if (member[i] && i % 2 == 0) ++ortho;
    }
    if (ortho == 0) return false;
    // Count 4-connected components of the member ring cells: an orthogonal cell
    // connects to an adjacent diagonal cell only when both are members.
    int transitions = 0;
    for (int i = 0; i < 8; ++i) {
        int j = (i + 1) % 8;
        bool linked = member[i] && member[j];
        if (!linked && (member[i] || member[j])) ++transitions;
    }
    // Each component contributes two boundary transitions around the ring.
    int components = transitions / 2;
    return components <= 1;
}

}  // namespace detail

// Grid-seeded iterative boundary refinement. Starts from a regular tiling and
// repeatedly reassigns boundary pixels to the adjacent superpixel with the
// lowest cost, where cost combines color distance to the superpixel mean with
// a term that rewards leaving the boundary on strong enhanced-edge pixels.
// Moves that would disconnect or empty a superpixel are skipped. Deterministic
// for fixed inputs; `seed` is accepted for interface uniformity but the
// refinement itself draws no random numbers.
inline SuperpixelLabels segment(const Raster& img, const EdgeMap& enhanced, int target_count,
                                uint64_t seed, const SuperpixelParams& params = {}) {
    (void)seed;
    const BBox region = enhanced.region;
    require(BBox{0, 0, img.width, img.height}.contains(region), "segment: region outside image");
    long long pixels = region.area();
    require(target_count >= 2 && target_count <= pixels, "segment: target_count out of range");

    int w = region.w, h = region.h;
    int gx = 0, gy = 0;
    detail::choose_grid(target_count, w, h, gx, gy);
    int count = gx * gy;

    SuperpixelLabels out;
    out.region = region;
    out.count = count;
    out.labels = Grid<int>(w, h, 0);
    for (int y = 0; y < h; ++y) {
        int row = static_cast<int>((static_cast<long long>(y) * gy) / h);
        for (int x = 0; x < w; ++x) {
            int col = static_cast<int>((static_cast<long long>(x) * gx) / w);
            out.labels.at(x, y) = row * gx + col;
        }
    }

    int channels = img.channels;
    std::vector<long long> sizes(count, 0);
    for (int v : out.labels.data) ++sizes[v];

    static constexpr int nx4[4] = {0, 1, 0, -1};
    static constexpr int ny4[4] = {-1, 0, 1, 0};

    std::vector<double> mean(static_cast<size_t>(count) * channels, 0.0);
    for (int pass = 0; pass < params.max_iterations; ++pass) {
        std::fill(mean.begin(), mean.end(), 0.0);
        std::vector<long long> n(count, 0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                int s = out.labels.at(x, y);
                ++n[s];
                for (int c = 0; c < channels; ++c)
                    mean[static_cast<size_t>(s) * channels + c] += img.at(region.x + x, region.y + y, c);
            }
        for (int s = 0; s < count; ++s)
            if (n[s] > 0)
                for (int c = 0; c < channels; ++c) mean[static_cast<size_t>(s) * channels + c] /= n[s];

        int moves = 0;
        // Alternate the scan direction so boundary migration cascades both
        // ways instead of one pixel per pass against the scan.
        bool forward = (pass % 2) == 0;
        for (int yi = 0; yi < h; ++yi) {
            int y = forward ? yi : h - 1 - yi;
            for (int xi = 0; xi < w; ++xi) {
                int x = forward ? xi : w - 1 - xi;
                int own = out.labels.at(x, y);
                int neighbor_labels[4];
                bool boundary = false;
                for (int d = 0; d < 4; ++d) {
                    int px = x + nx4[d], py = y + ny4[d];
                    if (!out.labels.in_bounds(px, py)) {
                        neighbor_labels[d] = -1;
                        continue;
                    }
                    neighbor_labels[d] = out.labels.at(px, py);
                    if (neighbor_labels[d] != own) boundary = true;
                }
                if (!boundary) continue;

                double e_here = enhanced.values.at(x, y);
                auto cost_for = [&](int cand) {
                    double color = 0.0;
                    for (int c = 0; c < channels; ++c) {
                        double d = img.at(region.x + x, region.y + y, c) -
                                   mean[static_cast<size_t>(cand) * channels + c];
                        color += d * d;
                    }
                    color = std::sqrt(color / channels);
                    // Edge support: the strongest crossing this assignment
                    // would leave between p and a neighbor outside `cand`.
                    double support = 0.0;
                    for (int d = 0; d < 4; ++d) {
                        int px = x + nx4[d], py = y + ny4[d];
                        if (!out.labels.in_bounds(px, py) || neighbor_labels[d] == cand) continue;
                        support = std::max(support, 0.5 * (e_here + enhanced.values.at(px, py)));
                    }
                    return color + params.edge_weight * (1.0 - std::min(1.0, support));
                };

                int best = own;
                double best_cost = cost_for(own);
                for (int d = 0; d < 4; ++d) {
                    int cand = neighbor_labels[d];
                    if (cand < 0 || cand == own) continue;
                    bool seen = false;
                    for (int e = 0; e < d; ++e)
                        if (neighbor_labels[e] == cand) seen = true;
                    if (seen) continue;
                    double cost = cost_for(cand);
                    bool better = cost < best_cost - params.tie_band;
                    bool absorb = std::abs(cost - best_cost) <= params.tie_band &&
                                  static_cast<double>(sizes[cand]) >
                                      params.absorb_ratio * static_cast<double>(sizes[best]);
                    if (better || absorb) {
                        best = cand;
                        best_cost = cost;
                    }
                }
                if (best == own) continue;
                if (sizes[own] <= 1) continue;
                if (!detail::removal_keeps_connected(out.labels, x, y)) continue;
                out.labels.at(x, y) = best;
                --sizes[own];
                ++sizes[best];
                ++moves;
            }
        }
        if (moves == 0) break;
    }
    return out;
}

// Maximal boundary segment between one pair of adjacent superpixels. Chain
// pixels live on the higher-labeled side of the crossing; `pair` is ordered
// (low id, high id) and side areas travel along for downstream featurization.
struct AtomicEdge {
    std::vector<std::pair<int, int>> pixels;  // global coordinates, walk order
    std::pair<int, int> pair{0, 0};
    int layer = 0;  // 1-based layer index, stamped by the pipeline
    long long area_low = 0;   // pixel count of pair.first
    long long area_high = 0;  // pixel count of pair.second
};

// Extracts one AtomicEdge per adjacent pair per connected boundary segment.
// A pixel belongs to the boundary set of pair (a,b), a<b, when it carries
// label b and has a 4-neighbor carrying label a; the union of all chains is
// exactly the set of pixels with a lower-labeled 4-neighbor.
inline std::vector<AtomicEdge> atomic_edges(const SuperpixelLabels& sp) {
    const Grid<int>& L = sp.labels;
    int w = L.width, h = L.height;
    static constexpr int nx4[4] = {0, 1, 0, -1};
    static constexpr int ny4[4] = {-1, 0, 1, 0};

    std::vector<long long> sizes(sp.count, 0);
    for (int v : L.data) ++sizes[v];

    // Collect boundary membership per (low, high) pair.
    std::map<std::pair<int, int>, std::vector<int>> members;  // -> linear pixel ids
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int own = L.at(x, y);
            int seen[4];
            int seen_n = 0;
            for (int d = 0; d < 4; ++d) {
                int px = x + nx4[d], py = y + ny4[d];
                if (!L.in_bounds(px, py)) continue;
                int other = L.at(px, py);
                if (other >= own) continue;
                bool dup = false;
                for (int i = 0; i < seen_n; ++i)
                    if (seen[i] == other) dup = true;
                if (dup) continue;
                seen[seen_n++] = other;
                members[{other, own}].push_back(y * w + x);
            }
        }

    std::vector<AtomicEdge> out;
    std::vector<int> chain_id(static_cast<size_t>(w) * h, -1);
    for (auto& [pr, px_list] : members) {
        // Split into 8-connected components, then order each by a walk from an
        // endpoint (or the smallest pixel on cycles).
        for (int id : px_list) chain_id[id] = 0;  // membership marker
        for (int id : px_list) {
            if (chain_id[id] != 0) continue;
            // BFS component gather.
            std::vector<int> comp;
            std::vector<int> stack{id};
            chain_id[id] = 1;
            while (!stack.empty()) {
                int cur = stack.back();
                stack.pop_back();
                comp.push_back(cur);
                int cx = cur % w, cy = cur / w;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        int qx = cx + dx, qy = cy + dy;
                        if (qx < 0 || qx >= w || qy < 0 || qy >= h) continue;
                        int qid = qy * w + qx;
                        if (chain_id[qid] == 0) {
                            chain_id[qid] = 1;
                            stack.push_back(qid);
                        }
                    }
            }
            std::sort(comp.begin(), comp.end());
            // Degree within the component; walk starts at a degree<=1 pixel.
            auto degree = [&](int cur) {
                int cx = cur % w, cy = cur / w, deg = 0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        int qx = cx + dx, qy = cy + dy;
                        if (qx < 0 || qx >= w || qy < 0 || qy >= h) continue;
                        if (chain_id[qy * w + qx] >= 1 &&
                            std::binary_search(comp.begin(), comp.end(), qy * w + qx))
                            ++deg;
                    }
                return deg;
            };
            int start = comp[0];
            for (int cand : comp)
                if (degree(cand) <= 1) {
                    start = cand;
                    break;
                }
            // Greedy walk visiting every component pixel once.
            AtomicEdge edge;
            edge.pair = pr;
            edge.area_low = sizes[pr.first];
            edge.area_high = sizes[pr.second];
            std::vector<int> order;
            std::vector<int> dfs{start};
            chain_id[start] = 2;
            while (!dfs.empty()) {
                int cur = dfs.back();
                dfs.pop_back();
                order.push_back(cur);
                int cx = cur % w, cy = cur / w;
                // Push unvisited neighbors, nearest-first ordering via fixed scan.
                for (int dy = 1; dy >= -1; --dy)
                    for (int dx = 1; dx >= -1; --dx) {
                        if (dx == 0 && dy == 0) continue;
                        int qx = cx + dx, qy = cy + dy;
                        if (qx < 0 || qx >= w || qy < 0 || qy >= h) continue;
                        int qid = qy * w + qx;
                        if (chain_id[qid] == 1 && std::binary_search(comp.begin(), comp.end(), qid)) {
                            chain_id[qid] = 2;
                            dfs.push_back(qid);
                        }
                    }
            }
            for (int cur : order)
                edge.pixels.emplace_back(sp.region.x + cur % w, sp.region.y + cur / w);
            out.push_back(std::move(edge));
        }
        for (int id : px_list) chain_id[id] = -1;
    }
    return out;
}

}  // namespace tinyod
