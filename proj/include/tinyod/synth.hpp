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
#include "tinyod/rng.hpp"

namespace tinyod {

struct GenerationError : Error {
    using Error::Error;
};

// Declarative synthetic road scene. Identical specs render bit-identical
// scenes; every random choice flows from `seed`.
struct SceneSpec {
    uint64_t seed = 1;
    int width = 320;
    int height = 240;

    int near_count = 2;   // large obstacles close to the camera
    int far_count = 1;    // tiny obstacles near the horizon
    double base_height_px = 30.0;  // obstacle height at distance zero
    double beta = 0.02;            // perspective decay of the height law

    // Distance bands for the obstacle centers, in pixels above the bottom.
    double near_d_min = 20.0, near_d_max = 45.0;
    double far_d_min = 78.0, far_d_max = 115.0;

    double near_contrast = 0.30;  // luminance offset of near obstacles vs road
    double far_contrast = 0.12;   // the hard case: barely off the road color

    bool zebra = true;
    bool bricks = true;
    bool shadows = true;

    double road_gray = 0.45;
    double noise = 0.015;
    double horizon_frac = 0.35;  // horizon line as a fraction of image height
};

struct Scene {
    Raster image;  // RGB
    Mask mask;
    std::vector<BBox> gt_boxes;
};

// Pixel height of a fixed-size object whose center sits d_bottom pixels above
// the image bottom: h = base / (1 + beta * d).
inline double perspective_height(double base_height_px, double beta, double d_bottom) {
    return base_height_px / (1.0 + beta * d_bottom);
}

namespace detail {

struct RoadShape {
    int horizon_y;
    double bottom_left, bottom_right;  // road span at y = height-1
    double top_left, top_right;        // road span at the horizon

    double left_at(int y, int height) const {
        double t = static_cast<double>(y - horizon_y) / (height - 1 - horizon_y);
        return top_left + t * (bottom_left - top_left);
    }
    double right_at(int y, int height) const {
        double t = static_cast<double>(y - horizon_y) / (height - 1 - horizon_y);
        return top_right + t * (bottom_right - top_right);
    }
    bool on_road(int x, int y, int height) const {
        if (y < horizon_y) return false;
        return x >= left_at(y, height) && x <= right_at(y, height);
    }
};

inline RoadShape road_shape(const SceneSpec& spec) {
    RoadShape r;
    r.horizon_y = static_cast<int>(std::lround(spec.horizon_frac * spec.height));
    r.bottom_left = 0.08 * spec.width;
    r.bottom_right = 0.92 * spec.width;
    r.top_left = 0.40 * spec.width;
    r.top_right = 0.60 * spec.width;
    return r;
}

}  // namespace detail

// Renders the scene: road trapezoid with texture distractors, sky and berms
// outside it, and flat-colored box obstacles whose size follows the
// perspective height law. The mask and ground-truth boxes match the rendered
// obstacle pixels exactly; distractors stay road-labeled.
inline Scene generate(const SceneSpec& spec) {
    require(spec.width >= 64 && spec.height >= 48, "generate: scene too small");
    Rng rng(spec.seed);
    detail::RoadShape road = detail::road_shape(spec);

    Scene scene;
    scene.image = Raster(spec.width, spec.height, 3);
    scene.mask = Mask(spec.width, spec.height, label::kNonRoad);

    // Background: sky above the horizon, berms beside the road, road inside.
    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
            double n = rng.uniform(-spec.noise, spec.noise);
            if (y < road.horizon_y) {
                double t = static_cast<double>(y) / road.horizon_y;
                scene.image.at(x, y, 0) = std::clamp(0.62 + 0.08 * t + n, 0.0, 1.0);
                scene.image.at(x, y, 1) = std::clamp(0.72 + 0.06 * t + n, 0.0, 1.0);
                scene.image.at(x, y, 2) = std::clamp(0.85 + 0.04 * t + n, 0.0, 1.0);
            } else if (road.on_road(x, y, spec.height)) {
                double shade = spec.road_gray + 0.03 * (static_cast<double>(y) / spec.height);
                for (int c = 0; c < 3; ++c)
                    scene.image.at(x, y, c) = std::clamp(shade + n, 0.0, 1.0);
                scene.mask.at(x, y) = label::kRoad;
            } else {
                scene.image.at(x, y, 0) = std::clamp(0.30 + n, 0.0, 1.0);
                scene.image.at(x, y, 1) = std::clamp(0.36 + n, 0.0, 1.0);
                scene.image.at(x, y, 2) = std::clamp(0.28 + n, 0.0, 1.0);
            }
        }
    }

    auto paint_road_rect = [&](const BBox& b, double dr, double dg, double db, bool multiply) {
        for (int y = std::max(b.y, road.horizon_y); y < std::min(b.y2(), spec.height); ++y)
            for (int x = std::max(b.x, 0); x < std::min(b.x2(), spec.width); ++x) {
                if (scene.mask.at(x, y) != label::kRoad) continue;
                double d[3] = {dr, dg, db};
                for (int c = 0; c < 3; ++c) {
                    double v = scene.image.at(x, y, c);
                    scene.image.at(x, y, c) = std::clamp(multiply ? v * d[c] : v + d[c], 0.0, 1.0);
                }
            }
    };

    // Distractors live in the near field and never touch the mask.
    if (spec.zebra) {
        int stripes = 3 + rng.uniform_int(3);
        int y0 = spec.height - 18 - rng.uniform_int(20);
        for (int s = 0; s < stripes; ++s) {
            int sy = y0 - s * 14;
            double l = road.left_at(sy, spec.height), r = road.right_at(sy, spec.height);
            int margin = static_cast<int>(0.18 * (r - l));
            paint_road_rect(BBox{static_cast<int>(l) + margin, sy,
                                 static_cast<int>(r - l) - 2 * margin, 6},
                            0.32, 0.32, 0.32, false);
        }
    }
    if (spec.bricks) {
        int band_top = road.horizon_y + static_cast<int>(0.35 * (spec.height - road.horizon_y));
        int band_bottom = band_top + static_cast<int>(0.25 * (spec.height - road.horizon_y));
        for (int y = band_top; y < band_bottom; y += 9)
            paint_road_rect(BBox{0, y, spec.width, 1}, -0.045, -0.045, -0.045, false);
        for (int x = rng.uniform_int(24); x < spec.width; x += 24)
            paint_road_rect(BBox{x, band_top, 1, band_bottom - band_top}, -0.045, -0.045, -0.045,
                            false);
    }
    if (spec.shadows) {
        int n = 1 + rng.uniform_int(2);
        for (int s = 0; s < n; ++s) {
            int sw = 40 + rng.uniform_int(60);
            int sh = 20 + rng.uniform_int(30);
            int sx = rng.uniform_int(std::max(1, spec.width - sw));
            int sy = road.horizon_y + rng.uniform_int(std::max(1, spec.height - road.horizon_y - sh));
            paint_road_rect(BBox{sx, sy, sw, sh}, 0.82, 0.82, 0.84, true);
        }
    }

    // Obstacles. Far ones first so the tiny boxes get first pick of the space.
    struct Want {
        double d_min, d_max, contrast;
    };
    std::vector<Want> wants;
    for (int i = 0; i < spec.far_count; ++i)
        wants.push_back({spec.far_d_min, spec.far_d_max, spec.far_contrast});
    for (int i = 0; i < spec.near_count; ++i)
        wants.push_back({spec.near_d_min, spec.near_d_max, spec.near_contrast});

    for (const Want& want : wants) {
        bool placed = false;
        for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
            double d = rng.uniform(want.d_min, want.d_max);
            double cy = spec.height - d;
            int h = std::max(4, static_cast<int>(std::lround(
                                    perspective_height(spec.base_height_px, spec.beta, d) *
                                    rng.uniform(0.9, 1.1))));
            int w = std::max(4, static_cast<int>(std::lround(h * rng.uniform(0.85, 1.3))));
            int y = static_cast<int>(std::lround(cy - h / 2.0));
            double l = road.left_at(y + h, spec.height), r = road.right_at(y + h, spec.height);
            if (r - l < w + 8) continue;
            int x = static_cast<int>(l) + 4 +
                    rng.uniform_int(std::max(1, static_cast<int>(r - l) - w - 8));
            BBox box{x, y, w, h};
            // Fully on the road, with a small separation from other obstacles.
            bool ok = y > road.horizon_y && box.y2() < spec.height;
            for (int yy = box.y; yy < box.y2() && ok; ++yy)
                for (int xx = box.x; xx < box.x2() && ok; ++xx)
                    if (scene.mask.at(xx, yy) != label::kRoad) ok = false;
            for (const BBox& other : scene.gt_boxes)
                if (intersect(expand(box, 3), other).valid()) ok = false;
            if (!ok) continue;

            double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
            double color[3];
            for (int c = 0; c < 3; ++c)
                color[c] = std::clamp(
                    spec.road_gray + sign * want.contrast + rng.uniform(-0.02, 0.02), 0.02, 0.98);
            for (int yy = box.y; yy < box.y2(); ++yy)
                for (int xx = box.x; xx < box.x2(); ++xx) {
                    for (int c = 0; c < 3; ++c)
                        scene.image.at(xx, yy, c) =
                            std::clamp(color[c] + rng.uniform(-spec.noise, spec.noise), 0.0, 1.0);
                    scene.mask.at(xx, yy) = label::kObstacle;
                }
            scene.gt_boxes.push_back(box);
            placed = true;
        }
        if (!placed) throw GenerationError("generate: no room left for an obstacle");
    }
    return scene;
}

// Bounding rectangle of the road-labeled pixels; the usual source of the
// road region R.
inline BBox road_bounds(const Mask& m) {
    int x1 = m.width, y1 = m.height, x2 = -1, y2 = -1;
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x)
            if (m.at(x, y) == label::kRoad) {
                x1 = std::min(x1, x);
                y1 = std::min(y1, y);
                x2 = std::max(x2, x);
                y2 = std::max(y2, y);
            }
    if (x2 < 0) return BBox{};
    return BBox{x1, y1, x2 - x1 + 1, y2 - y1 + 1};
}

}  // namespace tinyod
