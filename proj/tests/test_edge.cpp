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

#include <catch2/catch_amalgamated.hpp>

#include "tinyod/edge.hpp"
#include "tinyod/synth.hpp"

using namespace tinyod;

namespace {

LayerPartition nested_layers() {
    LayerPartition layers;
    layers.k_count = 4;
    layers.road_region = BBox{0, 0, 64, 48};
    layers.regions = {BBox{0, 0, 64, 48}, BBox{8, 6, 40, 30}, BBox{12, 10, 28, 20},
                      BBox{16, 14, 16, 10}};
    return layers;
}

std::vector<EdgeMap> random_maps(const LayerPartition& layers, uint64_t seed) {
    Rng rng(seed);
    std::vector<EdgeMap> maps;
    for (const BBox& r : layers.regions) {
        EdgeMap m(r);
        for (double& v : m.values.data) v = rng.uniform();
        maps.push_back(std::move(m));
    }
    return maps;
}

}  // namespace

TEST_CASE("constant raster has an all-zero edge map") {
    Raster img(32, 24, 3, 0.5);
    EdgeMap e = detect_edges(img);
    for (double v : e.values.data) CHECK(v == 0.0);
}

TEST_CASE("vertical step responds on the step column only") {
    Raster img(20, 10, 1, 0.0);
    for (int y = 0; y < 10; ++y)
        for (int x = 10; x < 20; ++x) img.at(x, y) = 1.0;
    EdgeMap e = detect_edges(img);

    double step_max = 0.0, far_max = 0.0;
    for (int y = 2; y < 8; ++y) {
        step_max = std::max({step_max, e.values.at(9, y), e.values.at(10, y)});
        for (int x = 0; x < 20; ++x)
            if (x <= 7 || x >= 12) far_max = std::max(far_max, e.values.at(x, y));
    }
    CHECK(step_max == 1.0);
    CHECK(far_max <= 0.05);
}

TEST_CASE("degenerate region is rejected") {
    Raster img(32, 24, 1, 0.5);
    CHECK_THROWS_AS(detect_edges(img, BBox{0, 0, 2, 10}), ContractError);
    CHECK_THROWS_AS(detect_edges(img, BBox{0, 0, 10, 2}), ContractError);
}

TEST_CASE("detector is translation equivariant away from borders") {
    auto stamp = [](Raster& img, int ox, int oy) {
        for (int y = 0; y < 6; ++y)
            for (int x = 0; x < 6; ++x) {
                img.at(ox + x, oy + y, 0) = 0.15;
                img.at(ox + x, oy + y, 1) = 0.2;
                img.at(ox + x, oy + y, 2) = 0.1;
            }
    };
    Raster a(48, 40, 3, 0.7), b(48, 40, 3, 0.7);
    stamp(a, 14, 12);
    stamp(b, 17, 14);  // shifted by (3,2)
    EdgeMap ea = detect_edges(a), eb = detect_edges(b);
    // Compare where both stamps' influence is interior.
    for (int y = 4; y < 28; ++y)
        for (int x = 4; x < 32; ++x) CHECK(ea.values.at(x, y) == eb.values.at(x + 3, y + 2));
}

TEST_CASE("synthetic contour out-responds the road texture") {
    SceneSpec spec;
    spec.seed = 11;
    spec.near_count = 1;
    spec.far_count = 0;
    spec.zebra = false;
    spec.bricks = false;
    spec.shadows = false;
    Scene scene = generate(spec);
    EdgeMap e = detect_edges(scene.image);

    // Contour band: within 1 px of an obstacle/non-obstacle transition.
    double on_sum = 0.0, off_sum = 0.0;
    long long on_n = 0, off_n = 0;
    const BBox& gt = scene.gt_boxes.at(0);
    for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x) {
            if (scene.mask.at(x, y) != label::kRoad && scene.mask.at(x, y) != label::kObstacle)
                continue;
            BBox in = expand(gt, -2);
            BBox out = expand(gt, 2);
            bool near_contour = out.contains(x, y) && !in.contains(x, y);
            if (near_contour) {
                on_sum += e.values.at(x, y);
                ++on_n;
            } else if (!expand(gt, 6).contains(x, y) && scene.mask.at(x, y) == label::kRoad) {
                off_sum += e.values.at(x, y);
                ++off_n;
            }
        }
    REQUIRE(on_n > 0);
    REQUIRE(off_n > 0);
    CHECK(on_sum / on_n > 3.0 * (off_sum / off_n));
}

TEST_CASE("fusion with one layer is the identity") {
    LayerPartition layers;
    layers.k_count = 1;
    layers.road_region = BBox{0, 0, 30, 20};
    layers.regions = {BBox{0, 0, 30, 20}};
    auto maps = random_maps(layers, 4);
    FusedMaps fused = fuse_far_to_near(maps, layers);
    REQUIRE(fused.raw.size() == 1);
    CHECK(fused.raw[0].values == maps[0].values);
}

TEST_CASE("telescoped sum of equal values") {
    LayerPartition layers;
    layers.k_count = 3;
    layers.road_region = BBox{0, 0, 24, 24};
    layers.regions = {BBox{0, 0, 24, 24}, BBox{4, 4, 16, 16}, BBox{8, 8, 8, 8}};
    std::vector<EdgeMap> maps;
    for (const BBox& r : layers.regions) maps.emplace_back(r, 0.2);
    FusedMaps fused = fuse_far_to_near(maps, layers);
    // A pixel inside the deepest region sees all three layers.
    CHECK(fused.raw[0].at_global(10, 10) == Catch::Approx(0.6).margin(1e-12));
    CHECK(fused.raw[1].at_global(10, 10) == Catch::Approx(0.4).margin(1e-12));
    CHECK(fused.raw[2].at_global(10, 10) == Catch::Approx(0.2).margin(1e-12));
    // Outside the deeper regions only the local layer contributes.
    CHECK(fused.raw[0].at_global(1, 1) == Catch::Approx(0.2).margin(1e-12));
}

TEST_CASE("telescoping identity is exact on random layered inputs") {
    for (uint64_t seed = 0; seed < 20; ++seed) {
        LayerPartition layers = nested_layers();
        auto maps = random_maps(layers, 100 + seed);
        FusedMaps fused = fuse_far_to_near(maps, layers);
        int k = layers.k_count;
        for (int k0 = 0; k0 < k; ++k0) {
            const BBox& r = layers.regions[k0];
            for (int y = r.y; y < r.y2(); ++y)
                for (int x = r.x; x < r.x2(); ++x) {
                    // Far-to-near accumulation over the layers containing p.
                    double acc = 0.0;
                    for (int j = k - 1; j >= k0; --j)
                        if (maps[j].contains_global(x, y)) acc += maps[j].at_global(x, y);
                    CHECK(fused.raw[k0].at_global(x, y) == acc);
                }
        }
    }
}

TEST_CASE("fusion never decreases evidence and rescale preserves ranking") {
    LayerPartition layers = nested_layers();
    auto maps = random_maps(layers, 55);
    FusedMaps fused = fuse_far_to_near(maps, layers);
    for (int k0 = 0; k0 < layers.k_count; ++k0) {
        const BBox& r = layers.regions[k0];
        for (int y = r.y; y < r.y2(); ++y)
            for (int x = r.x; x < r.x2(); ++x)
                CHECK(fused.raw[k0].at_global(x, y) >= maps[k0].at_global(x, y));
        // Ranking: scaled order equals raw order on sampled pixel pairs.
        Rng rng(900 + k0);
        for (int t = 0; t < 200; ++t) {
            int x1 = r.x + rng.uniform_int(r.w), y1 = r.y + rng.uniform_int(r.h);
            int x2 = r.x + rng.uniform_int(r.w), y2 = r.y + rng.uniform_int(r.h);
            bool raw_less = fused.raw[k0].at_global(x1, y1) < fused.raw[k0].at_global(x2, y2);
            bool scaled_less =
                fused.scaled[k0].at_global(x1, y1) < fused.scaled[k0].at_global(x2, y2);
            CHECK(raw_less == scaled_less);
        }
        double mx = 0.0;
        for (double v : fused.scaled[k0].values.data) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            mx = std::max(mx, v);
        }
        CHECK(mx == 1.0);
    }
}

TEST_CASE("fusion rejects misaligned maps") {
    LayerPartition layers = nested_layers();
    auto maps = random_maps(layers, 31);
    maps[2].region.x += 1;
    CHECK_THROWS_AS(fuse_far_to_near(maps, layers), ContractError);
}
