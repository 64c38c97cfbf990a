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

#include "tinyod/occlusion.hpp"
#include "tinyod/synth.hpp"

using namespace tinyod;

namespace {

// Independent oracle: builds the centered normal equations densely and solves
// them by Gauss-Jordan elimination with partial pivoting.
std::vector<double> ridge_oracle(const std::vector<std::vector<double>>& x,
                                 const std::vector<double>& u, double gamma, double* bias) {
    size_t m = x.size();
    int v = static_cast<int>(x[0].size());
    std::vector<double> mx(v, 0.0);
    double mu = 0.0;
    for (size_t i = 0; i < m; ++i) {
        for (int j = 0; j < v; ++j) mx[j] += x[i][j];
        mu += u[i];
    }
    for (int j = 0; j < v; ++j) mx[j] /= m;
    mu /= m;

    std::vector<std::vector<double>> aug(v, std::vector<double>(v + 1, 0.0));
    for (size_t i = 0; i < m; ++i)
        for (int j = 0; j < v; ++j) {
            double cj = x[i][j] - mx[j];
            aug[j][v] += cj * (u[i] - mu);
            for (int k = 0; k < v; ++k) aug[j][k] += cj * (x[i][k] - mx[k]);
        }
    for (int j = 0; j < v; ++j) aug[j][j] += gamma;

    for (int col = 0; col < v; ++col) {
        int pivot = col;
        for (int r = col + 1; r < v; ++r)
            if (std::abs(aug[r][col]) > std::abs(aug[pivot][col])) pivot = r;
        std::swap(aug[col], aug[pivot]);
        double d = aug[col][col];
        for (int k = col; k <= v; ++k) aug[col][k] /= d;
        for (int r = 0; r < v; ++r) {
            if (r == col) continue;
            double f = aug[r][col];
            for (int k = col; k <= v; ++k) aug[r][k] -= f * aug[col][k];
        }
    }
    std::vector<double> c(v);
    for (int j = 0; j < v; ++j) c[j] = aug[j][v];
    *bias = mu;
    for (int j = 0; j < v; ++j) *bias -= c[j] * mx[j];
    return c;
}

double ridge_objective(const std::vector<std::vector<double>>& x, const std::vector<double>& u,
                       double gamma, const std::vector<double>& c, double b) {
    double obj = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        double pred = b;
        for (size_t j = 0; j < c.size(); ++j) pred += c[j] * x[i][j];
        obj += (u[i] - pred) * (u[i] - pred);
    }
    for (double w : c) obj += gamma * w * w;
    return obj;
}

// Steepest descent with the exact quadratic step size; an independent route to
// the same minimizer.
void ridge_gradient_descent(const std::vector<std::vector<double>>& x,
                            const std::vector<double>& u, double gamma, std::vector<double>& c,
                            double& b) {
    size_t m = x.size();
    int v = static_cast<int>(x[0].size());
    c.assign(v, 0.0);
    b = 0.0;
    for (int iter = 0; iter < 20000; ++iter) {
        std::vector<double> grad_c(v, 0.0);
        double grad_b = 0.0;
        for (size_t i = 0; i < m; ++i) {
            double pred = b;
            for (int j = 0; j < v; ++j) pred += c[j] * x[i][j];
            double r = pred - u[i];
            for (int j = 0; j < v; ++j) grad_c[j] += 2.0 * r * x[i][j];
            grad_b += 2.0 * r;
        }
        for (int j = 0; j < v; ++j) grad_c[j] += 2.0 * gamma * c[j];
        double gg = grad_b * grad_b;
        for (double g : grad_c) gg += g * g;
        if (gg < 1e-24) break;
        // alpha = g'g / g'Hg with H the exact Hessian.
        std::vector<double> hx(v, 0.0);
        double hb = 0.0;
        for (size_t i = 0; i < m; ++i) {
            double dot = grad_b;
            for (int j = 0; j < v; ++j) dot += grad_c[j] * x[i][j];
            for (int j = 0; j < v; ++j) hx[j] += 2.0 * dot * x[i][j];
            hb += 2.0 * dot;
        }
        for (int j = 0; j < v; ++j) hx[j] += 2.0 * gamma * grad_c[j];
        double ghg = grad_b * hb;
        for (int j = 0; j < v; ++j) ghg += grad_c[j] * hx[j];
        if (ghg <= 0) break;
        double alpha = gg / ghg;
        for (int j = 0; j < v; ++j) c[j] -= alpha * grad_c[j];
        b -= alpha * grad_b;
    }
}

AtomicEdge straight_chain(int x0, int y0, int len, int layer = 1) {
    AtomicEdge e;
    e.pair = {0, 1};
    e.layer = layer;
    e.area_low = 100;
    e.area_high = 100;
    for (int i = 0; i < len; ++i) e.pixels.emplace_back(x0 + i, y0);
    return e;
}

}  // namespace

TEST_CASE("edge features on a zero enhanced map") {
    Raster img(40, 30, 3, 0.5);
    EdgeMap enhanced(BBox{0, 0, 40, 30}, 0.0);
    LayerPartition layers;
    layers.k_count = 2;
    layers.regions = {BBox{0, 0, 40, 30}, BBox{10, 10, 20, 10}};
    AtomicEdge e = straight_chain(5, 12, 8, 1);

    EdgeFeature f = edge_features(e, img, enhanced, layers);
    CHECK(f[0] == 0.0);  // mean strength
    CHECK(f[1] == 0.0);  // max strength
    CHECK(f[3] == Catch::Approx(7.0 / 8.0));  // endpoint distance / length
    CHECK(f[11] == 0.5);                      // layer 1 of 2
    CHECK(f[13] == 1.0);                      // equal side areas

    EdgeFeature again = edge_features(e, img, enhanced, layers);
    for (int i = 0; i < kEdgeFeatureDim; ++i) CHECK(f[i] == again[i]);
}

TEST_CASE("edge features separate contour from texture on generated scenes") {
    SceneSpec spec;
    spec.seed = 21;
    spec.near_count = 1;
    spec.far_count = 0;
    spec.zebra = false;
    spec.shadows = false;
    Scene scene = generate(spec);
    BBox region = road_bounds(scene.mask);
    EdgeMap enhanced = crop_edge_map(detect_edges(scene.image), region);
    LayerPartition layers;
    layers.k_count = 1;
    layers.regions = {region};
    layers.road_region = region;

    SuperpixelLabels sp =
        segment(scene.image, enhanced, std::clamp(static_cast<int>(region.area() / 400), 16, 4096), 1);
    auto edges = atomic_edges(sp);
    for (auto& e : edges) e.layer = 1;
    auto labels = label_edges(edges, scene.mask);

    double on_diff = 0.0, off_diff = 0.0;
    int on_n = 0, off_n = 0;
    for (size_t i = 0; i < edges.size(); ++i) {
        EdgeFeature f = edge_features(edges[i], scene.image, enhanced, layers);
        double mean_diff = (f[4] + f[5] + f[6]) / 3.0;
        if (labels[i]) {
            on_diff += mean_diff;
            ++on_n;
        } else {
            off_diff += mean_diff;
            ++off_n;
        }
    }
    REQUIRE(on_n > 0);
    REQUIRE(off_n > 0);
    CHECK(on_diff / on_n > off_diff / off_n);
}

TEST_CASE("label_edges matches contour proximity semantics") {
    Mask gt(40, 30, label::kRoad);
    for (int y = 10; y < 20; ++y)
        for (int x = 10; x < 20; ++x) gt.at(x, y) = label::kObstacle;

    // Chain exactly on the contour.
    AtomicEdge on = straight_chain(10, 10, 10);
    // Chain far from any contour (> 2 px).
    AtomicEdge off = straight_chain(25, 2, 10);
    // Chain with exactly half its pixels within reach: rho=0.5 must include it.
    AtomicEdge half;
    half.pair = {0, 1};
    for (int i = 0; i < 10; ++i) half.pixels.emplace_back(13 + i, 22);  // 2 px below the contour row 19
    auto labels = label_edges({on, off, half}, gt, 0.5, 2);
    CHECK(labels[0] == 1);
    CHECK(labels[1] == 0);
    CHECK(labels[2] == 1);

    // Same half chain but rho just above the achieved fraction flips to 0.
    // Pixels 13..19 sit above obstacle columns (within 2 px of contour row 19);
    // pixels 20..22 are past the right edge but still near the corner contour.
    auto labels_strict = label_edges({half}, gt, 0.99, 2);
    CHECK(labels_strict[0] == 0);
}

TEST_CASE("train_ridge degenerate targets") {
    Rng rng(3);
    std::vector<std::vector<double>> x(30, std::vector<double>(5));
    for (auto& row : x)
        for (double& v : row) v = rng.uniform(-2, 2);

    std::vector<double> zeros(30, 0.0), ones(30, 1.0);
    RidgeModel mz = train_ridge(x, zeros, 1.0);
    for (double w : mz.weights) CHECK(std::abs(w) < 1e-12);
    CHECK(std::abs(mz.bias) < 1e-12);

    RidgeModel mo = train_ridge(x, ones, 1.0);
    for (double w : mo.weights) CHECK(std::abs(w) < 1e-12);
    CHECK(mo.bias == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("train_ridge matches the normal-equations oracle") {
    Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::vector<double>> x(50, std::vector<double>(14));
        std::vector<double> u(50);
        for (auto& row : x)
            for (double& v : row) v = rng.uniform(-1, 3);
        for (double& v : u) v = rng.uniform();

        RidgeModel model = train_ridge(x, u, 1.0);
        double oracle_bias = 0.0;
        std::vector<double> oracle_c = ridge_oracle(x, u, 1.0, &oracle_bias);
        for (int j = 0; j < 14; ++j)
            CHECK(std::abs(model.weights[j] - oracle_c[j]) <= 1e-8);
        CHECK(std::abs(model.bias - oracle_bias) <= 1e-8);
        CHECK(std::abs(ridge_objective(x, u, 1.0, model.weights, model.bias) -
                       ridge_objective(x, u, 1.0, oracle_c, oracle_bias)) <= 1e-10);

        // The fit never does worse than the constant predictor.
        std::vector<double> zero_w(14, 0.0);
        double mean_u = 0.0;
        for (double v : u) mean_u += v;
        mean_u /= u.size();
        CHECK(ridge_objective(x, u, 1.0, model.weights, model.bias) <=
              ridge_objective(x, u, 1.0, zero_w, mean_u) + 1e-12);
    }
}

TEST_CASE("closed form agrees with gradient descent") {
    Rng rng(23);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<std::vector<double>> x(40, std::vector<double>(6));
        std::vector<double> u(40);
        for (auto& row : x)
            for (double& v : row) v = rng.uniform(-1, 1);
        for (double& v : u) v = rng.uniform();
        RidgeModel model = train_ridge(x, u, 0.7);
        std::vector<double> gd_c;
        double gd_b = 0.0;
        ridge_gradient_descent(x, u, 0.7, gd_c, gd_b);
        for (int j = 0; j < 6; ++j) CHECK(std::abs(model.weights[j] - gd_c[j]) <= 1e-5);
        CHECK(std::abs(model.bias - gd_b) <= 1e-5);
    }
}

TEST_CASE("classify paints constant chain scores") {
    RidgeModel constant;
    constant.dim = kEdgeFeatureDim;
    constant.weights.assign(kEdgeFeatureDim, 0.0);
    constant.bias = 0.7;

    AtomicEdge e1 = straight_chain(2, 3, 6);
    AtomicEdge e2 = straight_chain(4, 8, 5);
    std::vector<EdgeFeature> feats(2, EdgeFeature{});
    OcclusionEdgeMap occ = classify({e1, e2}, feats, constant, BBox{0, 0, 20, 15});

    for (auto [x, y] : e1.pixels) CHECK(occ.at_global(x, y) == 0.7);
    for (auto [x, y] : e2.pixels) CHECK(occ.at_global(x, y) == 0.7);
    long long nonzero = 0;
    for (double v : occ.values.data)
        if (v != 0.0) ++nonzero;
    CHECK(nonzero == 11);

    // A negative bias clamps to an all-zero map.
    constant.bias = -1.0;
    OcclusionEdgeMap dark = classify({e1, e2}, feats, constant, BBox{0, 0, 20, 15});
    for (double v : dark.values.data) CHECK(v == 0.0);

    // Pre-clamp scores are monotone in the bias.
    constant.bias = 0.2;
    EdgeFeature probe{};
    double low = constant.predict(probe);
    constant.bias = 0.4;
    CHECK(constant.predict(probe) > low);
}

TEST_CASE("trained classifier separates contour chains on held-out scenes") {
    auto front = [](const Scene& scene, std::vector<AtomicEdge>& edges,
                    std::vector<EdgeFeature>& feats, std::vector<int>& labels) {
        BBox region = road_bounds(scene.mask);
        EdgeMap enhanced = crop_edge_map(detect_edges(scene.image), region);
        LayerPartition layers;
        layers.k_count = 1;
        layers.regions = {region};
        layers.road_region = region;
        SuperpixelLabels sp = segment(
            scene.image, enhanced, std::clamp(static_cast<int>(region.area() / 400), 16, 4096), 1);
        edges = atomic_edges(sp);
        for (auto& e : edges) e.layer = 1;
        labels = label_edges(edges, scene.mask);
        for (const auto& e : edges) feats.push_back(edge_features(e, scene.image, enhanced, layers));
    };

    std::vector<EdgeFeature> train_x;
    std::vector<int> train_u;
    for (uint64_t seed = 40; seed < 46; ++seed) {
        SceneSpec spec;
        spec.seed = seed;
        spec.near_count = 2;
        spec.far_count = 0;
        Scene scene = generate(spec);
        std::vector<AtomicEdge> edges;
        std::vector<EdgeFeature> feats;
        std::vector<int> labels;
        front(scene, edges, feats, labels);
        train_x.insert(train_x.end(), feats.begin(), feats.end());
        train_u.insert(train_u.end(), labels.begin(), labels.end());
    }
    RidgeModel model = train_occlusion_classifier(train_x, train_u, 1.0);

    double pos = 0.0, neg = 0.0;
    int pos_n = 0, neg_n = 0;
    for (uint64_t seed = 50; seed < 54; ++seed) {
        SceneSpec spec;
        spec.seed = seed;
        spec.near_count = 2;
        spec.far_count = 0;
        Scene scene = generate(spec);
        std::vector<AtomicEdge> edges;
        std::vector<EdgeFeature> feats;
        std::vector<int> labels;
        front(scene, edges, feats, labels);
        for (size_t i = 0; i < edges.size(); ++i) {
            double s = std::clamp(model.predict(feats[i]), 0.0, 1.0);
            if (labels[i]) {
                pos += s;
                ++pos_n;
            } else {
                neg += s;
                ++neg_n;
            }
        }
    }
    REQUIRE(pos_n > 0);
    REQUIRE(neg_n > 0);
    CHECK(pos / pos_n > neg / neg_n);
}
