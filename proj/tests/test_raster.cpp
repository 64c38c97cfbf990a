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
#include <filesystem>
#include <fstream>

#include "tinyod/image_io.hpp"
#include "tinyod/raster.hpp"
#include "tinyod/rng.hpp"

using namespace tinyod;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "tinyod_test_raster";
    fs::create_directories(dir);
    return dir / name;
}

// Brute-force IoU: count pixels in each box and in the overlap one by one.
double iou_oracle(const BBox& a, const BBox& b) {
    long long inter = 0, only_a = 0, only_b = 0;
    int x1 = std::min(a.x, b.x) - 2, x2 = std::max(a.x2(), b.x2()) + 2;
    int y1 = std::min(a.y, b.y) - 2, y2 = std::max(a.y2(), b.y2()) + 2;
    for (int y = y1; y < y2; ++y)
        for (int x = x1; x < x2; ++x) {
            bool in_a = a.contains(x, y), in_b = b.contains(x, y);
            if (in_a && in_b)
                ++inter;
            else if (in_a)
                ++only_a;
            else if (in_b)
                ++only_b;
        }
    long long uni = inter + only_a + only_b;
    return uni > 0 ? static_cast<double>(inter) / uni : 0.0;
}

}  // namespace

TEST_CASE("load_image maps PGM bytes to [0,1]") {
    fs::path p = temp_file("gray.pgm");
    {
        std::ofstream out(p, std::ios::binary);
        out << "P5\n2 2\n255\n";
        unsigned char bytes[4] = {0, 255, 128, 64};
        out.write(reinterpret_cast<char*>(bytes), 4);
    }
    Raster img = load_image(p.string());
    REQUIRE(img.width == 2);
    REQUIRE(img.height == 2);
    REQUIRE(img.channels == 1);
    CHECK(img.at(0, 0) == 0.0);
    CHECK(img.at(1, 0) == 1.0);
    CHECK(img.at(0, 1) == 128.0 / 255.0);
    CHECK(img.at(1, 1) == 64.0 / 255.0);
}

TEST_CASE("load_image keeps PPM channels") {
    fs::path p = temp_file("color.ppm");
    {
        std::ofstream out(p, std::ios::binary);
        out << "P6\n2 1\n255\n";
        unsigned char bytes[6] = {255, 0, 0, 0, 0, 255};
        out.write(reinterpret_cast<char*>(bytes), 6);
    }
    Raster img = load_image(p.string());
    REQUIRE(img.channels == 3);
    CHECK(img.at(0, 0, 0) == 1.0);
    CHECK(img.at(0, 0, 2) == 0.0);
    CHECK(img.at(1, 0, 2) == 1.0);
}

TEST_CASE("load_image ascii PGM and comments") {
    fs::path p = temp_file("ascii.pgm");
    {
        std::ofstream out(p);
        out << "P2\n# a comment\n3 1\n100\n0 50 100\n";
    }
    Raster img = load_image(p.string());
    REQUIRE(img.width == 3);
    CHECK(img.at(1, 0) == 0.5);
    CHECK(img.at(2, 0) == 1.0);
}

TEST_CASE("truncated PNG raises a format error") {
    fs::path good = temp_file("ok.png");
    Raster img(8, 6, 3);
    for (size_t i = 0; i < img.data.size(); ++i) img.data[i] = (i % 7) / 7.0;
    save_png(good.string(), img);

    std::ifstream in(good, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    fs::path bad = temp_file("truncated.png");
    {
        std::ofstream out(bad, std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    }
    CHECK_THROWS_AS(load_image(bad.string()), FormatError);
}

TEST_CASE("missing file raises an io error") {
    CHECK_THROWS_AS(load_image("/nonexistent/nowhere.png"), IoError);
}

TEST_CASE("PNG round trip preserves 8-bit samples") {
    fs::path p = temp_file("roundtrip.png");
    Raster img(5, 4, 3);
    Rng rng(7);
    for (double& v : img.data) v = rng.uniform_int(256) / 255.0;
    save_png(p.string(), img);
    Raster back = load_image(p.string());
    REQUIRE(back.width == img.width);
    REQUIRE(back.channels == 3);
    for (size_t i = 0; i < img.data.size(); ++i) CHECK(back.data[i] == img.data[i]);
}

TEST_CASE("mask io enforces the label palette") {
    fs::path p = temp_file("mask.png");
    Mask m(4, 3, label::kRoad);
    m.at(1, 1) = label::kObstacle;
    m.at(2, 2) = label::kNonRoad;
    m.at(3, 0) = label::kIgnore;
    save_mask(p.string(), m);
    Mask back = load_mask(p.string());
    REQUIRE(back.width == 4);
    CHECK(back.at(1, 1) == label::kObstacle);
    CHECK(back.at(3, 0) == label::kIgnore);

    // An off-palette value must be rejected.
    Raster bad(2, 2, 1);
    bad.at(0, 0) = 7.0 / 255.0;
    fs::path pb = temp_file("bad_mask.png");
    save_png(pb.string(), bad);
    CHECK_THROWS_AS(load_mask(pb.string()), FormatError);
}

TEST_CASE("iou matches the spec examples") {
    BBox a{0, 0, 10, 10};
    CHECK(iou(a, a) == 1.0);
    CHECK(iou(a, BBox{20, 20, 5, 5}) == 0.0);
    // 50 shared pixels over 150 total.
    CHECK(iou(a, BBox{5, 0, 10, 10}) == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(iou(a, BBox{5, 0, 10, 10}) == iou_oracle(a, BBox{5, 0, 10, 10}));
}

TEST_CASE("iou is symmetric and respects containment on random boxes") {
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        BBox a{rng.uniform_int(30), rng.uniform_int(30), 1 + rng.uniform_int(20),
               1 + rng.uniform_int(20)};
        BBox b{rng.uniform_int(30), rng.uniform_int(30), 1 + rng.uniform_int(20),
               1 + rng.uniform_int(20)};
        CHECK(iou(a, b) == iou(b, a));
        CHECK(iou(a, b) == Catch::Approx(iou_oracle(a, b)).margin(1e-12));
    }
    // Containment: inner box fully inside the outer one.
    BBox outer{2, 3, 12, 9};
    BBox inner{4, 5, 5, 4};
    CHECK(iou(outer, inner) ==
          Catch::Approx(static_cast<double>(inner.area()) / outer.area()).epsilon(1e-12));
}

TEST_CASE("integral of constants") {
    Raster zeros(6, 5, 1, 0.0);
    IntegralMap mz = integral(zeros);
    CHECK(mz.box_sum(BBox{0, 0, 6, 5}) == 0.0);
    CHECK(mz.box_sum(BBox{2, 2, 3, 2}) == 0.0);

    Raster ones(4, 4, 1, 1.0);
    IntegralMap mo = integral(ones);
    CHECK(mo.box_sum(BBox{1, 1, 2, 2}) == 4.0);
    CHECK(mo.box_sum(BBox{0, 0, 4, 4}) == 16.0);
}

TEST_CASE("integral matches brute-force sums on random rasters") {
    Rng rng(1234);
    Raster img(8, 8, 1);
    for (double& v : img.data) v = rng.uniform();
    IntegralMap m = integral(img);
    for (int trial = 0; trial < 100; ++trial) {
        BBox b{rng.uniform_int(8), rng.uniform_int(8), 1 + rng.uniform_int(8),
               1 + rng.uniform_int(8)};
        b = clip(b, BBox{0, 0, 8, 8});
        if (!b.valid()) continue;
        double direct = 0.0;
        for (int y = b.y; y < b.y2(); ++y)
            for (int x = b.x; x < b.x2(); ++x) direct += img.at(x, y);
        double rel = std::abs(m.box_sum(b) - direct) / std::max(1.0, std::abs(direct));
        CHECK(rel <= 1e-6);
    }
    CHECK_THROWS_AS(integral(Raster(3, 3, 3)), ContractError);
}

TEST_CASE("rgb_to_hsv basics") {
    Raster img(3, 1, 3);
    // red, gray, white
    img.at(0, 0, 0) = 1.0;
    img.at(1, 0, 0) = img.at(1, 0, 1) = img.at(1, 0, 2) = 0.5;
    img.at(2, 0, 0) = img.at(2, 0, 1) = img.at(2, 0, 2) = 1.0;
    Raster hsv = rgb_to_hsv(img);
    CHECK(hsv.at(0, 0, 0) == 0.0);   // hue of red
    CHECK(hsv.at(0, 0, 1) == 1.0);   // saturation
    CHECK(hsv.at(1, 0, 1) == 0.0);   // gray has no saturation
    CHECK(hsv.at(1, 0, 2) == 0.5);   // value
    CHECK(hsv.at(2, 0, 2) == 1.0);
}

TEST_CASE("16-bit PNG round trip") {
    fs::path p = temp_file("deep.png");
    Grid<double> g(9, 3, 0.0);
    Rng rng(5);
    for (double& v : g.data) v = rng.uniform_int(65536) / 65535.0;
    save_png16(p.string(), g);
    Raster back = load_image(p.string());
    REQUIRE(back.channels == 1);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 9; ++x)
            CHECK(back.at(x, y) == Catch::Approx(g.at(x, y)).margin(1e-9));
}
