// Copyright 2026 The JEI Surface Editing Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "jei/slice.hpp"

using namespace jei;

namespace {

/// Voxel value encodes its own index so any pixel can be traced back.
Volume coded_volume(Index3 dims) {
    std::vector<float> data;
    for (int k = 0; k < dims[2]; ++k)
        for (int j = 0; j < dims[1]; ++j)
            for (int i = 0; i < dims[0]; ++i) data.push_back(static_cast<float>(i + 10 * j + 100 * k) / 1000.0f);
    return Volume(dims, {0.5, 0.7, 0.9}, {1.0, 2.0, 3.0}, std::move(data));
}

double loop_area(const std::vector<Vec3>& line, int ua, int va) {
    double a = 0.0;
    for (std::size_t i = 0; i + 1 < line.size(); ++i)
        a += line[i][ua] * line[i + 1][va] - line[i + 1][ua] * line[i][va];
    return 0.5 * a;
}

}  // namespace

TEST_CASE("quantization is round-half-up on [0, 1]") {
    CHECK(quantize_intensity(0.0) == 0);
    CHECK(quantize_intensity(1.0) == 255);
    CHECK(quantize_intensity(-0.3) == 0);
    CHECK(quantize_intensity(7.0) == 255);
    CHECK(quantize_intensity(0.5) == 128);
    CHECK(quantize_intensity(1.0 / 510.0) == 1);
    CHECK(quantize_intensity(0.99 / 510.0) == 0);
    for (int n = 0; n <= 255; ++n) CHECK(quantize_intensity(n / 255.0) == n);
}

TEST_CASE("axis names and plane axes") {
    CHECK(slice_axis_from_string("x") == SliceAxis::x);
    CHECK(to_string(SliceAxis::y) == "y");
    CHECK_THROWS_AS(slice_axis_from_string("w"), Error);
    CHECK(plane_axes(SliceAxis::z) == std::array<int, 2>{0, 1});
    CHECK(plane_axes(SliceAxis::y) == std::array<int, 2>{0, 2});
    CHECK(plane_axes(SliceAxis::x) == std::array<int, 2>{1, 2});
}

TEST_CASE("slices read the right voxels") {
    const Volume v = coded_volume({7, 5, 4});
    for (SliceAxis a : {SliceAxis::x, SliceAxis::y, SliceAxis::z}) {
        const int w = static_cast<int>(a);
        const auto [ua, va] = plane_axes(a);
        for (int index = 0; index < v.dims()[w]; ++index) {
            const SliceImage img = extract_slice(v, a, index);
            REQUIRE(img.width == v.dims()[ua]);
            REQUIRE(img.height == v.dims()[va]);
            REQUIRE(img.pixels.size() == static_cast<std::size_t>(img.width * img.height));
            for (int q = 0; q < img.height; ++q)
                for (int p = 0; p < img.width; ++p) {
                    Index3 ijk{};
                    ijk[w] = index;
                    ijk[ua] = p;
                    ijk[va] = q;
                    CHECK(img.pixels[q * img.width + p] == quantize_intensity(v.at(ijk[0], ijk[1], ijk[2])));
                }
        }
    }
    CHECK_THROWS_WITH_AS(extract_slice(v, SliceAxis::z, 4), "slice index 4 out of range [0, 3]", Error);
    CHECK_THROWS_AS(extract_slice(v, SliceAxis::x, -1), Error);
}

TEST_CASE("downsampled slices") {
    const Volume v = coded_volume({9, 6, 3});
    CHECK(slice_step(v, SliceAxis::z, 0) == 1);
    CHECK(slice_step(v, SliceAxis::z, 9) == 1);
    CHECK(slice_step(v, SliceAxis::z, 4) == 3);
    CHECK(slice_step(v, SliceAxis::x, 2) == 3);
    const SliceImage img = extract_slice(v, SliceAxis::z, 1, 3);
    CHECK(img.width == 3);
    CHECK(img.height == 2);
    CHECK(img.pixels[1 * 3 + 2] == quantize_intensity(v.at(6, 3, 1)));
}

TEST_CASE("sphere section is one closed loop on the circle") {
    const Vec3 c{1.0, -2.0, 0.5};
    const double r = 5.0;
    const Mesh m = make_ellipsoid_mesh(c, {r, r, r}, 4);
    for (SliceAxis a : {SliceAxis::x, SliceAxis::y, SliceAxis::z}) {
        const int w = static_cast<int>(a);
        const auto [ua, va] = plane_axes(a);
        for (double off : {0.0, 1.3, -3.7, 4.9}) {
            const auto lines = mesh_plane_section(m.vertices(), m.triangles(), a, c[w] + off);
            REQUIRE(lines.size() == 1);
            const auto& loop = lines[0];
            REQUIRE(loop.size() > 3);
            CHECK(loop.front() == loop.back());
            const double rc = std::sqrt(r * r - off * off);
            double length = 0.0;
            for (std::size_t i = 0; i < loop.size(); ++i) {
                CHECK(loop[i][w] == c[w] + off);
                const double d = std::hypot(loop[i][ua] - c[ua], loop[i][va] - c[va]);
                CHECK(d <= rc + 1e-9);
                CHECK(d >= rc - 0.05);
                if (i > 0) length += distance(loop[i], loop[i - 1]);
            }
            CHECK(length <= 2 * std::numbers::pi * rc + 1e-9);
            if (rc > 3.0) CHECK(length == doctest::Approx(2 * std::numbers::pi * rc).epsilon(0.01));
            CHECK(std::abs(loop_area(loop, ua, va)) > 0.0);
        }
        CHECK(mesh_plane_section(m.vertices(), m.triangles(), a, c[w] + r + 0.1).empty());
    }
}

TEST_CASE("section orientation follows the mesh winding") {
    const Mesh m = make_ellipsoid_mesh({}, {3, 3, 3}, 3);
    const auto up = mesh_plane_section(m.vertices(), m.triangles(), SliceAxis::z, 0.4);
    std::vector<Triangle> flipped;
    for (const Triangle& t : m.triangles()) flipped.push_back({t[0], t[2], t[1]});
    const auto down = mesh_plane_section(m.vertices(), flipped, SliceAxis::z, 0.4);
    REQUIRE(up.size() == 1);
    REQUIRE(down.size() == 1);
    CHECK(loop_area(up[0], 0, 1) * loop_area(down[0], 0, 1) < 0.0);
}

TEST_CASE("two objects give two loops and open meshes give open chains") {
    Mesh a = make_ellipsoid_mesh({0, 0, 0}, {2, 2, 2}, 2);
    Mesh b = make_ellipsoid_mesh({6, 0, 0}, {2, 2, 2}, 2);
    std::vector<Vec3> verts = a.vertices();
    std::vector<Triangle> tris = a.triangles();
    const int off = static_cast<int>(verts.size());
    verts.insert(verts.end(), b.vertices().begin(), b.vertices().end());
    for (Triangle t : b.triangles()) tris.push_back({t[0] + off, t[1] + off, t[2] + off});
    CHECK(mesh_plane_section(verts, tris, SliceAxis::z, 0.3).size() == 2);

    const std::vector<Vec3> tv{{0, 0, -1}, {1, 0, 1}, {0, 1, 1}};
    const std::vector<Triangle> one{{0, 1, 2}};
    const auto open = mesh_plane_section(tv, one, SliceAxis::z, 0.0);
    REQUIRE(open.size() == 1);
    REQUIRE(open[0].size() == 2);
    CHECK(open[0][0] != open[0][1]);
}
