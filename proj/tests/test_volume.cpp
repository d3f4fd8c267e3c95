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
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "jei/phantom.hpp"
#include "jei/volume.hpp"

using namespace jei;

namespace {

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("jei_test_" + name);
}

Volume linear_x(int nx, double sx) {
    std::vector<float> data;
    for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < nx; ++i) data.push_back(static_cast<float>(i) / static_cast<float>(nx - 1));
    return Volume({nx, 3, 3}, {sx, 1.0, 1.0}, {}, std::move(data));
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("minimal zero volume loads") {
    std::string bytes = "EVF1\ndims 2 2 2\nspacing 1 1 1\norigin 0 0 0\ndata float32-le\n";
    bytes.append(8 * 4, '\0');
    const auto path = temp_path("zero.evf");
    std::ofstream(path, std::ios::binary) << bytes;
    const Volume v = load_volume(path);
    CHECK(v.dims() == Index3{2, 2, 2});
    CHECK(v.voxel_count() == 8);
    for (float x : v.data()) CHECK(x == 0.0f);
}

TEST_CASE("save then load is bit exact on random volumes") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> dim(2, 9);
    std::uniform_real_distribution<double> sp(0.05, 3.0), org(-50.0, 50.0);
    std::uniform_real_distribution<float> val(0.0f, 1.0f);
    const auto path = temp_path("rt.evf");
    for (int trial = 0; trial < 50; ++trial) {
        Index3 dims{dim(rng), dim(rng), dim(rng)};
        std::vector<float> data(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]);
        for (auto& x : data) x = val(rng);
        const Volume v(dims, {sp(rng), sp(rng), sp(rng)}, {org(rng), org(rng), org(rng)}, std::move(data));
        save_volume(v, path);
        const Volume back = load_volume(path);
        REQUIRE(back == v);
        REQUIRE(back.digest() == v.digest());
    }
}

TEST_CASE("two saves are byte identical") {
    const Volume v = linear_x(5, 0.3);
    save_volume(v, temp_path("a.evf"));
    save_volume(v, temp_path("b.evf"));
    CHECK(read_file(temp_path("a.evf")) == read_file(temp_path("b.evf")));
}

TEST_CASE("truncated payload is rejected") {
    std::string bytes = "EVF1\ndims 4 4 4\nspacing 1 1 1\norigin 0 0 0\ndata float32-le\n";
    bytes.append(63 * 4, '\0');
    std::vector<std::uint8_t> raw(bytes.begin(), bytes.end());
    CHECK_THROWS_WITH_AS(decode_volume(raw), doctest::Contains("data length mismatch"), Error);
}

TEST_CASE("malformed headers and invalid values are rejected") {
    auto decode = [](std::string s) {
        std::vector<std::uint8_t> raw(s.begin(), s.end());
        return decode_volume(raw);
    };
    CHECK_THROWS_AS(decode("EVF2\ndims 2 2 2\nspacing 1 1 1\norigin 0 0 0\ndata float32-le\n"), Error);
    CHECK_THROWS_AS(decode("EVF1\ndims 2 2\nspacing 1 1 1\norigin 0 0 0\ndata float32-le\n"), Error);
    CHECK_THROWS_AS(decode("EVF1\ndims 2 2 2\nspacing 1 0 1\norigin 0 0 0\ndata float32-le\n"), Error);

    std::vector<float> bad(8, 0.5f);
    bad[3] = std::nanf("");
    CHECK_THROWS_AS(Volume({2, 2, 2}, {1, 1, 1}, {}, bad), Error);
    bad[3] = 1.5f;
    CHECK_THROWS_AS(Volume({2, 2, 2}, {1, 1, 1}, {}, bad), Error);
    CHECK_THROWS_AS(Volume({1, 2, 2}, {1, 1, 1}, {}, std::vector<float>(4, 0.0f)), Error);
}

TEST_CASE("invalid volume cannot be saved") {
    const auto path = temp_path("never.evf");
    std::filesystem::remove(path);
    CHECK_THROWS_AS(save_volume(Volume({2, 2, 2}, {1, 1, 1}, {}, std::vector<float>(7, 0.0f)), path), Error);
    CHECK_FALSE(std::filesystem::exists(path));
}

TEST_CASE("sampling") {
    const Volume c = Volume::filled({4, 4, 4}, {0.5, 0.5, 0.5}, {1, 2, 3}, 0.5f);
    CHECK(sample(c, {1.7, 2.3, 4.1}) == doctest::Approx(0.5).epsilon(1e-12));

    std::mt19937_64 rng(3);
    std::vector<float> data(5 * 4 * 3);
    for (auto& x : data) x = std::uniform_real_distribution<float>(0, 1)(rng);
    const Volume r({5, 4, 3}, {0.7, 0.3, 1.1}, {-1, 0.5, 2}, data);
    for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 4; ++j)
            for (int i = 0; i < 5; ++i) CHECK(sample(r, r.voxel_position(i, j, k)) == doctest::Approx(r.at(i, j, k)).epsilon(1e-12));

    const Volume lin = linear_x(6, 0.4);
    const Vec3 mid = (lin.voxel_position(2, 1, 1) + lin.voxel_position(3, 1, 1)) * 0.5;
    CHECK(sample(lin, mid) == doctest::Approx((double(lin.at(2, 1, 1)) + double(lin.at(3, 1, 1))) / 2.0).epsilon(1e-12));

    const auto out = sample_checked(lin, {-5.0, 1.0, 1.0});
    CHECK(out.clamped);
    CHECK(out.value == doctest::Approx(0.0));
    CHECK_FALSE(sample_checked(lin, mid).clamped);
}

TEST_CASE("sampling is Lipschitz with the adjacent-voxel bound") {
    std::mt19937_64 rng(17);
    std::vector<float> data(6 * 6 * 6);
    for (auto& x : data) x = std::uniform_real_distribution<float>(0, 1)(rng);
    const Volume v({6, 6, 6}, {0.5, 0.8, 0.6}, {}, data);
    double max_diff = 0.0;
    for (int k = 0; k < 6; ++k)
        for (int j = 0; j < 6; ++j)
            for (int i = 0; i < 6; ++i) {
                if (i + 1 < 6) max_diff = std::max(max_diff, double(std::abs(v.at(i + 1, j, k) - v.at(i, j, k))));
                if (j + 1 < 6) max_diff = std::max(max_diff, double(std::abs(v.at(i, j + 1, k) - v.at(i, j, k))));
                if (k + 1 < 6) max_diff = std::max(max_diff, double(std::abs(v.at(i, j, k + 1) - v.at(i, j, k))));
            }
    // Trilinear gradients are bounded per axis, so the Euclidean bound carries a sqrt(3).
    const double lip = std::sqrt(3.0) * max_diff / v.min_spacing();
    std::uniform_real_distribution<double> ux(0, 2.5), uy(0, 4.0), uz(0, 3.0), ue(-0.01, 0.01);
    for (int t = 0; t < 500; ++t) {
        const Vec3 p{ux(rng), uy(rng), uz(rng)};
        const Vec3 e{ue(rng), ue(rng), ue(rng)};
        CHECK(std::abs(sample(v, p) - sample(v, p + e)) <= lip * norm(e) + 1e-12);
    }
}

TEST_CASE("directional derivatives") {
    const Volume c = Volume::filled({5, 5, 5}, {1, 1, 1}, {}, 0.3f);
    CHECK(deriv1(c, {2, 2, 2}, {1, 0, 0}).value == doctest::Approx(0.0));
    CHECK(deriv2(c, {2, 2, 2}, {0, 1, 0}).value == doctest::Approx(0.0));

    const Volume lin = linear_x(11, 0.5);  // slope 0.1 per voxel = 0.2 per mm
    const Vec3 p{2.3, 1.0, 1.0};
    CHECK(std::abs(deriv1(lin, p, {1, 0, 0}).value - 0.2) < 1e-6);
    CHECK(std::abs(deriv1(lin, p, {0, 1, 0}).value) < 1e-6);
    CHECK(std::abs(deriv2(lin, p, {1, 0, 0}).value) < 1e-6);
    CHECK_FALSE(deriv1(lin, p, {1, 0, 0}).one_sided);
    const auto edge = deriv1(lin, {0.0, 1.0, 1.0}, {1, 0, 0});
    CHECK(edge.one_sided);
    CHECK(std::abs(edge.value - 0.2) < 1e-6);

    // value = c x^2. The trilinear interpolant is piecewise linear, so its second difference
    // with h = spacing / 2 is exact a quarter cell off the grid and averages to 2c over a cell.
    const double cq = 0.01;
    const int nx = 41;
    const double sx = 0.25;
    std::vector<float> data;
    for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < nx; ++i) data.push_back(static_cast<float>(cq * (i * sx) * (i * sx)));
    const Volume quad({nx, 3, 3}, {sx, 1, 1}, {}, data);
    const double h = quad.derivative_step();
    CHECK(std::abs(deriv2(quad, {5.0 + sx / 4, 1, 1}, {1, 0, 0}).value - 2 * cq) < 2 * cq * h * h + 1e-4);
    double mean = 0.0;
    for (int m = 0; m < 16; ++m) mean += deriv2(quad, {5.0 + sx * (m + 0.5) / 16, 1, 1}, {1, 0, 0}).value / 16;
    CHECK(std::abs(mean - 2 * cq) < 2 * cq * h * h + 1e-4);
    CHECK(std::abs(deriv1(quad, {5.0, 1, 1}, {1, 0, 0}).value - 2 * cq * 5.0) < 1e-4);
}

TEST_CASE("phantom sphere levels") {
    PhantomSpec spec;
    spec.objects.push_back({{15, 15, 15}, {10, 10, 10}, std::nullopt});
    spec.supersample = 1;
    const Phantom ph = make_phantom(spec, {31, 31, 31}, {1, 1, 1});
    CHECK(ph.volume.at(20, 15, 15) == spec.bone_level);
    CHECK(ph.volume.at(30, 15, 15) == spec.background_level);
    REQUIRE(ph.objects.size() == 1);
    CHECK(ph.objects[0].bone({20, 15, 15}) == doctest::Approx(-5.0));
    CHECK(ph.objects[0].bone({30, 15, 15}) == doctest::Approx(5.0));
}

TEST_CASE("phantom truth sits on the intensity transition") {
    PhantomSpec spec;
    spec.objects.push_back({{8, 8, 8}, {5, 4, 4.5}, CartilageCap{{0, 0, 1}, 60, 1.5}});
    const Phantom ph = make_phantom(spec, {41, 41, 41}, {0.4, 0.4, 0.4});
    const auto& t = ph.objects[0];
    int checked = 0;
    for (int k = 0; k < 41; ++k)
        for (int j = 0; j < 41; ++j)
            for (int i = 0; i < 41; ++i) {
                const Vec3 p = ph.volume.voxel_position(i, j, k);
                const double db = t.bone(p), dc = t.cartilage(p);
                const float v = ph.volume.at(i, j, k);
                // Away from the boundaries by more than one voxel the level is pure.
                if (db < -0.8) { CHECK(v == spec.bone_level); ++checked; }
                else if (db > 0.8 && dc < -0.8) { CHECK(v == spec.cartilage_level); ++checked; }
                else if (dc > 0.8 && db > 0.8) { CHECK(v == spec.background_level); ++checked; }
            }
    CHECK(checked > 1000);
}

TEST_CASE("phantom spec validation") {
    PhantomSpec spec;
    spec.objects.push_back({{10, 10, 10}, {5, 5, 5}, std::nullopt});
    spec.objects.push_back({{14, 10, 10}, {5, 5, 5}, std::nullopt});
    CHECK_THROWS_WITH_AS(make_phantom(spec, {41, 41, 41}, {0.5, 0.5, 0.5}), doctest::Contains("overlap"), Error);

    PhantomSpec big;
    big.objects.push_back({{5, 5, 5}, {8, 8, 8}, std::nullopt});
    CHECK_THROWS_AS(make_phantom(big, {21, 21, 21}, {0.5, 0.5, 0.5}), Error);

    PhantomSpec thin;
    thin.objects.push_back({{10, 10, 10}, {4, 4, 4}, CartilageCap{{0, 0, 1}, 60, 0.0}});
    CHECK_THROWS_AS(make_phantom(thin, {41, 41, 41}, {0.5, 0.5, 0.5}), Error);

    PhantomSpec level;
    level.objects.push_back({{10, 10, 10}, {4, 4, 4}, std::nullopt});
    level.bone_level = 1.2f;
    CHECK_THROWS_AS(make_phantom(level, {41, 41, 41}, {0.5, 0.5, 0.5}), Error);
}

TEST_CASE("fluid blob renders at the cartilage level") {
    PhantomSpec spec;
    spec.objects.push_back({{8, 8, 6}, {5, 5, 4}, CartilageCap{{0, 0, 1}, 60, 1.5}});
    spec.fluid = FluidBlob{{8, 8, 12.5}, 1.2};
    const Phantom ph = make_phantom(spec, {41, 41, 41}, {0.4, 0.4, 0.4});
    const Vec3 c = spec.fluid->center;
    const int i = static_cast<int>(std::lround(c.x / 0.4));
    const int j = static_cast<int>(std::lround(c.y / 0.4));
    const int k = static_cast<int>(std::lround(c.z / 0.4));
    CHECK(ph.volume.at(i, j, k) == spec.cartilage_level);
}

TEST_CASE("phantom noise is bounded and seeded") {
    PhantomSpec spec;
    spec.objects.push_back({{6, 6, 6}, {3, 3, 3}, std::nullopt});
    spec.supersample = 1;
    const Phantom clean = make_phantom(spec, {31, 31, 31}, {0.4, 0.4, 0.4});
    spec.noise_amplitude = 0.05;
    spec.seed = 9;
    const Phantom a = make_phantom(spec, {31, 31, 31}, {0.4, 0.4, 0.4});
    const Phantom b = make_phantom(spec, {31, 31, 31}, {0.4, 0.4, 0.4});
    CHECK(a.volume == b.volume);
    CHECK_FALSE(a.volume == clean.volume);
    for (std::size_t n = 0; n < a.volume.voxel_count(); ++n)
        CHECK(std::abs(a.volume.data()[n] - clean.volume.data()[n]) <= 0.05f + 1e-6f);
}

TEST_CASE("phantom file round trip") {
    const std::string text = R"({
      "grid": {"dims": [40, 40, 60], "spacing": [0.5, 0.5, 0.5]},
      "objects": [
        {"name": "femur", "center": [10, 10, 21], "radii": [6, 6, 6],
         "cap": {"axis": [0, 0, -1], "half_angle_deg": 60, "thickness_mm": 1.5}},
        {"center": [10, 10, 7], "radii": [5, 5, 5]}
      ],
      "fluid": {"center": [10, 10, 14], "radius": 1.0},
      "noise_amplitude": 0.02,
      "seed": 9,
      "series": {"timepoints": 3, "thinning_mm": 0.4}
    })";
    const PhantomFile f = phantom_file_from_json(text);
    CHECK(f.dims == Index3{40, 40, 60});
    CHECK(f.object_name(0) == "femur");
    CHECK(f.object_name(1) == "object1");
    CHECK(f.spec.seed == 9);
    CHECK(f.timepoints == 3);
    CHECK(f.spec_at(2).objects[0].cap->thickness == doctest::Approx(0.7));
    CHECK_FALSE(f.spec_at(2).objects[1].cap.has_value());
    CHECK_THROWS_AS(f.spec_at(3), Error);

    const PhantomFile back = phantom_file_from_json(phantom_file_to_json(f));
    CHECK(phantom_file_to_json(back) == phantom_file_to_json(f));
    CHECK(back.spec.fluid->center == f.spec.fluid->center);

    CHECK_THROWS_WITH_AS(phantom_file_from_json(R"({"grid": {"dims": [4, 4, 4], "spacing": [1, 1, 1]},
                                                    "objects": [], "colour": 1})"),
                         "phantom file: unknown key 'colour' in phantom file", Error);
    CHECK_THROWS_AS(phantom_file_from_json(R"({"objects": []})"), Error);
    CHECK_THROWS_WITH_AS(
        phantom_file_from_json(R"({"grid": {"dims": [40, 40, 60], "spacing": [0.5, 0.5, 0.5]},
            "objects": [{"center": [10, 10, 21], "radii": [6, 6, 6], "cap": {"thickness_mm": 1.0}}],
            "series": {"timepoints": 4, "thinning_mm": 0.5}})"),
        "cartilage thinned away at time-point 2", Error);
}
