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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "jei/geometry.hpp"

using namespace jei;

namespace {

double angle_deg(const Vec3& a, const Vec3& b) {
    const double c = std::clamp(dot(normalized(a), normalized(b)), -1.0, 1.0);
    return std::acos(c) * 180.0 / std::numbers::pi;
}

void check_column_invariants(const ColumnSet& cols, double spacing) {
    for (int c = 0; c < cols.column_count(); ++c) {
        const auto col = cols.column(c);
        for (int j = 1; j < cols.nodes_per_column(); ++j) {
            const double d = distance(col[j], col[j - 1]);
            REQUIRE(std::abs(d - spacing) <= 0.02 * spacing);
            if (j >= 2) REQUIRE(dot(col[j] - col[j - 1], col[j - 1] - col[j - 2]) > 0.0);
        }
    }
    for (const auto& [a, b] : cols.adjacency()) REQUIRE(polyline_distance(cols.column(a), cols.column(b)) > 1e-6);
}

/// Sphere with a smooth dent pushed in around +z: the dent is concave, so
/// straight normals converge above it.
Mesh dented_sphere(double r, double depth, double half_angle_deg, int level) {
    const Mesh s = make_ellipsoid_mesh({}, {r, r, r}, level);
    std::vector<Vec3> v = s.vertices();
    const double c0 = std::cos(half_angle_deg * std::numbers::pi / 180.0);
    for (auto& p : v) {
        const Vec3 u = normalized(p);
        if (u.z > c0) {
            const double s01 = (u.z - c0) / (1.0 - c0);
            const double bump = depth * std::sin(0.5 * std::numbers::pi * s01) * std::sin(0.5 * std::numbers::pi * s01);
            p = u * (r - bump);
        }
    }
    return Mesh(v, s.triangles());
}

}  // namespace

TEST_CASE("icosphere combinatorics and shape") {
    const Mesh m0 = make_ellipsoid_mesh({}, {1, 1, 1}, 0);
    CHECK(m0.vertex_count() == 12);
    CHECK(m0.triangles().size() == 20);
    for (int level = 0; level <= 3; ++level) {
        const Mesh m = make_ellipsoid_mesh({1, -2, 3}, {2, 3, 4}, level);
        CHECK(m.vertex_count() == static_cast<std::size_t>(10 * (1 << (2 * level)) + 2));
        for (const auto& p : m.vertices()) {
            const double q = std::pow((p.x - 1) / 2, 2) + std::pow((p.y + 2) / 3, 2) + std::pow((p.z - 3) / 4, 2);
            CHECK(std::abs(q - 1.0) < 1e-9);
        }
        for (const auto& n : m.normals()) CHECK(std::abs(norm(n) - 1.0) < 1e-9);
        for (std::size_t i = 0; i < m.vertex_count(); ++i)
            CHECK(dot(m.normals()[i], m.vertices()[i] - Vec3{1, -2, 3}) > 0.0);
    }
    const double r = 3.0;
    const Mesh m2 = make_ellipsoid_mesh({}, {r, r, r}, 2);
    CHECK(std::abs(m2.surface_area() - 4 * std::numbers::pi * r * r) < 0.02 * 4 * std::numbers::pi * r * r);
}

TEST_CASE("mesh validation") {
    const std::vector<Vec3> v{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    CHECK_THROWS_AS(Mesh(v, {{0, 1, 7}}), Error);
    CHECK_THROWS_AS(Mesh(v, {{0, 1, 1}}), Error);
    CHECK_THROWS_AS(Mesh({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}, {{0, 1, 2}}), Error);
    CHECK_THROWS_AS(Mesh(v, {{0, 1, 2}, {0, 1, 3}, {1, 0, 3}}), Error);
    CHECK_THROWS_AS(Mesh(v, {{0, 1, 2}}, {{0, 0, 2}, {0, 0, 1}, {0, 0, 1}, {0, 0, 1}}), Error);
    CHECK_NOTHROW(Mesh(v, {{0, 1, 2}, {0, 3, 1}}));
}

TEST_CASE("mesh text round trip") {
    const Mesh m = make_ellipsoid_mesh({0.1, 0.2, 0.3}, {1.5, 2.5, 3.5}, 2);
    const Mesh back = decode_mesh(encode_mesh(m));
    REQUIRE(back.vertices() == m.vertices());
    REQUIRE(back.triangles() == m.triangles());
    CHECK(encode_mesh(back) == encode_mesh(m));
    CHECK_THROWS_AS(decode_mesh("MESH2\n0 0\n"), Error);
    CHECK_THROWS_AS(decode_mesh("MESH1\n3 1\n0 0 0\n1 0 0\n"), Error);
}

TEST_CASE("normal columns on a sphere are radial") {
    const Mesh s = make_ellipsoid_mesh({}, {10, 10, 10}, 2);
    ColumnParams p;
    p.method = ColumnMethod::normal;
    const ColumnSet cols = build_columns(s, p);
    CHECK(cols.base_index() == 30);
    for (int c = 0; c < cols.column_count(); ++c)
        for (int j = 0; j < cols.nodes_per_column(); ++j)
            if (j != cols.base_index()) CHECK(angle_deg(cols.position(c, j), s.vertices()[c]) < 1e-4);
    check_column_invariants(cols, 0.20);
}

TEST_CASE("ELF columns on a sphere are radial and arc-length sampled") {
    const Mesh s = make_ellipsoid_mesh({}, {10, 10, 10}, 3);
    ColumnParams p;
    p.threads = 4;
    ColumnReport report;
    const ColumnSet cols = build_columns(s, p, &report);
    CHECK(report.normal_fallback.empty());
    double worst = 0.0;
    for (int c = 0; c < cols.column_count(); ++c)
        for (int j = 0; j < cols.nodes_per_column(); ++j)
            if (j != cols.base_index()) worst = std::max(worst, angle_deg(cols.position(c, j), s.vertices()[c]));
    MESSAGE("worst ELF deviation from radial: " << worst << " deg");
    CHECK(worst <= 2.0);
    check_column_invariants(cols, 0.20);
    for (int c = 0; c < cols.column_count(); ++c)
        CHECK(std::abs(cols.arc_length(c, 60) - 12.0) <= 0.02 * 12.0);
}

TEST_CASE("column tracing does not depend on the thread count") {
    const Mesh s = make_ellipsoid_mesh({1, 2, 3}, {6, 7, 8}, 2);
    ColumnParams p;
    p.nodes = 21;
    p.threads = 1;
    const ColumnSet a = build_columns(s, p);
    p.threads = 3;
    const ColumnSet b = build_columns(s, p);
    CHECK(a == b);
    CHECK(a.digest() == b.digest());
}

TEST_CASE("concave dent: ELF columns stay apart where normals cross") {
    const Mesh m = dented_sphere(8.0, 3.0, 40.0, 3);
    ColumnParams p;
    p.method = ColumnMethod::normal;
    CHECK_THROWS_WITH_AS(build_columns(m, p), doctest::Contains("columns intersect"), Error);
    p.method = ColumnMethod::elf;
    const ColumnSet cols = build_columns(m, p);
    check_column_invariants(cols, 0.20);
    CHECK(find_intersections(cols).empty());

    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> pick(0, cols.column_count() - 1);
    for (int t = 0; t < 200; ++t) {
        const int a = pick(rng), b = pick(rng);
        if (a != b) CHECK(polyline_distance(cols.column(a), cols.column(b)) > 1e-6);
    }
}

TEST_CASE("segment distance against dense sampling") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int t = 0; t < 200; ++t) {
        const Vec3 p0{u(rng), u(rng), u(rng)}, p1{u(rng), u(rng), u(rng)};
        const Vec3 q0{u(rng), u(rng), u(rng)}, q1{u(rng), u(rng), u(rng)};
        double best = 1e300;
        for (int i = 0; i <= 200; ++i)
            for (int j = 0; j <= 200; ++j)
                best = std::min(best, distance(p0 + (i / 200.0) * (p1 - p0), q0 + (j / 200.0) * (q1 - q0)));
        const double d = segment_distance(p0, p1, q0, q1);
        CHECK(d <= best + 1e-12);
        CHECK(d >= best - 0.03);
    }
    CHECK(segment_distance({0, 0, 0}, {1, 0, 0}, {0.5, -1, 0}, {0.5, 1, 0}) == doctest::Approx(0.0));
    CHECK(segment_distance({0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}) == doctest::Approx(1.0));
}

TEST_CASE("nearest nodes") {
    const ColumnSet single(11, 0.2, 5, [] {
        std::vector<Vec3> v;
        for (int j = 0; j < 11; ++j) v.push_back({0, 0, 0.2 * j});
        return v;
    }(), {}, {});
    SpatialIndex idx;
    idx.add(0, single);
    idx.build();
    const auto hit = idx.nearest(single.position(0, 5), 1);
    REQUIRE(hit.size() == 1);
    CHECK(hit[0].tag.index == NodeIndex{0, 5});
    CHECK(hit[0].distance == 0.0);
    const auto all = idx.nearest({0, 0, -1}, 100);
    REQUIRE(all.size() == 11);
    for (int j = 0; j < 11; ++j) CHECK(all[j].tag.index.node == j);
}

TEST_CASE("nearest nodes match a linear scan") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-5, 5);
    // 100 columns x 10 nodes on a coarse lattice so exact distance ties occur.
    std::vector<Vec3> pts;
    for (int c = 0; c < 100; ++c)
        for (int j = 0; j < 10; ++j) pts.push_back({std::round(u(rng)), std::round(u(rng)), std::round(u(rng) * 2) / 2});
    const ColumnSet cols(10, 0.2, 5, pts, {}, {});
    std::vector<Vec3> pts2;
    for (int c = 0; c < 20; ++c)
        for (int j = 0; j < 10; ++j) pts2.push_back({u(rng), u(rng), u(rng)});
    const ColumnSet cols2(10, 0.2, 5, pts2, {}, {});
    SpatialIndex idx;
    idx.add(0, cols);
    idx.add(1, cols2);
    idx.build();
    CHECK(idx.size() == 1200);

    for (int q = 0; q < 100; ++q) {
        const Vec3 p{u(rng), u(rng), u(rng)};
        for (int set : {-1, 0, 1}) {
            std::vector<std::pair<double, NodeTag>> scan;
            for (int s = 0; s < 2; ++s) {
                if (set >= 0 && s != set) continue;
                const ColumnSet& cs = s == 0 ? cols : cols2;
                for (int c = 0; c < cs.column_count(); ++c)
                    for (int j = 0; j < 10; ++j) {
                        const Vec3 d = cs.position(c, j) - p;
                        scan.push_back({dot(d, d), NodeTag{s, {c, j}}});
                    }
            }
            std::sort(scan.begin(), scan.end());
            const auto got = idx.nearest(p, 8, set);
            REQUIRE(got.size() == 8);
            for (int n = 0; n < 8; ++n) {
                REQUIRE(got[n].tag == scan[n].second);
                REQUIRE(got[n].distance == doctest::Approx(std::sqrt(scan[n].first)));
            }
        }
    }
}
