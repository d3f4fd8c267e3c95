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

#include <random>

#include "doctest.h"
#include "jei/graphnet.hpp"
#include "support/enumerate.hpp"
#include "support/reference_maxflow.hpp"

using namespace jei;

namespace {

CostTable table(int columns, int k, std::vector<double> v) { return CostTable(SurfaceKind::bone, 1.0, columns, k, std::move(v)); }

SurfaceSolution solve(const FlowNetwork& fn, std::span<const CostTable* const> costs) {
    maxflow::ResidualState st(fn.network());
    st.solve();
    return extract_surfaces(fn, st.source_set(), costs);
}

/// Flat square grid in the plane z = height; normals +z, or -z when flipped.
Mesh flat_grid(int n, double pitch, double height, bool flipped) {
    std::vector<Vec3> v;
    std::vector<Triangle> t;
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) v.push_back({x * pitch, y * pitch, height});
    for (int y = 0; y + 1 < n; ++y)
        for (int x = 0; x + 1 < n; ++x) {
            const int a = y * n + x, b = a + 1, c = a + n, d = c + 1;
            if (!flipped) {
                t.push_back({a, b, d});
                t.push_back({a, d, c});
            } else {
                t.push_back({a, d, b});
                t.push_back({a, c, d});
            }
        }
    return Mesh(v, t, std::vector<Vec3>(v.size(), Vec3{0, 0, flipped ? -1.0 : 1.0}));
}

}  // namespace

TEST_CASE("two columns with zero smoothness") {
    GraphSpec g;
    g.nodes_per_column = 3;
    g.smoothness = 0;
    g.surfaces.push_back({0, 0, 2, {{0, 1}}});
    const CostTable t = table(2, 3, {0, 1, 1, 1, 0, 1});
    const std::vector<const CostTable*> costs{&t};
    const FlowNetwork fn = build_network(g, costs);
    const SurfaceSolution sol = solve(fn, costs);
    CHECK(sol.nodes[0] == std::vector<int>{0, 0});
    CHECK(sol.cost[0] == doctest::Approx(1.0));

    const auto e = testing::enumerate_optimum(g, {{{0, 1, 1}, {1, 0, 1}}});
    CHECK(e.best == quantize_cost(1.0));
    CHECK(e.argmin[0] == std::vector<int>{0, 0});
}

TEST_CASE("equal costs resolve to the lowest node") {
    GraphSpec g;
    g.surfaces.push_back({0, 0, 1, {}});
    const CostTable t = table(1, 61, std::vector<double>(61, 0.5));
    const std::vector<const CostTable*> costs{&t};
    CHECK(solve(build_network(g, costs), costs).nodes[0][0] == 0);
}

TEST_CASE("inter-surface minimum pushes the upper surface off the lower one") {
    GraphSpec g;
    g.nodes_per_column = 4;
    g.surfaces.push_back({0, 0, 1, {}});
    g.surfaces.push_back({0, 0, 1, {}});
    g.inter_surface.push_back({0, 1, {1, 2}});
    const std::vector<double> c{0.0, 0.5, 0.9, 1.0};
    const CostTable a = table(1, 4, c), b = table(1, 4, c);
    const std::vector<const CostTable*> costs{&a, &b};
    const SurfaceSolution sol = solve(build_network(g, costs), costs);
    CHECK(sol.nodes[1][0] - sol.nodes[0][0] == 1);
    const auto e = testing::enumerate_optimum(g, {{c}, {c}});
    CHECK(quantized_cost(sol, costs) == e.best);
}

TEST_CASE("min cut matches exhaustive enumeration on random instances") {
    std::mt19937_64 rng(1234);
    int feasible = 0, infeasible = 0, multi_object = 0, longitudinal = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto inst = testing::random_instance(rng);
        const auto costs = inst.table_ptrs();
        const auto e = testing::enumerate_optimum(inst.spec, inst.costs);
        CHECK(bounds_feasible(inst.spec) == e.feasible);
        if (!e.feasible) {
            ++infeasible;
            CHECK_THROWS_AS(build_network(inst.spec, costs), Error);
            continue;
        }
        ++feasible;
        multi_object += !inst.spec.inter_object.empty();
        longitudinal += !inst.spec.inter_time.empty();
        const FlowNetwork fn = build_network(inst.spec, costs);
        maxflow::ResidualState st(fn.network());
        st.solve();
        const auto sol = extract_surfaces(fn, st.source_set(), costs);
        REQUIRE(quantized_cost(sol, costs) == e.best);
        REQUIRE(validate_solution(sol, inst.spec).empty());

        // Cut capacity less the weight constants is the optimum.
        std::int64_t constant = 0;
        for (std::size_t s = 0; s < inst.spec.surfaces.size(); ++s)
            for (int c = 0; c < inst.spec.surfaces[s].columns; ++c)
                constant += fn.column_constant(static_cast<int>(s), costs[s]->column(c));
        REQUIRE(st.cut_capacity(fn.network()) - constant == e.best);
        REQUIRE(testing::reference_maxflow(fn.network()).flow - constant == e.best);

        // Ties go to the lowest graph index: lowest j, or highest j on reversed surfaces.
        for (std::size_t s = 0; s < inst.spec.surfaces.size(); ++s)
            REQUIRE(sol.nodes[s] == (fn.reversed(static_cast<int>(s)) ? e.highest[s] : e.lowest[s]));
    }
    MESSAGE(feasible << " feasible, " << infeasible << " infeasible, " << multi_object << " two-object, "
                     << longitudinal << " longitudinal");
    CHECK(feasible > 500);
    CHECK(multi_object > 100);
    CHECK(longitudinal > 100);
}

TEST_CASE("base cut reads as all zeros") {
    GraphSpec g;
    g.nodes_per_column = 5;
    g.surfaces.push_back({0, 0, 3, {{0, 1}, {1, 2}}});
    const CostTable t = table(3, 5, std::vector<double>(15, 0.2));
    const std::vector<const CostTable*> costs{&t};
    const FlowNetwork fn = build_network(g, costs);
    std::vector<char> side(fn.network().node_count, 0);
    for (int c = 0; c < 3; ++c) side[fn.node_id(0, c, 0)] = 1;
    const auto sol = extract_surfaces(fn, side, costs);
    CHECK(sol.nodes[0] == std::vector<int>{0, 0, 0});

    side[fn.node_id(0, 1, 3)] = 1;  // breaks the column prefix
    CHECK_THROWS_WITH_AS(extract_surfaces(fn, side, costs), doctest::Contains("infinite arc"), Error);
    side[fn.node_id(0, 1, 3)] = 0;
    for (int j = 0; j < 5; ++j) side[fn.node_id(0, 0, j)] = 1;  // smoothness 2 broken between columns 0 and 1
    CHECK_THROWS_WITH_AS(extract_surfaces(fn, side, costs), doctest::Contains("infinite arc"), Error);
}

TEST_CASE("validate_solution reports violations") {
    GraphSpec g;
    g.nodes_per_column = 61;
    g.surfaces.push_back({0, 0, 2, {{0, 1}}});
    g.surfaces.push_back({0, 1, 2, {{0, 1}}});
    g.inter_time.push_back({0, 1, 5});
    SurfaceSolution sol;
    sol.nodes = {{5, 9}, {12, 9}};
    const auto v = validate_solution(sol, g);
    REQUIRE(v.size() == 3);
    CHECK(v[0].kind == ConstraintKind::smoothness);
    CHECK(v[0].column_a == 0);
    CHECK(v[0].column_b == 1);
    CHECK(v[0].gap == 4);
    CHECK(v[1].kind == ConstraintKind::smoothness);
    CHECK(v[1].gap == 3);
    CHECK(v[2].kind == ConstraintKind::inter_time);
    CHECK(v[2].gap == 7);
    sol.nodes = {{5, 6}, {6, 7}};
    CHECK(validate_solution(sol, g).empty());
}

TEST_CASE("spec validation and infeasible bounds") {
    GraphSpec g;
    g.nodes_per_column = 4;
    g.surfaces.push_back({0, 0, 1, {}});
    g.surfaces.push_back({0, 0, 1, {}});
    g.inter_surface.push_back({0, 1, {4, 6}});
    const CostTable t = table(1, 4, {0, 0, 0, 0});
    const std::vector<const CostTable*> costs{&t, &t};
    CHECK_FALSE(bounds_feasible(g));
    CHECK_THROWS_WITH_AS(build_network(g, costs), doctest::Contains("infeasible"), Error);
    g.inter_surface[0].bounds = {3, 2};
    CHECK_THROWS_AS(build_network(g, costs), Error);

    GraphSpec tri;
    tri.nodes_per_column = 3;
    for (int o = 0; o < 3; ++o) tri.surfaces.push_back({o, 0, 1, {}});
    tri.inter_object.push_back({0, 1, {{0, 0, 2}}, {0, 4}});
    tri.inter_object.push_back({1, 2, {{0, 0, 2}}, {0, 4}});
    CHECK_NOTHROW(tri.validate());
    tri.inter_object.push_back({0, 2, {{0, 0, 2}}, {0, 4}});
    CHECK_THROWS_WITH_AS(tri.validate(), doctest::Contains("two-colourable"), Error);
}

TEST_CASE("pairing facing flat meshes") {
    ColumnParams p;
    p.nodes = 11;
    p.method = ColumnMethod::normal;
    const ColumnSet lower = build_columns(flat_grid(5, 1.0, 0.0, false), p);
    const ColumnSet upper = build_columns(flat_grid(5, 1.0, 2.0, true), p);
    const auto pairs = pair_objects(lower, upper, 5.0);
    REQUIRE(pairs.size() == 25);
    for (const auto& pr : pairs) {
        CHECK(pr.a == pr.b);
        CHECK(pr.distance == doctest::Approx(2.0));
    }
    const auto link = make_inter_object_link(0, 1, lower, upper, pairs, {0, 60});
    CHECK(link.pairs[0].offset == 5 + 5 + 10);

    const ColumnSet far = build_columns(flat_grid(5, 1.0, 50.0, true), p);
    CHECK(pair_objects(lower, far, 5.0).empty());
    const ColumnSet same_way = build_columns(flat_grid(5, 1.0, 2.0, false), p);
    CHECK(pair_objects(lower, same_way, 5.0).empty());
}

TEST_CASE("facing flat objects keep their separation") {
    ColumnParams p;
    p.nodes = 11;
    p.spacing = 0.2;
    p.method = ColumnMethod::normal;
    const ColumnSet lower = build_columns(flat_grid(4, 1.0, 0.0, false), p);
    const ColumnSet upper = build_columns(flat_grid(4, 1.0, 1.0, true), p);
    const auto pairs = pair_objects(lower, upper, 5.0);
    GraphSpec g;
    g.nodes_per_column = 11;
    g.surfaces.push_back({0, 0, lower.column_count(), lower.adjacency()});
    g.surfaces.push_back({1, 0, upper.column_count(), upper.adjacency()});
    g.inter_object.push_back(make_inter_object_link(0, 1, lower, upper, pairs, {0, 60}));
    // Both surfaces would like to sit at their outermost node, i.e. overlap.
    std::vector<double> c(11, 1.0);
    c[10] = 0.0;
    std::vector<double> all;
    for (int i = 0; i < lower.column_count(); ++i) all.insert(all.end(), c.begin(), c.end());
    const CostTable a = table(lower.column_count(), 11, all), b = table(upper.column_count(), 11, all);
    const std::vector<const CostTable*> costs{&a, &b};
    const auto sol = solve(build_network(g, costs), costs);
    CHECK(validate_solution(sol, g).empty());
    for (int i = 0; i < lower.column_count(); ++i) {
        const double za = lower.position(i, sol.nodes[0][i]).z;
        const double zb = upper.position(i, sol.nodes[1][i]).z;
        CHECK(zb - za >= -1e-9);
    }
}
