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

#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "jei/phantom.hpp"
#include "jei/pipeline.hpp"

namespace jei::testing {

/// Two facing capped spheres on a 20 x 20 x 30 mm grid, small enough for
/// per-operation cold solves.
inline PhantomSpec small_phantom_spec() {
    PhantomSpec ps;
    ps.objects.push_back({{10.1, 9.9, 22.4}, {6.0, 6.0, 6.0}, CartilageCap{{0, 0, -1}, 60, 1.2}});
    ps.objects.push_back({{9.9, 10.1, 7.6}, {6.0, 6.0, 6.0}, CartilageCap{{0, 0, 1}, 60, 1.2}});
    ps.mesh_level = 2;
    return ps;
}

inline constexpr Index3 kSmallDims{41, 41, 61};
inline constexpr Vec3 kSmallSpacing{0.5, 0.5, 0.5};

inline SegmentationConfig small_config() {
    SegmentationConfig cfg;
    cfg.nodes_per_column = 31;
    cfg.column_method = ColumnMethod::normal;
    cfg.presegment = false;
    return cfg;
}

inline SegmentationRequest request_for(const Phantom& ph) {
    SegmentationRequest rq;
    rq.volumes = {ph.volume};
    for (const auto& o : ph.objects) rq.meshes.push_back(o.reference_mesh);
    return rq;
}

/// Femur/tibia-like pair at 0.3 mm voxels with level-4 meshes (2562 columns
/// per object) and a flat fluid lens lying on the femur cartilage, tilted 30
/// degrees off the contact axis and protruding 1.8 mm beyond it.
struct BlobPhantom {
    PhantomSpec spec;
    Index3 dims;
    Vec3 spacing;
    FluidBlob blob;
    double protrusion = 0.0;
};

inline BlobPhantom blob_phantom_spec() {
    BlobPhantom b;
    const Vec3 femur{16.13, 16.07, 36.41};
    b.spec.objects.push_back({femur, {10.03, 10.03, 10.03}, CartilageCap{{0, 0, -1}, 60, 2.0}});
    b.spec.objects.push_back({{16.11, 15.93, 12.09}, {9.97, 9.97, 9.97}, CartilageCap{{0, 0, 1}, 60, 1.5}});
    b.spec.mesh_level = 4;
    const double a = 30.0 * std::numbers::pi / 180.0;
    const Vec3 u{std::sin(a), 0.0, -std::cos(a)};
    const TruthSurface cart{femur, {10.03, 10.03, 10.03}, {0, 0, -1}, 60, 2.0};
    const double rc = cart.radius_along(u) + cart.thickness_along(u);
    const double depth = 3.0, protrusion = 1.8;
    b.blob = FluidBlob{femur + u * (rc + protrusion - depth), 1.0, {6.0, 3.5, depth}, u};
    b.spec.fluid = b.blob;
    b.protrusion = protrusion;
    b.spacing = {0.3, 0.3, 0.3};
    b.dims = {107, 107, 164};
    return b;
}

/// Columns whose truth crossing lies inside the blob grown by `margin_mm` of radius.
inline std::vector<int> blob_adjacent_columns(const ColumnSet& cols, const ImplicitSurface& truth, FluidBlob blob,
                                              double margin_mm) {
    blob.radius += margin_mm;
    std::vector<int> out;
    for (int c = 0; c < cols.column_count(); ++c) {
        const double arc = truth_arc_length(cols, c, truth);
        if (arc < 0.0) continue;
        int j = 0;
        while (j + 2 < cols.nodes_per_column() && cols.arc_length(c, j + 1) <= arc) ++j;
        const Vec3 a = cols.position(c, j), b = cols.position(c, j + 1);
        const Vec3 p = a + (b - a) * ((arc - cols.arc_length(c, j)) / distance(a, b));
        if (blob.contains(p)) out.push_back(c);
    }
    return out;
}

/// Five points on the true femur cartilage in the plane through the blob
/// centre, spread over 60% of the blob's footprint on the cartilage.
inline std::vector<Vec3> blob_stroke_points(const BlobPhantom& b) {
    const PhantomObject& f = b.spec.objects[0];
    const TruthSurface cart{f.center, f.radii, f.cap->axis, f.cap->half_angle_deg, f.cap->thickness};
    const Vec3 u = b.blob.axis;
    const double a = std::atan2(u.x, -u.z);
    const double rc = cart.radius_along(u) + cart.thickness_along(u);
    const double depth = b.blob.stretch.z * b.blob.radius;
    const double half = b.blob.stretch.x * b.blob.radius * std::sqrt(1.0 - std::pow((depth - b.protrusion) / depth, 2));
    std::vector<Vec3> pts;
    for (int k = 0; k < 5; ++k) {
        const double th = a + (k - 2) / 2.0 * half * 0.6 / rc;
        const Vec3 d{std::sin(th), 0.0, -std::cos(th)};
        Vec3 p = f.center + d * (cart.radius_along(d) + cart.thickness_along(d));
        p.y = b.blob.center.y;
        pts.push_back(p);
    }
    return pts;
}

/// Stroke of 1-5 jittered points around a node up to 8 nodes off the current
/// surface of a random surface, with random tolerance and neighbour count.
inline NudgeStroke random_stroke(const Session& s, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick_surface(0, static_cast<int>(s.surfaces().size()) - 1);
    const int surface = pick_surface(rng);
    const ColumnSet& cols = s.column_sets()[s.surfaces()[surface].column_set];
    std::uniform_int_distribution<int> pick_column(0, cols.column_count() - 1);
    std::uniform_int_distribution<int> shift(-8, 8);
    std::uniform_int_distribution<int> count(1, 5);
    std::uniform_int_distribution<int> nearest(1, 20);
    std::uniform_real_distribution<double> jitter(-0.3, 0.3);
    const double deltas[] = {0.2, 0.4, 0.6};

    NudgeStroke st;
    st.surface = surface;
    st.delta_mm = deltas[std::uniform_int_distribution<int>(0, 2)(rng)];
    st.n_nearest = nearest(rng);
    const int c = pick_column(rng);
    const int k = cols.nodes_per_column();
    const int j = std::clamp(s.solution().nodes[surface][c] + shift(rng), 0, k - 1);
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
        const Vec3 p = cols.position(c, j);
        st.points.push_back({p.x + jitter(rng), p.y + jitter(rng), p.z + jitter(rng)});
    }
    return st;
}

inline const Phantom& small_phantom() {
    static const Phantom ph = make_phantom(small_phantom_spec(), kSmallDims, kSmallSpacing);
    return ph;
}

inline const SessionInputs& small_inputs() {
    static const SessionInputs in = segment_inputs(request_for(small_phantom()), small_config());
    return in;
}

}  // namespace jei::testing
