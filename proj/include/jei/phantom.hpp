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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "jei/geometry.hpp"
#include "jei/volume.hpp"

namespace jei {

/// Star-shaped implicit surface around a center: r = ellipsoid radius along the
/// viewing direction plus an optional cap thickness that tapers to zero at the
/// cap rim. Negative inside, positive outside, and the exact signed distance
/// for a sphere without cap.
struct TruthSurface {
    Vec3 center;
    Vec3 radii;
    Vec3 cap_axis{0.0, 0.0, 1.0};
    double cap_half_angle_deg = 0.0;
    double cap_thickness = 0.0;

    double radius_along(const Vec3& unit_dir) const;
    double thickness_along(const Vec3& unit_dir) const;
    double operator()(const Vec3& p) const;
};

struct CartilageCap {
    Vec3 axis{0.0, 0.0, 1.0};
    double half_angle_deg = 60.0;
    double thickness = 2.0;
};

struct PhantomObject {
    Vec3 center;
    Vec3 radii;
    std::optional<CartilageCap> cap;
};

/// Ellipsoid with semi-axes radius * stretch along the frame (e1, e2, axis),
/// where e1 = normalized(y x axis) (x when axis is parallel to y) and e2 = axis x e1.
/// The default axis gives the world frame.
struct FluidBlob {
    Vec3 center;
    double radius = 1.0;
    Vec3 stretch{1.0, 1.0, 1.0};
    Vec3 axis{0.0, 0.0, 1.0};

    bool contains(const Vec3& p) const;
};

struct PhantomSpec {
    std::vector<PhantomObject> objects;
    float bone_level = 0.25f;
    float cartilage_level = 0.85f;
    float background_level = 0.45f;
    /// Rendered at cartilage_level, outside bone and cartilage.
    std::optional<FluidBlob> fluid;
    double noise_amplitude = 0.0;
    std::uint64_t seed = 1;
    /// Supersampling factor per axis for partial-volume rendering.
    int supersample = 3;
    /// Subdivision level of the emitted reference meshes.
    int mesh_level = 3;
};

struct PhantomObjectTruth {
    TruthSurface bone;
    TruthSurface cartilage;
    Mesh reference_mesh;
};

struct Phantom {
    Volume volume;
    std::vector<PhantomObjectTruth> objects;
};

/// Analytic surfaces and reference meshes of a spec, without rendering.
std::vector<PhantomObjectTruth> phantom_truth(const PhantomSpec& spec);

/// Renders a phantom on a grid with origin at (0,0,0).
Phantom make_phantom(const PhantomSpec& spec, Index3 dims, Vec3 spacing);

void validate_phantom_spec(const PhantomSpec& spec);

/// Phantom description file: spec, grid, object names and an optional
/// cartilage-thinning series (thickness drops by thinning_mm per time-point).
struct PhantomFile {
    PhantomSpec spec;
    Index3 dims{64, 64, 64};
    Vec3 spacing{0.5, 0.5, 0.5};
    std::vector<std::string> object_names;
    int timepoints = 1;
    double thinning_mm = 0.0;

    /// Spec of time-point t with the caps thinned.
    PhantomSpec spec_at(int timepoint) const;
    std::string object_name(int object) const;
};

PhantomFile phantom_file_from_json(std::string_view text);
std::string phantom_file_to_json(const PhantomFile& f);
PhantomFile load_phantom_file(const std::filesystem::path& path);

}  // namespace jei
