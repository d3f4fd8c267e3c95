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

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "jei/geometry.hpp"
#include "jei/volume.hpp"

namespace jei {

enum class SliceAxis { x, y, z };

std::string_view to_string(SliceAxis a);
SliceAxis slice_axis_from_string(std::string_view s);

/// World axes shown horizontally and vertically on a slice normal to `a`:
/// z -> (x, y), y -> (x, z), x -> (y, z).
std::array<int, 2> plane_axes(SliceAxis a);

/// floor(v * 255 + 0.5) with v clamped to [0, 1].
std::uint8_t quantize_intensity(double v);

/// Axis-aligned slice, row-major (u fastest). Pixel (p, q) is voxel (p * step, q * step).
struct SliceImage {
    int width = 0;
    int height = 0;
    int step = 1;
    std::vector<std::uint8_t> pixels;
};

/// Smallest step that keeps the width within max_width (0 = no limit).
int slice_step(const Volume& v, SliceAxis a, int max_width);
SliceImage extract_slice(const Volume& v, SliceAxis a, int index, int step = 1);

/// Intersection of a closed or open triangle mesh with the plane p[a] = value.
/// Polylines follow the triangle orientation; closed loops repeat their first point.
std::vector<std::vector<Vec3>> mesh_plane_section(std::span<const Vec3> vertices, std::span<const Triangle> triangles,
                                                  SliceAxis a, double value);

}  // namespace jei
