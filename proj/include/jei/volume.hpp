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
#include <vector>

#include "jei/types.hpp"

namespace jei {

/// Scalar image on a regular grid. Values are normalized to [0, 1] and stored
/// x-fastest. Immutable after construction.
class Volume {
public:
    Volume(Index3 dims, Vec3 spacing, Vec3 origin, std::vector<float> data);

    static Volume filled(Index3 dims, Vec3 spacing, Vec3 origin, float value);

    const Index3& dims() const { return dims_; }
    const Vec3& spacing() const { return spacing_; }
    const Vec3& origin() const { return origin_; }
    std::span<const float> data() const { return data_; }
    std::size_t voxel_count() const { return data_.size(); }

    float at(int i, int j, int k) const {
        return data_[static_cast<std::size_t>(i) +
                     static_cast<std::size_t>(dims_[0]) *
                         (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims_[1]) * k)];
    }

    Vec3 voxel_position(int i, int j, int k) const {
        return {origin_.x + i * spacing_.x, origin_.y + j * spacing_.y, origin_.z + k * spacing_.z};
    }

    /// Upper corner of the physical bounding box, origin + (dims - 1) * spacing.
    Vec3 extent_max() const;
    bool contains(const Vec3& p, double tolerance = 1e-9) const;
    double min_spacing() const;

    /// Step used by the directional derivative stencils.
    double derivative_step() const { return 0.5 * min_spacing(); }

    std::uint64_t digest() const;

    friend bool operator==(const Volume&, const Volume&) = default;

private:
    Index3 dims_;
    Vec3 spacing_;
    Vec3 origin_;
    std::vector<float> data_;
};

struct Sample {
    double value = 0.0;
    bool clamped = false;
};

/// Trilinear interpolation; points outside the bounding box are clamped to it.
Sample sample_checked(const Volume& v, const Vec3& p);
inline double sample(const Volume& v, const Vec3& p) { return sample_checked(v, p).value; }

struct Derivative {
    double value = 0.0;
    bool one_sided = false;
};

/// Central first difference along the unit direction d with step v.derivative_step().
/// Falls back to a one-sided difference when the stencil leaves the volume.
Derivative deriv1(const Volume& v, const Vec3& p, const Vec3& d);

/// Second central difference along d; shifted to an in-bounds stencil near the border.
Derivative deriv2(const Volume& v, const Vec3& p, const Vec3& d);

Volume load_volume(const std::filesystem::path& path);
void save_volume(const Volume& v, const std::filesystem::path& path);

std::vector<std::uint8_t> encode_volume(const Volume& v);
Volume decode_volume(std::span<const std::uint8_t> bytes);

}  // namespace jei
