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

#include "jei/slice.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace jei {

std::string_view to_string(SliceAxis a) {
    switch (a) {
        case SliceAxis::x: return "x";
        case SliceAxis::y: return "y";
        case SliceAxis::z: return "z";
    }
    return "z";
}

SliceAxis slice_axis_from_string(std::string_view s) {
    if (s == "x") return SliceAxis::x;
    if (s == "y") return SliceAxis::y;
    if (s == "z") return SliceAxis::z;
    throw Error("unknown slice axis '" + std::string(s) + "' (expected x, y or z)");
}

std::array<int, 2> plane_axes(SliceAxis a) {
    switch (a) {
        case SliceAxis::x: return {1, 2};
        case SliceAxis::y: return {0, 2};
        case SliceAxis::z: return {0, 1};
    }
    return {0, 1};
}

std::uint8_t quantize_intensity(double v) {
    const double c = std::clamp(v, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::floor(c * 255.0 + 0.5));
}

int slice_step(const Volume& v, SliceAxis a, int max_width) {
    if (max_width < 0) throw Error("max_width must be >= 0");
    const int n = v.dims()[plane_axes(a)[0]];
    if (max_width == 0 || n <= max_width) return 1;
    return (n + max_width - 1) / max_width;
}

SliceImage extract_slice(const Volume& v, SliceAxis a, int index, int step) {
    const int w = static_cast<int>(a);
    const int n = v.dims()[w];
    if (index < 0 || index >= n) {
        throw Error("slice index " + std::to_string(index) + " out of range [0, " + std::to_string(n - 1) + "]");
    }
    if (step < 1) throw Error("slice step must be >= 1");
    const auto [ua, va] = plane_axes(a);
    SliceImage img;
    img.step = step;
    img.width = (v.dims()[ua] - 1) / step + 1;
    img.height = (v.dims()[va] - 1) / step + 1;
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    Index3 ijk{};
    ijk[w] = index;
    for (int q = 0; q < img.height; ++q) {
        ijk[va] = q * step;
        for (int p = 0; p < img.width; ++p) {
            ijk[ua] = p * step;
            img.pixels[static_cast<std::size_t>(q) * img.width + p] = quantize_intensity(v.at(ijk[0], ijk[1], ijk[2]));
        }
    }
    return img;
}

namespace {

using EdgeKey = std::pair<int, int>;

EdgeKey edge_key(int i, int j) { return i < j ? EdgeKey{i, j} : EdgeKey{j, i}; }

}  // namespace

std::vector<std::vector<Vec3>> mesh_plane_section(std::span<const Vec3> vertices, std::span<const Triangle> triangles,
                                                  SliceAxis a, double value) {
    const int w = static_cast<int>(a);
    auto offset = [&](int i) { return vertices[static_cast<std::size_t>(i)][w] - value; };
    // Vertices exactly on the plane count as above it, so every crossing lies on an edge interior.
    auto above = [&](int i) { return offset(i) >= 0.0; };

    std::map<EdgeKey, EdgeKey> next;
    std::map<EdgeKey, int> in_degree;
    for (const Triangle& t : triangles) {
        EdgeKey from{-1, -1};
        EdgeKey to{-1, -1};
        for (int e = 0; e < 3; ++e) {
            const int i = t[e];
            const int j = t[(e + 1) % 3];
            if (above(i) == above(j)) continue;
            if (above(i)) from = edge_key(i, j);
            else to = edge_key(i, j);
        }
        if (from.first < 0 || to.first < 0) continue;
        if (next.emplace(from, to).second) ++in_degree[to];
    }

    auto point = [&](const EdgeKey& k) {
        const Vec3& p = vertices[static_cast<std::size_t>(k.first)];
        const Vec3& q = vertices[static_cast<std::size_t>(k.second)];
        const double dp = offset(k.first);
        const double dq = offset(k.second);
        Vec3 r = p + (q - p) * (dp / (dp - dq));
        r[w] = value;
        return r;
    };

    std::vector<std::vector<Vec3>> out;
    std::map<EdgeKey, bool> used;
    auto walk = [&](EdgeKey start) {
        std::vector<Vec3> line{point(start)};
        EdgeKey k = start;
        while (true) {
            auto it = next.find(k);
            if (it == next.end() || used[k]) break;
            used[k] = true;
            k = it->second;
            line.push_back(point(k));
            if (k == start) break;
        }
        if (line.size() >= 2) out.push_back(std::move(line));
    };
    for (const auto& [k, _] : next) {
        if (!in_degree.contains(k)) walk(k);
    }
    for (const auto& [k, _] : next) {
        if (!used[k]) walk(k);
    }
    return out;
}

}  // namespace jei
