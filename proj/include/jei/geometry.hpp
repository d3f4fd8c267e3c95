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
#include <string>
#include <utility>
#include <vector>

#include "jei/types.hpp"

namespace jei {

using Triangle = std::array<int, 3>;

/// Triangle mesh with per-vertex outward unit normals.
class Mesh {
public:
    Mesh() = default;
    /// Normals are estimated from area-weighted face normals (counter-clockwise = outward).
    Mesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles);
    Mesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles, std::vector<Vec3> normals);

    const std::vector<Vec3>& vertices() const { return vertices_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    const std::vector<Vec3>& normals() const { return normals_; }
    std::size_t vertex_count() const { return vertices_.size(); }

    /// Unique undirected edges, each as (lower index, higher index), sorted.
    std::vector<std::pair<int, int>> edges() const;
    double surface_area() const;

    friend bool operator==(const Mesh&, const Mesh&) = default;

private:
    void validate() const;

    std::vector<Vec3> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<Vec3> normals_;
};

std::vector<Vec3> estimate_normals(const std::vector<Vec3>& vertices, const std::vector<Triangle>& triangles);

/// Icosphere subdivided `level` times and scaled onto the ellipsoid; normals are analytic.
Mesh make_ellipsoid_mesh(const Vec3& center, const Vec3& radii, int level);

std::string encode_mesh(const Mesh& m);
Mesh decode_mesh(std::string_view text);
Mesh load_mesh(const std::filesystem::path& path);
void save_mesh(const Mesh& m, const std::filesystem::path& path);

enum class ColumnMethod { elf, normal };

std::string_view to_string(ColumnMethod m);
ColumnMethod column_method_from_string(std::string_view s);

struct NodeIndex {
    int column = 0;
    int node = 0;
    friend auto operator<=>(const NodeIndex&, const NodeIndex&) = default;
};

struct ColumnParams {
    int nodes = 61;
    double spacing = 0.20;
    double inner_fraction = 0.5;
    ColumnMethod method = ColumnMethod::elf;
    /// Worker threads for column tracing; results do not depend on it.
    int threads = 1;
};

struct ColumnReport {
    /// Columns whose seed field vanished and were traced along the vertex normal.
    std::vector<int> normal_fallback;
};

/// Ordered node columns, one per mesh vertex, node 0 innermost.
class ColumnSet {
public:
    ColumnSet() = default;
    ColumnSet(int nodes_per_column, double spacing, int base_index, std::vector<Vec3> positions,
              std::vector<std::pair<int, int>> adjacency, std::vector<Triangle> triangles);

    int column_count() const { return columns_; }
    int nodes_per_column() const { return k_; }
    double spacing() const { return spacing_; }
    int base_index() const { return base_; }

    const Vec3& position(int column, int node) const { return positions_[static_cast<std::size_t>(column) * k_ + node]; }
    std::span<const Vec3> column(int c) const {
        return std::span<const Vec3>(positions_).subspan(static_cast<std::size_t>(c) * k_, k_);
    }
    std::span<const Vec3> positions() const { return positions_; }
    const std::vector<std::pair<int, int>>& adjacency() const { return adjacency_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }

    const Vec3& base_point(int c) const { return position(c, base_); }
    /// Unit direction of the column at its base (outward).
    Vec3 base_direction(int c) const;
    /// Unit direction of the column at node j, central over j-1..j+1.
    Vec3 direction(int c, int j) const;
    /// Arc length from node 0 to node j along the column polyline.
    double arc_length(int c, int j) const;

    /// Mesh through node j(i) of every column, topology from the source mesh.
    Mesh surface_mesh(std::span<const int> nodes) const;

    std::uint64_t digest() const;

    friend bool operator==(const ColumnSet&, const ColumnSet&) = default;

private:
    int columns_ = 0;
    int k_ = 0;
    double spacing_ = 0.0;
    int base_ = 0;
    std::vector<Vec3> positions_;
    std::vector<std::pair<int, int>> adjacency_;
    std::vector<Triangle> triangles_;
};

ColumnSet build_columns(const Mesh& mesh, const ColumnParams& params, ColumnReport* report = nullptr);

/// Exact minimum distance between segments [p0,p1] and [q0,q1].
double segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1);
double polyline_distance(std::span<const Vec3> a, std::span<const Vec3> b);

/// Adjacent column pairs whose polylines come closer than `threshold` mm.
std::vector<std::pair<int, int>> find_intersections(const ColumnSet& cols, double threshold = 1e-6);

/// Identity of an indexed node: which column set it belongs to plus its (column, node).
struct NodeTag {
    int set = 0;
    NodeIndex index;
    friend auto operator<=>(const NodeTag&, const NodeTag&) = default;
};

struct Neighbor {
    NodeTag tag;
    double distance = 0.0;
};

/// kd-tree over node positions of one or more column sets.
class SpatialIndex {
public:
    SpatialIndex() = default;
    void add(int set, const ColumnSet& cols);
    /// Must be called after the last add() and before queries.
    void build();

    std::size_t size() const { return points_.size(); }

    /// The n nearest nodes (of `set` only when set >= 0), ascending by distance,
    /// ties broken by (column, node).
    std::vector<Neighbor> nearest(const Vec3& p, int n, int set = -1) const;

private:
    struct Entry {
        Vec3 p;
        NodeTag tag;
    };
    struct KdNode {
        int begin = 0;
        int end = 0;
        int axis = -1;
        double split = 0.0;
        int left = -1;
        int right = -1;
    };
    int build_node(int begin, int end, int depth);

    std::vector<Entry> points_;
    std::vector<KdNode> nodes_;
    bool built_ = false;
};

}  // namespace jei
