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
#include <span>
#include <string>
#include <vector>

#include "jei/cost.hpp"
#include "jei/geometry.hpp"
#include "jei/maxflow.hpp"

namespace jei {

/// Closed range of separations in nodes.
struct Bounds {
    int min = 0;
    int max = 0;
    friend bool operator==(const Bounds&, const Bounds&) = default;
};

/// One optimal surface: a column per mesh vertex of its column set.
struct SurfaceDef {
    int object = 0;
    int timepoint = 0;
    int columns = 0;
    std::vector<std::pair<int, int>> adjacency;
    /// Overrides GraphSpec::smoothness when >= 0.
    int smoothness = -1;
};

/// upper(i) - lower(i) in [min, max] on every column; both surfaces share a column set.
struct InterSurfaceLink {
    int lower = 0;
    int upper = 1;
    Bounds bounds{0, 20};
};

/// Facing column pair across two objects. The separation of a configuration
/// in nodes is offset - J_a - J_b.
struct ObjectPair {
    int a = 0;
    int b = 0;
    int offset = 0;
};

struct InterObjectLink {
    int surface_a = 0;
    int surface_b = 1;
    std::vector<ObjectPair> pairs;
    Bounds bounds{0, 60};
};

/// |J_later(i) - J_earlier(i)| <= max on every column.
struct InterTimeLink {
    int earlier = 0;
    int later = 1;
    int max = 5;
};

struct GraphSpec {
    int nodes_per_column = 61;
    int smoothness = 2;
    std::vector<SurfaceDef> surfaces;
    std::vector<InterSurfaceLink> inter_surface;
    std::vector<InterObjectLink> inter_object;
    std::vector<InterTimeLink> inter_time;

    void validate() const;
    int smoothness_of(int surface) const;
};

enum class ArcKind : std::uint8_t { intra_column, smoothness, inter_surface, inter_object, inter_time };

/// Scale of the fixed-point capacity arithmetic: one unit is 1e-6 cost.
inline constexpr double kCostScale = 1e6;
std::int64_t quantize_cost(double c);

/// Location of a graph node.
struct NodeRef {
    int surface = 0;
    int column = 0;
    int node = 0;  // j, in the surface's own column orientation
};

/// s-t network of a GraphSpec. Objects are two-coloured by their inter-object
/// links; surfaces of the second colour use the reversed graph index
/// g = K - 1 - j so that the sum constraints of facing objects become
/// differences.
class FlowNetwork {
public:
    const GraphSpec& spec() const { return spec_; }
    const maxflow::Network& network() const { return net_; }
    const std::vector<ArcKind>& arc_kinds() const { return kinds_; }
    maxflow::Capacity infinity() const { return inf_; }
    int nodes_per_column() const { return spec_.nodes_per_column; }
    bool reversed(int surface) const { return reversed_[surface] != 0; }

    int node_id(int surface, int column, int j) const;
    /// Node at graph index g (g = j unless the surface is reversed).
    int graph_node(int surface, int column, int g) const {
        return surface_offset_[surface] + column * spec_.nodes_per_column + g;
    }
    NodeRef node_ref(int node) const;
    int surface_of_node(int node) const;

    /// Terminal capacities (source, sink) of the K nodes of a column for the given costs.
    std::vector<std::pair<maxflow::Capacity, maxflow::Capacity>> column_terminals(
        int surface, int column, std::span<const double> costs) const;

    /// Sum of max(-w, 0) over the node weights of one column; the cut capacity
    /// minus the sum of these constants is the total quantized cost.
    std::int64_t column_constant(int surface, std::span<const double> costs) const;

private:
    friend FlowNetwork build_network(const GraphSpec&, std::span<const CostTable* const>);

    GraphSpec spec_;
    maxflow::Network net_;
    std::vector<ArcKind> kinds_;
    std::vector<int> surface_offset_;  // first node of each surface, plus total
    std::vector<char> reversed_;
    std::vector<int> forbid_from_;     // per (surface, column) lowest forbidden graph index, K if none
    std::vector<int> column_offset_;   // per surface, first (surface, column) slot
    maxflow::Capacity inf_ = 0;
};

/// Builds the network; `costs[s]` is the cost table of surface s.
/// Throws when the bounds admit no configuration.
FlowNetwork build_network(const GraphSpec& spec, std::span<const CostTable* const> costs);

/// Object colouring used by build_network: 0 or 1 per object id present in the spec.
/// Throws when the inter-object links are not two-colourable.
std::vector<int> object_colors(const GraphSpec& spec);

/// True when some assignment of j in [0, K) satisfies every constraint.
bool bounds_feasible(const GraphSpec& spec);

struct SurfaceSolution {
    std::vector<std::vector<int>> nodes;  // [surface][column] -> j
    std::vector<double> cost;             // per surface, sum of selected costs

    friend bool operator==(const SurfaceSolution&, const SurfaceSolution&) = default;
};

/// Reads j per column from a source-side set: the highest source-side graph
/// index, mapped back to the surface orientation. Throws if the set is not a
/// closed set of the network (an infinite arc crosses it).
SurfaceSolution extract_surfaces(const FlowNetwork& net, const std::vector<char>& source_side,
                                 std::span<const CostTable* const> costs);

/// Re-reads only the columns containing `nodes`.
void update_surfaces(SurfaceSolution& sol, const FlowNetwork& net, const std::vector<char>& source_side,
                     std::span<const int> nodes, std::span<const CostTable* const> costs);

double total_cost(const SurfaceSolution& sol);
/// Sum of quantized selected costs, exact.
std::int64_t quantized_cost(const SurfaceSolution& sol, std::span<const CostTable* const> costs);

enum class ConstraintKind { smoothness, inter_surface, inter_object, inter_time, range };

std::string_view to_string(ConstraintKind k);

struct Violation {
    ConstraintKind kind = ConstraintKind::smoothness;
    int surface_a = 0;
    int column_a = 0;
    int surface_b = 0;
    int column_b = 0;
    int gap = 0;
};

/// Every violated constraint; empty when the solution is feasible.
std::vector<Violation> validate_solution(const SurfaceSolution& sol, const GraphSpec& spec);

/// Facing column pairs between two objects: base points are mutual nearest
/// neighbours within `contact_mm`, the base directions are opposed within
/// `max_angle_deg`, and each column points toward the other's base point.
struct ColumnPair {
    int a = 0;
    int b = 0;
    double distance = 0.0;
};

std::vector<ColumnPair> pair_objects(const ColumnSet& a, const ColumnSet& b, double contact_mm,
                                     double max_angle_deg = 45.0);

/// Inter-object link for paired columns: offset = 2 * base + round(distance / spacing).
InterObjectLink make_inter_object_link(int surface_a, int surface_b, const ColumnSet& a, const ColumnSet& b,
                                       std::span<const ColumnPair> pairs, Bounds bounds);

}  // namespace jei
