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

#include "jei/graphnet.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numbers>

namespace jei {

using maxflow::Capacity;

std::int64_t quantize_cost(double c) { return std::llround(c * kCostScale); }

std::string_view to_string(ConstraintKind k) {
    switch (k) {
        case ConstraintKind::smoothness: return "smoothness";
        case ConstraintKind::inter_surface: return "inter_surface";
        case ConstraintKind::inter_object: return "inter_object";
        case ConstraintKind::inter_time: return "inter_time";
        case ConstraintKind::range: return "range";
    }
    return "unknown";
}

int GraphSpec::smoothness_of(int surface) const {
    const int s = surfaces[surface].smoothness;
    return s >= 0 ? s : smoothness;
}

void GraphSpec::validate() const {
    if (nodes_per_column < 2) throw Error("graph columns need at least 2 nodes");
    if (smoothness < 0) throw Error("smoothness must be >= 0");
    if (surfaces.empty()) throw Error("graph has no surfaces");
    const int ns = static_cast<int>(surfaces.size());
    for (const auto& s : surfaces) {
        if (s.columns < 1) throw Error("surface has no columns");
        for (const auto& [a, b] : s.adjacency)
            if (a < 0 || b < 0 || a >= s.columns || b >= s.columns || a == b)
                throw Error("surface adjacency index out of range");
    }
    auto check_surface = [&](int s) {
        if (s < 0 || s >= ns) throw Error("link refers to an unknown surface");
    };
    auto check_bounds = [](const Bounds& b) {
        if (b.min < 0 || b.max < b.min) throw Error("bounds need 0 <= min <= max");
    };
    for (const auto& l : inter_surface) {
        check_surface(l.lower);
        check_surface(l.upper);
        check_bounds(l.bounds);
        if (l.lower == l.upper) throw Error("inter-surface link needs two surfaces");
        if (surfaces[l.lower].columns != surfaces[l.upper].columns ||
            surfaces[l.lower].object != surfaces[l.upper].object)
            throw Error("inter-surface link needs surfaces of one object on one column set");
    }
    for (const auto& l : inter_time) {
        check_surface(l.earlier);
        check_surface(l.later);
        if (l.max < 0) throw Error("inter-time bound must be >= 0");
        if (l.earlier == l.later) throw Error("inter-time link needs two surfaces");
        if (surfaces[l.earlier].columns != surfaces[l.later].columns ||
            surfaces[l.earlier].object != surfaces[l.later].object)
            throw Error("inter-time link needs the same object on corresponding columns");
    }
    for (const auto& l : inter_object) {
        check_surface(l.surface_a);
        check_surface(l.surface_b);
        check_bounds(l.bounds);
        std::vector<char> used_a(surfaces[l.surface_a].columns, 0), used_b(surfaces[l.surface_b].columns, 0);
        for (const auto& p : l.pairs) {
            if (p.a < 0 || p.b < 0 || p.a >= surfaces[l.surface_a].columns || p.b >= surfaces[l.surface_b].columns)
                throw Error("inter-object pair out of range");
            if (used_a[p.a]++ || used_b[p.b]++) throw Error("inter-object pairing is not one-to-one");
        }
    }
    object_colors(*this);
}

std::vector<int> object_colors(const GraphSpec& spec) {
    int max_obj = 0;
    for (const auto& s : spec.surfaces) {
        if (s.object < 0) throw Error("object ids must be >= 0");
        max_obj = std::max(max_obj, s.object);
    }
    std::vector<std::vector<int>> adj(max_obj + 1);
    for (const auto& l : spec.inter_object) {
        const int a = spec.surfaces[l.surface_a].object;
        const int b = spec.surfaces[l.surface_b].object;
        if (a == b) throw Error("inter-object link within one object");
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<int> color(max_obj + 1, -1);
    for (int start = 0; start <= max_obj; ++start) {
        if (color[start] >= 0) continue;
        color[start] = 0;
        std::deque<int> q{start};
        while (!q.empty()) {
            const int u = q.front();
            q.pop_front();
            for (int v : adj[u]) {
                if (color[v] < 0) {
                    color[v] = 1 - color[u];
                    q.push_back(v);
                } else if (color[v] == color[u]) {
                    throw Error("inter-object links are not two-colourable");
                }
            }
        }
    }
    return color;
}

namespace {

/// G_u - G_v <= d over (surface, column) slots in graph orientation.
struct DiffConstraint {
    int u = 0;
    int v = 0;
    int d = 0;
    ArcKind kind = ArcKind::smoothness;
};

struct Layout {
    std::vector<int> column_offset;  // per surface, first slot
    std::vector<char> reversed;
    int slots = 0;
};

Layout make_layout(const GraphSpec& spec) {
    Layout l;
    const auto colors = object_colors(spec);
    for (const auto& s : spec.surfaces) {
        l.column_offset.push_back(l.slots);
        l.slots += s.columns;
        l.reversed.push_back(static_cast<char>(colors[s.object] == 1));
    }
    return l;
}

std::vector<DiffConstraint> collect_constraints(const GraphSpec& spec, const Layout& l) {
    std::vector<DiffConstraint> out;
    const int k = spec.nodes_per_column;
    auto slot = [&](int s, int c) { return l.column_offset[s] + c; };
    for (int s = 0; s < static_cast<int>(spec.surfaces.size()); ++s) {
        const int delta = spec.smoothness_of(s);
        for (const auto& [a, b] : spec.surfaces[s].adjacency) {
            out.push_back({slot(s, a), slot(s, b), delta, ArcKind::smoothness});
            out.push_back({slot(s, b), slot(s, a), delta, ArcKind::smoothness});
        }
    }
    for (const auto& link : spec.inter_surface) {
        // j_upper - j_lower in [min, max]; reversal negates both sides.
        const bool rev = l.reversed[link.lower];
        const int hi = rev ? link.lower : link.upper;
        const int lo = rev ? link.upper : link.lower;
        for (int c = 0; c < spec.surfaces[link.lower].columns; ++c) {
            out.push_back({slot(hi, c), slot(lo, c), link.bounds.max, ArcKind::inter_surface});
            out.push_back({slot(lo, c), slot(hi, c), -link.bounds.min, ArcKind::inter_surface});
        }
    }
    for (const auto& link : spec.inter_time) {
        for (int c = 0; c < spec.surfaces[link.earlier].columns; ++c) {
            out.push_back({slot(link.later, c), slot(link.earlier, c), link.max, ArcKind::inter_time});
            out.push_back({slot(link.earlier, c), slot(link.later, c), link.max, ArcKind::inter_time});
        }
    }
    for (const auto& link : spec.inter_object) {
        // offset - j_x - j_y in [min, max] with j_y = K - 1 - g_y.
        const bool a_plain = !l.reversed[link.surface_a];
        const int sx = a_plain ? link.surface_a : link.surface_b;
        const int sy = a_plain ? link.surface_b : link.surface_a;
        for (const auto& p : link.pairs) {
            const int cx = a_plain ? p.a : p.b;
            const int cy = a_plain ? p.b : p.a;
            out.push_back({slot(sx, cx), slot(sy, cy), p.offset - link.bounds.min - k + 1, ArcKind::inter_object});
            out.push_back({slot(sy, cy), slot(sx, cx), link.bounds.max - p.offset + k - 1, ArcKind::inter_object});
        }
    }
    return out;
}

/// Bellman-Ford (queue based) on the difference-constraint graph with a
/// virtual zero variable bounding every slot to [0, K-1].
bool constraints_feasible(int slots, int k, const std::vector<DiffConstraint>& cons) {
    const int z = slots;
    const int n = slots + 1;
    std::vector<std::vector<std::pair<int, int>>> out(n);  // edge v -> u with weight d
    for (const auto& c : cons) out[c.v].push_back({c.u, c.d});
    for (int x = 0; x < slots; ++x) {
        out[z].push_back({x, k - 1});
        out[x].push_back({z, 0});
    }
    std::vector<long long> dist(n, std::numeric_limits<long long>::max());
    std::vector<int> hops(n, 0);
    std::vector<char> queued(n, 0);
    std::deque<int> q;
    dist[z] = 0;
    q.push_back(z);
    queued[z] = 1;
    while (!q.empty()) {
        const int v = q.front();
        q.pop_front();
        queued[v] = 0;
        for (const auto& [u, d] : out[v]) {
            if (dist[v] + d < dist[u]) {
                dist[u] = dist[v] + d;
                hops[u] = hops[v] + 1;
                if (hops[u] > n) return false;
                if (!queued[u]) {
                    queued[u] = 1;
                    q.push_back(u);
                }
            }
        }
    }
    return true;
}

}  // namespace

bool bounds_feasible(const GraphSpec& spec) {
    spec.validate();
    const Layout l = make_layout(spec);
    return constraints_feasible(l.slots, spec.nodes_per_column, collect_constraints(spec, l));
}

int FlowNetwork::node_id(int surface, int column, int j) const {
    const int k = spec_.nodes_per_column;
    const int g = reversed_[surface] ? k - 1 - j : j;
    return surface_offset_[surface] + column * k + g;
}

int FlowNetwork::surface_of_node(int node) const {
    const auto it = std::upper_bound(surface_offset_.begin(), surface_offset_.end(), node);
    return static_cast<int>(it - surface_offset_.begin()) - 1;
}

NodeRef FlowNetwork::node_ref(int node) const {
    const int k = spec_.nodes_per_column;
    const int s = surface_of_node(node);
    const int local = node - surface_offset_[s];
    const int g = local % k;
    return {s, local / k, reversed_[s] ? k - 1 - g : g};
}

namespace {

std::vector<std::int64_t> graph_weights(std::span<const double> costs, bool reversed) {
    const int k = static_cast<int>(costs.size());
    std::vector<std::int64_t> w(k);
    std::int64_t prev = 0;
    for (int g = 0; g < k; ++g) {
        const std::int64_t q = quantize_cost(costs[reversed ? k - 1 - g : g]);
        w[g] = g == 0 ? q : q - prev;
        prev = q;
    }
    return w;
}

}  // namespace

std::vector<std::pair<Capacity, Capacity>> FlowNetwork::column_terminals(int surface, int column,
                                                                          std::span<const double> costs) const {
    const int k = spec_.nodes_per_column;
    if (static_cast<int>(costs.size()) != k) throw Error("cost column length mismatch");
    const auto w = graph_weights(costs, reversed_[surface]);
    const int forbid = forbid_from_[column_offset_[surface] + column];
    std::vector<std::pair<Capacity, Capacity>> out(k);
    for (int g = 0; g < k; ++g) {
        Capacity cs = w[g] < 0 ? -w[g] : 0;
        Capacity ct = w[g] >= 0 ? w[g] : 0;
        if (g == 0) cs += inf_;
        if (g == forbid) ct += inf_;
        out[g] = {cs, ct};
    }
    return out;
}

std::int64_t FlowNetwork::column_constant(int surface, std::span<const double> costs) const {
    std::int64_t c = 0;
    for (std::int64_t w : graph_weights(costs, reversed_[surface]))
        if (w < 0) c -= w;
    return c;
}

FlowNetwork build_network(const GraphSpec& spec, std::span<const CostTable* const> costs) {
    spec.validate();
    const int k = spec.nodes_per_column;
    const int ns = static_cast<int>(spec.surfaces.size());
    if (static_cast<int>(costs.size()) != ns) throw Error("one cost table per surface required");
    for (int s = 0; s < ns; ++s) {
        if (!costs[s] || costs[s]->column_count() != spec.surfaces[s].columns || costs[s]->nodes_per_column() != k)
            throw Error("cost table dimensions do not match surface " + std::to_string(s));
    }

    const Layout layout = make_layout(spec);
    const auto cons = collect_constraints(spec, layout);
    if (!constraints_feasible(layout.slots, k, cons))
        throw Error("infeasible bounds: no surface configuration satisfies every constraint");

    FlowNetwork fn;
    fn.spec_ = spec;
    fn.reversed_ = layout.reversed;
    fn.column_offset_ = layout.column_offset;
    std::int64_t total = 0;
    for (int s = 0; s < ns; ++s) {
        fn.surface_offset_.push_back(static_cast<int>(total));
        total += static_cast<std::int64_t>(spec.surfaces[s].columns) * k;
    }
    if (total > std::numeric_limits<int>::max() / 2) throw Error("graph too large");
    fn.surface_offset_.push_back(static_cast<int>(total));
    // Every node weight is at most one cost unit in magnitude, so no finite cut
    // can reach this value whatever the costs become after edits.
    fn.inf_ = total * static_cast<Capacity>(kCostScale) + 1;

    auto& net = fn.net_;
    net.node_count = static_cast<int>(total);
    auto slot_node = [&](int slot, int g) {
        const auto it = std::upper_bound(layout.column_offset.begin(), layout.column_offset.end(), slot);
        const int s = static_cast<int>(it - layout.column_offset.begin()) - 1;
        return fn.surface_offset_[s] + (slot - layout.column_offset[s]) * k + g;
    };

    for (int s = 0; s < ns; ++s)
        for (int c = 0; c < spec.surfaces[s].columns; ++c)
            for (int g = 1; g < k; ++g) {
                const int id = fn.surface_offset_[s] + c * k + g;
                net.arcs.push_back({id, id - 1, fn.inf_, 0});
                fn.kinds_.push_back(ArcKind::intra_column);
            }

    fn.forbid_from_.assign(layout.slots, k);
    for (const auto& dc : cons) {
        for (int g = std::max(0, dc.d + 1); g <= std::min(k - 1, dc.d + k - 1); ++g) {
            net.arcs.push_back({slot_node(dc.u, g), slot_node(dc.v, g - dc.d), fn.inf_, 0});
            fn.kinds_.push_back(dc.kind);
        }
        if (dc.d < 0) fn.forbid_from_[dc.u] = std::min(fn.forbid_from_[dc.u], dc.d + k);
    }

    net.source_caps.assign(total, 0);
    net.sink_caps.assign(total, 0);
    for (int s = 0; s < ns; ++s)
        for (int c = 0; c < spec.surfaces[s].columns; ++c) {
            const auto t = fn.column_terminals(s, c, costs[s]->column(c));
            for (int g = 0; g < k; ++g) {
                const int id = fn.surface_offset_[s] + c * k + g;
                net.source_caps[id] = t[g].first;
                net.sink_caps[id] = t[g].second;
            }
        }
    return fn;
}

namespace {

int read_column(const FlowNetwork& net, const std::vector<char>& side, int s, int c) {
    const int k = net.nodes_per_column();
    const int first = net.node_id(s, c, net.reversed(s) ? k - 1 : 0);
    int g = 0;
    if (!side[first]) throw Error("internal error: infinite arc crosses the cut (base node on sink side)");
    while (g + 1 < k && side[first + g + 1]) ++g;
    for (int h = g + 1; h < k; ++h)
        if (side[first + h]) throw Error("internal error: infinite arc crosses the cut (column not a prefix)");
    return net.reversed(s) ? k - 1 - g : g;
}

void recompute_costs(SurfaceSolution& sol, std::span<const CostTable* const> costs) {
    sol.cost.assign(sol.nodes.size(), 0.0);
    for (std::size_t s = 0; s < sol.nodes.size(); ++s)
        for (std::size_t c = 0; c < sol.nodes[s].size(); ++c) sol.cost[s] += costs[s]->at(static_cast<int>(c), sol.nodes[s][c]);
}

}  // namespace

SurfaceSolution extract_surfaces(const FlowNetwork& net, const std::vector<char>& source_side,
                                 std::span<const CostTable* const> costs) {
    const auto& n = net.network();
    if (static_cast<int>(source_side.size()) != n.node_count) throw Error("cut size does not match the network");
    for (std::size_t a = 0; a < n.arcs.size(); ++a)
        if (source_side[n.arcs[a].from] && !source_side[n.arcs[a].to])
            throw Error("internal error: infinite arc crosses the cut");
    for (int v = 0; v < n.node_count; ++v)
        if (source_side[v] && n.sink_caps[v] >= net.infinity())
            throw Error("internal error: forbidden node on the source side");

    const auto& spec = net.spec();
    SurfaceSolution sol;
    sol.nodes.resize(spec.surfaces.size());
    for (std::size_t s = 0; s < spec.surfaces.size(); ++s) {
        sol.nodes[s].resize(spec.surfaces[s].columns);
        for (int c = 0; c < spec.surfaces[s].columns; ++c)
            sol.nodes[s][c] = read_column(net, source_side, static_cast<int>(s), c);
    }
    recompute_costs(sol, costs);
    return sol;
}

void update_surfaces(SurfaceSolution& sol, const FlowNetwork& net, const std::vector<char>& source_side,
                     std::span<const int> nodes, std::span<const CostTable* const> costs) {
    for (int v : nodes) {
        const NodeRef r = net.node_ref(v);
        sol.nodes[r.surface][r.column] = read_column(net, source_side, r.surface, r.column);
    }
    recompute_costs(sol, costs);
}

double total_cost(const SurfaceSolution& sol) {
    double t = 0.0;
    for (double c : sol.cost) t += c;
    return t;
}

std::int64_t quantized_cost(const SurfaceSolution& sol, std::span<const CostTable* const> costs) {
    std::int64_t t = 0;
    for (std::size_t s = 0; s < sol.nodes.size(); ++s)
        for (std::size_t c = 0; c < sol.nodes[s].size(); ++c)
            t += quantize_cost(costs[s]->at(static_cast<int>(c), sol.nodes[s][c]));
    return t;
}

std::vector<Violation> validate_solution(const SurfaceSolution& sol, const GraphSpec& spec) {
    std::vector<Violation> out;
    const int k = spec.nodes_per_column;
    if (sol.nodes.size() != spec.surfaces.size()) throw Error("solution does not match the graph spec");
    for (std::size_t s = 0; s < spec.surfaces.size(); ++s) {
        if (static_cast<int>(sol.nodes[s].size()) != spec.surfaces[s].columns)
            throw Error("solution does not match the graph spec");
        for (int c = 0; c < spec.surfaces[s].columns; ++c) {
            const int j = sol.nodes[s][c];
            if (j < 0 || j >= k) out.push_back({ConstraintKind::range, int(s), c, int(s), c, j});
        }
    }
    if (!out.empty()) return out;

    for (std::size_t s = 0; s < spec.surfaces.size(); ++s) {
        const int delta = spec.smoothness_of(static_cast<int>(s));
        for (const auto& [a, b] : spec.surfaces[s].adjacency) {
            const int gap = std::abs(sol.nodes[s][a] - sol.nodes[s][b]);
            if (gap > delta) out.push_back({ConstraintKind::smoothness, int(s), a, int(s), b, gap});
        }
    }
    for (const auto& l : spec.inter_surface)
        for (int c = 0; c < spec.surfaces[l.lower].columns; ++c) {
            const int sep = sol.nodes[l.upper][c] - sol.nodes[l.lower][c];
            if (sep < l.bounds.min || sep > l.bounds.max)
                out.push_back({ConstraintKind::inter_surface, l.lower, c, l.upper, c, sep});
        }
    for (const auto& l : spec.inter_object)
        for (const auto& p : l.pairs) {
            const int sep = p.offset - sol.nodes[l.surface_a][p.a] - sol.nodes[l.surface_b][p.b];
            if (sep < l.bounds.min || sep > l.bounds.max)
                out.push_back({ConstraintKind::inter_object, l.surface_a, p.a, l.surface_b, p.b, sep});
        }
    for (const auto& l : spec.inter_time)
        for (int c = 0; c < spec.surfaces[l.earlier].columns; ++c) {
            const int gap = std::abs(sol.nodes[l.later][c] - sol.nodes[l.earlier][c]);
            if (gap > l.max) out.push_back({ConstraintKind::inter_time, l.earlier, c, l.later, c, gap});
        }
    return out;
}

std::vector<ColumnPair> pair_objects(const ColumnSet& a, const ColumnSet& b, double contact_mm, double max_angle_deg) {
    const int na = a.column_count(), nb = b.column_count();
    std::vector<ColumnPair> out;
    if (na == 0 || nb == 0) return out;
    auto nearest = [](const ColumnSet& from, int i, const ColumnSet& to) {
        int best = 0;
        double bd = std::numeric_limits<double>::infinity();
        const Vec3& p = from.base_point(i);
        for (int j = 0; j < to.column_count(); ++j) {
            const Vec3 d = to.base_point(j) - p;
            const double d2 = dot(d, d);
            if (d2 < bd) {
                bd = d2;
                best = j;
            }
        }
        return best;
    };
    std::vector<int> nn_b(nb);
    for (int j = 0; j < nb; ++j) nn_b[j] = nearest(b, j, a);
    const double cos_limit = std::cos(max_angle_deg * std::numbers::pi / 180.0);
    for (int i = 0; i < na; ++i) {
        const int j = nearest(a, i, b);
        if (nn_b[j] != i) continue;
        const Vec3 ab = b.base_point(j) - a.base_point(i);
        const double dist = norm(ab);
        if (dist > contact_mm) continue;
        const Vec3 da = a.base_direction(i), db = b.base_direction(j);
        if (dot(da, -db) < cos_limit) continue;
        if (dist > 0.0 && (dot(ab, da) <= 0.0 || dot(-ab, db) <= 0.0)) continue;
        out.push_back({i, j, dist});
    }
    return out;
}

InterObjectLink make_inter_object_link(int surface_a, int surface_b, const ColumnSet& a, const ColumnSet& b,
                                       std::span<const ColumnPair> pairs, Bounds bounds) {
    InterObjectLink link;
    link.surface_a = surface_a;
    link.surface_b = surface_b;
    link.bounds = bounds;
    for (const auto& p : pairs)
        link.pairs.push_back({p.a, p.b,
                              a.base_index() + b.base_index() + static_cast<int>(std::lround(p.distance / a.spacing()))});
    return link;
}

}  // namespace jei
