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

#include "jei/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>
#include <thread>

namespace jei {

namespace {

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) { return 0.5 * norm(cross(b - a, c - a)); }

}  // namespace

std::vector<Vec3> estimate_normals(const std::vector<Vec3>& vertices, const std::vector<Triangle>& triangles) {
    std::vector<Vec3> acc(vertices.size());
    for (const auto& t : triangles) {
        const Vec3 n = cross(vertices[t[1]] - vertices[t[0]], vertices[t[2]] - vertices[t[0]]);
        for (int v : t) acc[v] += n;
    }
    for (auto& n : acc) {
        n = normalized(n);
        if (n == Vec3{}) n = {0.0, 0.0, 1.0};
    }
    return acc;
}

Mesh::Mesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
    for (const auto& t : triangles_)
        for (int v : t)
            if (v < 0 || static_cast<std::size_t>(v) >= vertices_.size()) throw Error("triangle index out of range");
    normals_ = estimate_normals(vertices_, triangles_);
    validate();
}

Mesh::Mesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles, std::vector<Vec3> normals)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)), normals_(std::move(normals)) {
    validate();
}

void Mesh::validate() const {
    if (normals_.size() != vertices_.size()) throw Error("mesh normal count differs from vertex count");
    for (const auto& n : normals_)
        if (std::abs(norm(n) - 1.0) > 1e-6) throw Error("mesh normal is not unit length");
    std::map<std::pair<int, int>, int> edge_use;
    for (const auto& t : triangles_) {
        for (int v : t)
            if (v < 0 || static_cast<std::size_t>(v) >= vertices_.size()) throw Error("triangle index out of range");
        if (!(triangle_area(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]) > 0.0))
            throw Error("degenerate triangle");
        for (int e = 0; e < 3; ++e) {
            const int a = t[e];
            const int b = t[(e + 1) % 3];
            if (++edge_use[{std::min(a, b), std::max(a, b)}] > 2) throw Error("mesh edge shared by more than two triangles");
        }
    }
}

std::vector<std::pair<int, int>> Mesh::edges() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(triangles_.size() * 3);
    for (const auto& t : triangles_)
        for (int e = 0; e < 3; ++e) {
            const int a = t[e];
            const int b = t[(e + 1) % 3];
            out.emplace_back(std::min(a, b), std::max(a, b));
        }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double Mesh::surface_area() const {
    double area = 0.0;
    for (const auto& t : triangles_) area += triangle_area(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
    return area;
}

Mesh make_ellipsoid_mesh(const Vec3& center, const Vec3& radii, int level) {
    if (!(radii.x > 0.0 && radii.y > 0.0 && radii.z > 0.0)) throw Error("ellipsoid radii must be positive");
    if (level < 0) throw Error("subdivision level must be >= 0");

    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> unit = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0}, {0, -1, t},  {0, 1, t},
                              {0, -1, -t}, {0, 1, -t}, {t, 0, -1},  {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
    for (auto& u : unit) u = normalized(u);
    std::vector<Triangle> tris = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},  {5, 11, 4},
                                  {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6},  {3, 6, 8},
                                  {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};

    for (int l = 0; l < level; ++l) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = std::make_pair(std::min(a, b), std::max(a, b));
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            unit.push_back(normalized(unit[a] + unit[b]));
            const int idx = static_cast<int>(unit.size()) - 1;
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<Triangle> next;
        next.reserve(tris.size() * 4);
        for (const auto& tr : tris) {
            const int a = mid(tr[0], tr[1]);
            const int b = mid(tr[1], tr[2]);
            const int c = mid(tr[2], tr[0]);
            next.push_back({tr[0], a, c});
            next.push_back({tr[1], b, a});
            next.push_back({tr[2], c, b});
            next.push_back({a, b, c});
        }
        tris = std::move(next);
    }

    std::vector<Vec3> vertices(unit.size());
    std::vector<Vec3> normals(unit.size());
    for (std::size_t i = 0; i < unit.size(); ++i) {
        const Vec3& u = unit[i];
        vertices[i] = center + Vec3{radii.x * u.x, radii.y * u.y, radii.z * u.z};
        normals[i] = normalized(Vec3{u.x / radii.x, u.y / radii.y, u.z / radii.z});
    }
    return Mesh(std::move(vertices), std::move(tris), std::move(normals));
}

namespace {

template <typename T>
void put(std::string& out, T v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, end);
}

}  // namespace

std::string encode_mesh(const Mesh& m) {
    std::string out = "MESH1\n";
    put(out, m.vertices().size());
    out += ' ';
    put(out, m.triangles().size());
    out += '\n';
    for (const auto& v : m.vertices()) {
        put(out, v.x); out += ' ';
        put(out, v.y); out += ' ';
        put(out, v.z); out += '\n';
    }
    for (const auto& t : m.triangles()) {
        put(out, t[0]); out += ' ';
        put(out, t[1]); out += ' ';
        put(out, t[2]); out += '\n';
    }
    return out;
}

Mesh decode_mesh(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string magic;
    if (!(in >> magic) || magic != "MESH1") throw Error("malformed mesh: missing MESH1 magic");
    std::size_t nv = 0, nt = 0;
    if (!(in >> nv >> nt)) throw Error("malformed mesh: bad counts line");
    std::vector<Vec3> vertices(nv);
    for (auto& v : vertices)
        if (!(in >> v.x >> v.y >> v.z)) throw Error("malformed mesh: truncated vertex list");
    std::vector<Triangle> tris(nt);
    for (auto& t : tris)
        if (!(in >> t[0] >> t[1] >> t[2])) throw Error("malformed mesh: truncated triangle list");
    return Mesh(std::move(vertices), std::move(tris));
}

Mesh load_mesh(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open mesh file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return decode_mesh(ss.str());
}

void save_mesh(const Mesh& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write mesh file: " + path.string());
    out << encode_mesh(m);
}

std::string_view to_string(ColumnMethod m) { return m == ColumnMethod::elf ? "elf" : "normal"; }

ColumnMethod column_method_from_string(std::string_view s) {
    if (s == "elf") return ColumnMethod::elf;
    if (s == "normal") return ColumnMethod::normal;
    throw Error("unknown column method '" + std::string(s) + "'");
}

ColumnSet::ColumnSet(int nodes_per_column, double spacing, int base_index, std::vector<Vec3> positions,
                     std::vector<std::pair<int, int>> adjacency, std::vector<Triangle> triangles)
    : k_(nodes_per_column), spacing_(spacing), base_(base_index), positions_(std::move(positions)),
      adjacency_(std::move(adjacency)), triangles_(std::move(triangles)) {
    if (k_ < 1 || positions_.size() % static_cast<std::size_t>(k_) != 0) throw Error("column positions do not divide into columns");
    if (base_ < 0 || base_ >= k_) throw Error("column base index out of range");
    columns_ = static_cast<int>(positions_.size() / k_);
    for (const auto& [a, b] : adjacency_)
        if (a < 0 || b < 0 || a >= columns_ || b >= columns_) throw Error("column adjacency out of range");
}

Vec3 ColumnSet::base_direction(int c) const { return direction(c, base_); }

Vec3 ColumnSet::direction(int c, int j) const {
    const int lo = std::max(j - 1, 0);
    const int hi = std::min(j + 1, k_ - 1);
    return normalized(position(c, hi) - position(c, lo));
}

double ColumnSet::arc_length(int c, int j) const {
    double s = 0.0;
    for (int m = 1; m <= j; ++m) s += distance(position(c, m), position(c, m - 1));
    return s;
}

Mesh ColumnSet::surface_mesh(std::span<const int> nodes) const {
    if (static_cast<int>(nodes.size()) != columns_) throw Error("surface node count differs from column count");
    std::vector<Vec3> verts(columns_);
    for (int c = 0; c < columns_; ++c) verts[c] = position(c, nodes[c]);
    auto normals = estimate_normals(verts, triangles_);
    return Mesh(std::move(verts), triangles_, std::move(normals));
}

std::uint64_t ColumnSet::digest() const {
    Fnv1a h;
    h.value(columns_);
    h.value(k_);
    h.value(spacing_);
    h.value(base_);
    for (const auto& p : positions_) { h.value(p.x); h.value(p.y); h.value(p.z); }
    for (const auto& [a, b] : adjacency_) { h.value(a); h.value(b); }
    return h.digest();
}

namespace {

/// Field of unit positive charges at the mesh vertices, decaying as 1/r^4.
/// With the Coulomb 1/r^2 law the field inside a closed mesh cancels and
/// inward lines wander; the steeper law keeps the nearby surface dominant.
class ChargeField {
public:
    explicit ChargeField(const std::vector<Vec3>& charges) {
        xs_.reserve(charges.size());
        ys_.reserve(charges.size());
        zs_.reserve(charges.size());
        for (const auto& q : charges) {
            xs_.push_back(static_cast<float>(q.x));
            ys_.push_back(static_cast<float>(q.y));
            zs_.push_back(static_cast<float>(q.z));
        }
    }

    Vec3 operator()(const Vec3& p) const {
        // Single precision halves the cost of the O(V) sum; only the direction is used.
        const float px = static_cast<float>(p.x), py = static_cast<float>(p.y), pz = static_cast<float>(p.z);
        float ex = 0.0f, ey = 0.0f, ez = 0.0f;
        const std::size_t n = xs_.size();
        for (std::size_t i = 0; i < n; ++i) {
            const float dx = px - xs_[i];
            const float dy = py - ys_[i];
            const float dz = pz - zs_[i];
            const float r2 = dx * dx + dy * dy + dz * dz;
            const float inv = 1.0f / (r2 * r2 * std::sqrt(r2));
            ex += dx * inv;
            ey += dy * inv;
            ez += dz * inv;
        }
        return {ex, ey, ez};
    }

private:
    std::vector<float> xs_, ys_, zs_;
};

constexpr double kFieldEpsilon = 1e-12;

/// Streamline from `vertex` on the side given by `side` (+1 outward, -1 inward),
/// resampled to `count` nodes at arc lengths spacing, 2*spacing, ...
std::vector<Vec3> trace_line(const ChargeField& field, const Vec3& vertex, const Vec3& normal, double side,
                             double spacing, int count) {
    std::vector<Vec3> out;
    out.reserve(count);
    if (count == 0) return out;

    const double step = spacing / 4.0;
    const double need = spacing * count;
    Vec3 prev_dir = side * normal;
    Vec3 p = vertex + (1e-3 * spacing) * prev_dir;

    std::vector<Vec3> line{vertex, p};
    std::vector<double> arc{0.0, distance(vertex, p)};

    auto dir_at = [&](const Vec3& q, const Vec3& fallback) {
        const Vec3 e = field(q);
        const double n = norm(e);
        if (n < kFieldEpsilon) return fallback;
        Vec3 d = e * (1.0 / n);
        // Following the line of force: stay on the same branch as the previous step.
        if (dot(d, fallback) < 0.0) return fallback;
        return d;
    };

    while (arc.back() < need) {
        const Vec3 k1 = dir_at(p, prev_dir);
        const Vec3 mid = p + (0.5 * step) * k1;
        const Vec3 k2 = dir_at(mid, k1);
        p = p + step * k2;
        prev_dir = k2;
        arc.push_back(arc.back() + step);
        line.push_back(p);
    }

    std::size_t seg = 1;
    for (int m = 1; m <= count; ++m) {
        const double target = spacing * m;
        while (arc[seg] < target) ++seg;
        const double t = (target - arc[seg - 1]) / (arc[seg] - arc[seg - 1]);
        out.push_back(line[seg - 1] + t * (line[seg] - line[seg - 1]));
    }
    return out;
}

}  // namespace

ColumnSet build_columns(const Mesh& mesh, const ColumnParams& params, ColumnReport* report) {
    if (params.nodes < 3) throw Error("columns need at least 3 nodes");
    if (!(params.spacing > 0.0)) throw Error("column node spacing must be positive");
    if (!(params.inner_fraction > 0.0 && params.inner_fraction < 1.0)) throw Error("inner_fraction must be in (0, 1)");

    const int k = params.nodes;
    const int base = static_cast<int>(std::floor(params.inner_fraction * k));
    const int n_in = base;
    const int n_out = k - 1 - base;
    const auto nv = static_cast<int>(mesh.vertex_count());
    std::vector<Vec3> positions(static_cast<std::size_t>(nv) * k);
    std::vector<char> fallback(nv, 0);

    const ChargeField field(mesh.vertices());
    auto build_one = [&](int c) {
        const Vec3& v = mesh.vertices()[c];
        const Vec3& n = mesh.normals()[c];
        Vec3* col = positions.data() + static_cast<std::size_t>(c) * k;
        col[base] = v;
        bool use_normal = params.method == ColumnMethod::normal;
        if (!use_normal && norm(field(v + (1e-3 * params.spacing) * n)) < kFieldEpsilon) {
            use_normal = true;
            fallback[c] = 1;
        }
        if (use_normal) {
            for (int j = 0; j < k; ++j) col[j] = v + ((j - base) * params.spacing) * n;
            return;
        }
        const auto outward = trace_line(field, v, n, 1.0, params.spacing, n_out);
        const auto inward = trace_line(field, v, n, -1.0, params.spacing, n_in);
        for (int m = 0; m < n_out; ++m) col[base + 1 + m] = outward[m];
        for (int m = 0; m < n_in; ++m) col[base - 1 - m] = inward[m];
    };

    const int threads = std::max(1, std::min(params.threads, nv));
    if (threads == 1) {
        for (int c = 0; c < nv; ++c) build_one(c);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                for (int c = t; c < nv; c += threads) build_one(c);
            });
        for (auto& th : pool) th.join();
    }

    if (report) {
        report->normal_fallback.clear();
        for (int c = 0; c < nv; ++c)
            if (fallback[c]) report->normal_fallback.push_back(c);
    }

    ColumnSet cols(k, params.spacing, base, std::move(positions), mesh.edges(), mesh.triangles());
    const auto bad = find_intersections(cols);
    if (!bad.empty()) {
        std::string msg = "columns intersect:";
        const std::size_t shown = std::min<std::size_t>(bad.size(), 10);
        for (std::size_t i = 0; i < shown; ++i)
            msg += " (" + std::to_string(bad[i].first) + "," + std::to_string(bad[i].second) + ")";
        if (bad.size() > shown) msg += " ... " + std::to_string(bad.size()) + " pairs total";
        throw Error(msg);
    }
    return cols;
}

double segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1) {
    const Vec3 d1 = p1 - p0;
    const Vec3 d2 = q1 - q0;
    const Vec3 r = p0 - q0;
    const double a = dot(d1, d1);
    const double e = dot(d2, d2);
    const double f = dot(d2, r);
    double s = 0.0, t = 0.0;
    if (a <= 0.0 && e <= 0.0) return norm(r);
    if (a <= 0.0) {
        t = std::clamp(f / e, 0.0, 1.0);
    } else {
        const double c = dot(d1, r);
        if (e <= 0.0) {
            s = std::clamp(-c / a, 0.0, 1.0);
        } else {
            const double b = dot(d1, d2);
            const double denom = a * e - b * b;
            s = denom > 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
            t = (b * s + f) / e;
            if (t < 0.0) {
                t = 0.0;
                s = std::clamp(-c / a, 0.0, 1.0);
            } else if (t > 1.0) {
                t = 1.0;
                s = std::clamp((b - c) / a, 0.0, 1.0);
            }
        }
    }
    return norm((p0 + s * d1) - (q0 + t * d2));
}

double polyline_distance(std::span<const Vec3> a, std::span<const Vec3> b) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < a.size(); ++i) {
        const Vec3 ma = 0.5 * (a[i] + a[i - 1]);
        const double ra = 0.5 * distance(a[i], a[i - 1]);
        for (std::size_t j = 1; j < b.size(); ++j) {
            const Vec3 mb = 0.5 * (b[j] + b[j - 1]);
            const double rb = 0.5 * distance(b[j], b[j - 1]);
            if (distance(ma, mb) - ra - rb >= best) continue;
            best = std::min(best, segment_distance(a[i - 1], a[i], b[j - 1], b[j]));
        }
    }
    return best;
}

std::vector<std::pair<int, int>> find_intersections(const ColumnSet& cols, double threshold) {
    std::vector<std::pair<int, int>> bad;
    for (const auto& [a, b] : cols.adjacency())
        if (polyline_distance(cols.column(a), cols.column(b)) <= threshold) bad.emplace_back(a, b);
    return bad;
}

void SpatialIndex::add(int set, const ColumnSet& cols) {
    for (int c = 0; c < cols.column_count(); ++c)
        for (int j = 0; j < cols.nodes_per_column(); ++j) points_.push_back({cols.position(c, j), {set, {c, j}}});
    built_ = false;
}

void SpatialIndex::build() {
    nodes_.clear();
    if (!points_.empty()) build_node(0, static_cast<int>(points_.size()), 0);
    built_ = true;
}

int SpatialIndex::build_node(int begin, int end, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({begin, end});
    if (end - begin <= 8) return id;

    Vec3 lo = points_[begin].p, hi = points_[begin].p;
    for (int i = begin; i < end; ++i)
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::min(lo[a], points_[i].p[a]);
            hi[a] = std::max(hi[a], points_[i].p[a]);
        }
    int axis = 0;
    for (int a = 1; a < 3; ++a)
        if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
    (void)depth;

    const int mid = begin + (end - begin) / 2;
    std::nth_element(points_.begin() + begin, points_.begin() + mid, points_.begin() + end,
                     [axis](const Entry& x, const Entry& y) {
                         if (x.p[axis] != y.p[axis]) return x.p[axis] < y.p[axis];
                         return x.tag < y.tag;
                     });
    const double split = points_[mid].p[axis];
    const int left = build_node(begin, mid, depth + 1);
    const int right = build_node(mid, end, depth + 1);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

std::vector<Neighbor> SpatialIndex::nearest(const Vec3& p, int n, int set) const {
    if (!built_) throw Error("spatial index queried before build()");
    if (points_.empty()) throw Error("spatial index is empty");
    if (n < 1) throw Error("nearest-node count must be >= 1");

    using Candidate = std::pair<double, NodeTag>;  // squared distance, tag
    std::priority_queue<Candidate> heap;           // max-heap: worst on top
    const auto cap = static_cast<std::size_t>(n);

    auto worse_than_worst = [&](double d2) { return heap.size() == cap && d2 > heap.top().first; };

    auto visit = [&](auto&& self, int id) -> void {
        const KdNode& node = nodes_[id];
        if (node.axis < 0) {
            for (int i = node.begin; i < node.end; ++i) {
                const Entry& e = points_[i];
                if (set >= 0 && e.tag.set != set) continue;
                const Vec3 d = e.p - p;
                const Candidate c{dot(d, d), e.tag};
                if (heap.size() < cap) heap.push(c);
                else if (c < heap.top()) {
                    heap.pop();
                    heap.push(c);
                }
            }
            return;
        }
        const double delta = p[node.axis] - node.split;
        const int first = delta < 0.0 ? node.left : node.right;
        const int second = delta < 0.0 ? node.right : node.left;
        self(self, first);
        if (!worse_than_worst(delta * delta)) self(self, second);
    };
    visit(visit, 0);

    std::vector<Neighbor> out;
    out.reserve(heap.size());
    while (!heap.empty()) {
        out.push_back({heap.top().second, std::sqrt(heap.top().first)});
        heap.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
}

}  // namespace jei
