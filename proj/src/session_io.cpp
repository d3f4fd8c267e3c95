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

#include "jei/session_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "json.hpp"

namespace jei {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "session files assume a little-endian host");

namespace {

constexpr const char* kFormat = "jei-session-1";

template <typename T>
json blob(std::span<const T> v) {
    std::vector<std::uint8_t> bytes(v.size_bytes());
    if (!bytes.empty()) std::memcpy(bytes.data(), v.data(), bytes.size());
    return json::binary(std::move(bytes));
}

template <typename T>
json blob(const std::vector<T>& v) {
    return blob(std::span<const T>(v));
}

template <typename T>
std::vector<T> unblob(const json& j) {
    const auto& bytes = j.get_binary();
    if (bytes.size() % sizeof(T) != 0) throw Error("session file: truncated array");
    std::vector<T> out(bytes.size() / sizeof(T));
    if (!out.empty()) std::memcpy(out.data(), bytes.data(), bytes.size());
    return out;
}

json pairs_blob(const std::vector<std::pair<int, int>>& v) {
    std::vector<std::int32_t> flat;
    for (auto [a, b] : v) {
        flat.push_back(a);
        flat.push_back(b);
    }
    return blob(flat);
}

std::vector<std::pair<int, int>> unpairs(const json& j) {
    const auto flat = unblob<std::int32_t>(j);
    if (flat.size() % 2) throw Error("session file: odd pair array");
    std::vector<std::pair<int, int>> out;
    for (std::size_t i = 0; i < flat.size(); i += 2) out.push_back({flat[i], flat[i + 1]});
    return out;
}

json encode_column_set(const ColumnSet& c) {
    std::vector<double> pos;
    for (const Vec3& p : c.positions()) {
        pos.push_back(p.x);
        pos.push_back(p.y);
        pos.push_back(p.z);
    }
    std::vector<std::int32_t> tri;
    for (const auto& t : c.triangles()) tri.insert(tri.end(), t.begin(), t.end());
    return {{"k", c.nodes_per_column()},
            {"spacing", c.spacing()},
            {"base", c.base_index()},
            {"positions", blob(pos)},
            {"adjacency", pairs_blob(c.adjacency())},
            {"triangles", blob(tri)}};
}

ColumnSet decode_column_set(const json& j) {
    const auto pos = unblob<double>(j.at("positions"));
    if (pos.size() % 3) throw Error("session file: bad column positions");
    std::vector<Vec3> p;
    for (std::size_t i = 0; i < pos.size(); i += 3) p.push_back({pos[i], pos[i + 1], pos[i + 2]});
    const auto tri = unblob<std::int32_t>(j.at("triangles"));
    if (tri.size() % 3) throw Error("session file: bad column triangles");
    std::vector<Triangle> t;
    for (std::size_t i = 0; i < tri.size(); i += 3) t.push_back({tri[i], tri[i + 1], tri[i + 2]});
    return ColumnSet(j.at("k").get<int>(), j.at("spacing").get<double>(), j.at("base").get<int>(), std::move(p),
                     unpairs(j.at("adjacency")), std::move(t));
}

json encode_costs(const CostTable& c) {
    return {{"kind", to_string(c.kind())},
            {"weight", c.weight()},
            {"columns", c.column_count()},
            {"k", c.nodes_per_column()},
            {"values", blob(c.values())}};
}

CostTable decode_costs(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    SurfaceKind k;
    if (kind == "bone") k = SurfaceKind::bone;
    else if (kind == "cartilage") k = SurfaceKind::cartilage;
    else throw Error("session file: unknown surface kind '" + kind + "'");
    return CostTable(k, j.at("weight").get<double>(), j.at("columns").get<int>(), j.at("k").get<int>(),
                     unblob<double>(j.at("values")));
}

json bounds(const Bounds& b) { return json::array({b.min, b.max}); }
Bounds unbounds(const json& j) { return {j.at(0).get<int>(), j.at(1).get<int>()}; }

json encode_spec(const GraphSpec& g) {
    json j{{"k", g.nodes_per_column}, {"smoothness", g.smoothness}};
    j["surfaces"] = json::array();
    for (const auto& s : g.surfaces)
        j["surfaces"].push_back({{"object", s.object},
                                 {"timepoint", s.timepoint},
                                 {"columns", s.columns},
                                 {"adjacency", pairs_blob(s.adjacency)},
                                 {"smoothness", s.smoothness}});
    j["inter_surface"] = json::array();
    for (const auto& l : g.inter_surface)
        j["inter_surface"].push_back({{"lower", l.lower}, {"upper", l.upper}, {"bounds", bounds(l.bounds)}});
    j["inter_object"] = json::array();
    for (const auto& l : g.inter_object) {
        std::vector<std::int32_t> flat;
        for (const auto& p : l.pairs) flat.insert(flat.end(), {p.a, p.b, p.offset});
        j["inter_object"].push_back(
            {{"a", l.surface_a}, {"b", l.surface_b}, {"pairs", blob(flat)}, {"bounds", bounds(l.bounds)}});
    }
    j["inter_time"] = json::array();
    for (const auto& l : g.inter_time)
        j["inter_time"].push_back({{"earlier", l.earlier}, {"later", l.later}, {"max", l.max}});
    return j;
}

GraphSpec decode_spec(const json& j) {
    GraphSpec g;
    g.nodes_per_column = j.at("k").get<int>();
    g.smoothness = j.at("smoothness").get<int>();
    for (const auto& s : j.at("surfaces"))
        g.surfaces.push_back({s.at("object").get<int>(), s.at("timepoint").get<int>(), s.at("columns").get<int>(),
                              unpairs(s.at("adjacency")), s.at("smoothness").get<int>()});
    for (const auto& l : j.at("inter_surface"))
        g.inter_surface.push_back({l.at("lower").get<int>(), l.at("upper").get<int>(), unbounds(l.at("bounds"))});
    for (const auto& l : j.at("inter_object")) {
        InterObjectLink link{l.at("a").get<int>(), l.at("b").get<int>(), {}, unbounds(l.at("bounds"))};
        const auto flat = unblob<std::int32_t>(l.at("pairs"));
        if (flat.size() % 3) throw Error("session file: bad object pairs");
        for (std::size_t i = 0; i < flat.size(); i += 3) link.pairs.push_back({flat[i], flat[i + 1], flat[i + 2]});
        g.inter_object.push_back(std::move(link));
    }
    for (const auto& l : j.at("inter_time"))
        g.inter_time.push_back({l.at("earlier").get<int>(), l.at("later").get<int>(), l.at("max").get<int>()});
    g.validate();
    return g;
}

json encode_stroke(const NudgeStroke& s) {
    std::vector<double> pts;
    for (const auto& p : s.points) pts.insert(pts.end(), {p.x, p.y, p.z});
    return {{"surface", s.surface},
            {"timepoint", s.timepoint},
            {"delta_mm", s.delta_mm},
            {"n_nearest", s.n_nearest},
            {"points", blob(pts)}};
}

NudgeStroke decode_stroke(const json& j) {
    NudgeStroke s;
    s.surface = j.at("surface").get<int>();
    s.timepoint = j.at("timepoint").get<int>();
    s.delta_mm = j.at("delta_mm").get<double>();
    s.n_nearest = j.at("n_nearest").get<int>();
    const auto pts = unblob<double>(j.at("points"));
    if (pts.size() % 3) throw Error("session file: bad stroke points");
    for (std::size_t i = 0; i < pts.size(); i += 3) s.points.push_back({pts[i], pts[i + 1], pts[i + 2]});
    return s;
}

}  // namespace

std::vector<std::uint8_t> encode_session(const Session& s) {
    const SessionInputs& in = s.inputs();
    json j;
    j["format"] = kFormat;
    j["volumes"] = json::array();
    for (const auto& v : in.volumes) j["volumes"].push_back(json::binary(encode_volume(v)));
    j["labels"] = in.timepoint_labels;
    j["column_sets"] = json::array();
    for (const auto& c : in.column_sets) j["column_sets"].push_back(encode_column_set(c));
    j["surfaces"] = json::array();
    for (const auto& info : in.surfaces)
        j["surfaces"].push_back({{"name", info.name},
                                 {"object", info.object},
                                 {"timepoint", info.timepoint},
                                 {"kind", to_string(info.kind)},
                                 {"column_set", info.column_set}});
    j["costs"] = json::array();
    for (const auto& c : in.costs) j["costs"].push_back(encode_costs(c));
    j["spec"] = encode_spec(in.spec);
    j["nudge_defaults"] = {{"delta_mm", in.default_delta_mm}, {"n_nearest", in.default_n_nearest}};

    const maxflow::ResidualSnapshot snap = s.residual().snapshot();
    j["residual"] = {{"arcs", blob(snap.arc_residuals)},
                     {"nodes", blob(snap.node_residuals)},
                     {"source", blob(snap.source_caps)},
                     {"sink", blob(snap.sink_caps)},
                     {"flow", snap.flow},
                     {"reparameterization", snap.reparameterization},
                     {"generation", snap.generation}};

    json records = json::array();
    for (const auto& r : s.stack().records) {
        std::vector<double> prior;
        for (const auto& p : r.prior) prior.insert(prior.end(), p.begin(), p.end());
        std::vector<std::int32_t> cols(r.columns.begin(), r.columns.end());
        records.push_back({{"stroke", encode_stroke(r.stroke)},
                           {"columns", blob(cols)},
                           {"prior", blob(prior)},
                           {"generation", r.generation}});
    }
    j["stack"] = {{"records", records}, {"cursor", s.stack().cursor}};
    j["baseline_digest"] = to_hex(s.baseline_digest());
    j["generation"] = s.generation();
    return json::to_cbor(j);
}

Session decode_session(std::span<const std::uint8_t> bytes) {
    try {
        const json j = json::from_cbor(bytes.begin(), bytes.end());
        if (j.at("format").get<std::string>() != kFormat) throw Error("not a session file (unknown format)");
        SessionInputs in;
        for (const auto& v : j.at("volumes")) in.volumes.push_back(decode_volume(v.get_binary()));
        in.timepoint_labels = j.at("labels").get<std::vector<std::string>>();
        for (const auto& c : j.at("column_sets")) in.column_sets.push_back(decode_column_set(c));
        for (const auto& info : j.at("surfaces")) {
            const std::string kind = info.at("kind").get<std::string>();
            in.surfaces.push_back({info.at("name").get<std::string>(), info.at("object").get<int>(),
                                   info.at("timepoint").get<int>(),
                                   kind == "cartilage" ? SurfaceKind::cartilage : SurfaceKind::bone,
                                   info.at("column_set").get<int>()});
        }
        for (const auto& c : j.at("costs")) in.costs.push_back(decode_costs(c));
        in.spec = decode_spec(j.at("spec"));
        in.default_delta_mm = j.at("nudge_defaults").at("delta_mm").get<double>();
        in.default_n_nearest = j.at("nudge_defaults").at("n_nearest").get<int>();

        const json& r = j.at("residual");
        maxflow::ResidualSnapshot snap;
        snap.arc_residuals = unblob<maxflow::Capacity>(r.at("arcs"));
        snap.node_residuals = unblob<maxflow::Capacity>(r.at("nodes"));
        snap.source_caps = unblob<maxflow::Capacity>(r.at("source"));
        snap.sink_caps = unblob<maxflow::Capacity>(r.at("sink"));
        snap.flow = r.at("flow").get<maxflow::Capacity>();
        snap.reparameterization = r.at("reparameterization").get<maxflow::Capacity>();
        snap.generation = r.at("generation").get<std::uint64_t>();

        EditStack stack;
        const int k = in.spec.nodes_per_column;
        for (const auto& rec : j.at("stack").at("records")) {
            EditRecord e;
            e.stroke = decode_stroke(rec.at("stroke"));
            const auto cols = unblob<std::int32_t>(rec.at("columns"));
            e.columns.assign(cols.begin(), cols.end());
            const auto prior = unblob<double>(rec.at("prior"));
            if (!prior.empty() && prior.size() != e.columns.size() * static_cast<std::size_t>(k))
                throw Error("session file: prior costs do not match the affected columns");
            for (std::size_t i = 0; i < prior.size(); i += k)
                e.prior.emplace_back(prior.begin() + static_cast<std::ptrdiff_t>(i),
                                     prior.begin() + static_cast<std::ptrdiff_t>(i + k));
            e.generation = rec.at("generation").get<std::uint64_t>();
            stack.records.push_back(std::move(e));
        }
        stack.cursor = j.at("stack").at("cursor").get<int>();

        const std::string hex = j.at("baseline_digest").get<std::string>();
        std::size_t used = 0;
        const std::uint64_t digest = std::stoull(hex, &used, 16);
        if (used != hex.size()) throw Error("session file: malformed baseline digest");
        return Session(std::move(in), snap, std::move(stack), digest, j.at("generation").get<std::uint64_t>());
    } catch (const json::exception& e) {
        throw Error(std::string("malformed session file: ") + e.what());
    } catch (const std::invalid_argument&) {
        throw Error("session file: malformed baseline digest");
    } catch (const std::out_of_range&) {
        throw Error("session file: malformed baseline digest");
    }
}

void save_session(const Session& s, const std::filesystem::path& path) {
    const auto bytes = encode_session(s);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write session file " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("cannot write session file " + path.string());
}

Session load_session(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open session file " + path.string());
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_session(bytes);
}

}  // namespace jei
