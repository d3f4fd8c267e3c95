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

#include "jei/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "jei/longitudinal.hpp"
#include "json.hpp"

namespace jei {

using nlohmann::json;

void SegmentationConfig::validate() const {
    if (nodes_per_column < 2) throw Error("config: nodes_per_column must be >= 2");
    if (!(node_spacing_mm > 0.0)) throw Error("config: node_spacing_mm must be positive");
    if (smoothness < 0) throw Error("config: smoothness must be >= 0");
    for (const auto& [name, b] : {std::pair{"inter_surface", inter_surface}, std::pair{"inter_object", inter_object}})
        if (b.min < 0 || b.max < b.min) throw Error(std::string("config: ") + name + " needs 0 <= min <= max");
    if (inter_time_max < 0) throw Error("config: inter_time_max must be >= 0");
    if (!(cartilage_weight >= 0.0 && cartilage_weight <= 1.0)) throw Error("config: cartilage_weight must be in [0, 1]");
    if (!(nudge_delta_mm > 0.0)) throw Error("config: nudge_delta_mm must be positive");
    if (nudge_n_nearest < 1) throw Error("config: nudge_n_nearest must be >= 1");
    if (!(inner_fraction >= 0.0 && inner_fraction < 1.0)) throw Error("config: inner_fraction must be in [0, 1)");
    if (!(contact_mm >= 0.0)) throw Error("config: contact_mm must be >= 0");
    if (!(contact_angle_deg >= 0.0 && contact_angle_deg <= 90.0)) throw Error("config: contact_angle_deg must be in [0, 90]");
    if (threads < 1) throw Error("config: threads must be >= 1");
}

ColumnParams SegmentationConfig::column_params() const {
    ColumnParams p;
    p.nodes = nodes_per_column;
    p.spacing = node_spacing_mm;
    p.inner_fraction = inner_fraction;
    p.method = column_method;
    p.threads = threads;
    return p;
}

namespace {

json bounds_json(const Bounds& b) { return json::array({b.min, b.max}); }

Bounds bounds_from(const json& j) {
    if (!j.is_array() || j.size() != 2) throw Error("config: bounds must be [min, max]");
    return {j[0].get<int>(), j[1].get<int>()};
}

}  // namespace

SegmentationConfig config_from_json(std::string_view text) {
    SegmentationConfig c;
    try {
        const json j = json::parse(text);
        if (!j.is_object()) throw Error("config must be a JSON object");
        for (const auto& [key, v] : j.items()) {
            if (key == "nodes_per_column") c.nodes_per_column = v.get<int>();
            else if (key == "node_spacing_mm") c.node_spacing_mm = v.get<double>();
            else if (key == "smoothness") c.smoothness = v.get<int>();
            else if (key == "inter_surface") c.inter_surface = bounds_from(v);
            else if (key == "inter_object") c.inter_object = bounds_from(v);
            else if (key == "inter_time_max") c.inter_time_max = v.get<int>();
            else if (key == "cartilage_weight") c.cartilage_weight = v.get<double>();
            else if (key == "nudge_delta_mm") c.nudge_delta_mm = v.get<double>();
            else if (key == "nudge_n_nearest") c.nudge_n_nearest = v.get<int>();
            else if (key == "column_method") c.column_method = column_method_from_string(v.get<std::string>());
            else if (key == "inner_fraction") c.inner_fraction = v.get<double>();
            else if (key == "bone_polarity") c.bone_polarity = polarity_from_string(v.get<std::string>());
            else if (key == "cartilage_polarity") c.cartilage_polarity = polarity_from_string(v.get<std::string>());
            else if (key == "contact_mm") c.contact_mm = v.get<double>();
            else if (key == "contact_angle_deg") c.contact_angle_deg = v.get<double>();
            else if (key == "presegment") c.presegment = v.get<bool>();
            else if (key == "threads") c.threads = v.get<int>();
            else throw Error("config: unknown key '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw Error(std::string("malformed config: ") + e.what());
    }
    c.validate();
    return c;
}

std::string config_to_json(const SegmentationConfig& c) {
    json j;
    j["nodes_per_column"] = c.nodes_per_column;
    j["node_spacing_mm"] = c.node_spacing_mm;
    j["smoothness"] = c.smoothness;
    j["inter_surface"] = bounds_json(c.inter_surface);
    j["inter_object"] = bounds_json(c.inter_object);
    j["inter_time_max"] = c.inter_time_max;
    j["cartilage_weight"] = c.cartilage_weight;
    j["nudge_delta_mm"] = c.nudge_delta_mm;
    j["nudge_n_nearest"] = c.nudge_n_nearest;
    j["column_method"] = std::string(to_string(c.column_method));
    j["inner_fraction"] = c.inner_fraction;
    j["bone_polarity"] = std::string(to_string(c.bone_polarity));
    j["cartilage_polarity"] = std::string(to_string(c.cartilage_polarity));
    j["contact_mm"] = c.contact_mm;
    j["contact_angle_deg"] = c.contact_angle_deg;
    j["presegment"] = c.presegment;
    j["threads"] = c.threads;
    return j.dump(2) + "\n";
}

SegmentationConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str());
}

Mesh presegment(const Volume& v, const Mesh& s0, const SegmentationConfig& cfg) {
    cfg.validate();
    const ColumnSet cols = build_columns(s0, cfg.column_params());
    const CostTable costs = bone_costs(v, cols, cfg.bone_polarity);
    GraphSpec g;
    g.nodes_per_column = cfg.nodes_per_column;
    g.smoothness = cfg.smoothness;
    g.surfaces.push_back({0, 0, cols.column_count(), cols.adjacency()});
    const std::vector<const CostTable*> ptrs{&costs};
    const FlowNetwork net = build_network(g, ptrs);
    maxflow::ResidualState st(net.network());
    st.solve();
    const SurfaceSolution sol = extract_surfaces(net, st.source_set(), ptrs);
    return cols.surface_mesh(sol.nodes[0]);
}

SessionInputs segment_inputs(const SegmentationRequest& req, const SegmentationConfig& cfg) {
    cfg.validate();
    if (req.volumes.empty()) throw Error("segmentation needs at least one volume");
    if (req.meshes.empty()) throw Error("segmentation needs at least one object mesh");
    if (!req.labels.empty() && req.labels.size() != req.volumes.size())
        throw Error("one label per time-point required");
    if (!req.object_names.empty() && req.object_names.size() != req.meshes.size())
        throw Error("one name per object required");
    const int times = static_cast<int>(req.volumes.size());
    const int objects = static_cast<int>(req.meshes.size());

    SessionInputs in;
    in.volumes = req.volumes;
    in.timepoint_labels = req.labels;
    if (in.timepoint_labels.empty())
        for (int t = 0; t < times; ++t) in.timepoint_labels.push_back(std::to_string(t));
    in.default_delta_mm = cfg.nudge_delta_mm;
    in.default_n_nearest = cfg.nudge_n_nearest;

    std::vector<GraphSpec> per_tp;
    for (int t = 0; t < times; ++t) {
        GraphSpec g;
        g.nodes_per_column = cfg.nodes_per_column;
        g.smoothness = cfg.smoothness;
        const int first_set = static_cast<int>(in.column_sets.size());
        for (int o = 0; o < objects; ++o) {
            const Mesh s = cfg.presegment ? presegment(req.volumes[t], req.meshes[o], cfg) : req.meshes[o];
            ColumnSet cols = build_columns(s, cfg.column_params());
            const std::string name = req.object_names.empty() ? "object" + std::to_string(o) : req.object_names[o];
            const int set = static_cast<int>(in.column_sets.size());
            const int bone = static_cast<int>(g.surfaces.size());
            in.surfaces.push_back({name + " bone", o, t, SurfaceKind::bone, set});
            in.surfaces.push_back({name + " cartilage", o, t, SurfaceKind::cartilage, set});
            in.costs.push_back(bone_costs(req.volumes[t], cols, cfg.bone_polarity));
            in.costs.push_back(cartilage_costs(req.volumes[t], cols, cfg.cartilage_weight, cfg.cartilage_polarity));
            g.surfaces.push_back({o, 0, cols.column_count(), cols.adjacency()});
            g.surfaces.push_back({o, 0, cols.column_count(), cols.adjacency()});
            g.inter_surface.push_back({bone, bone + 1, cfg.inter_surface});
            in.column_sets.push_back(std::move(cols));
        }
        for (int a = 0; a < objects; ++a)
            for (int b = a + 1; b < objects; ++b) {
                const ColumnSet& ca = in.column_sets[first_set + a];
                const ColumnSet& cb = in.column_sets[first_set + b];
                const auto pairs = pair_objects(ca, cb, cfg.contact_mm, cfg.contact_angle_deg);
                if (!pairs.empty())
                    g.inter_object.push_back(make_inter_object_link(2 * a + 1, 2 * b + 1, ca, cb, pairs, cfg.inter_object));
            }
        per_tp.push_back(std::move(g));
    }
    in.spec = times == 1 ? per_tp.front() : couple_timepoints(per_tp, cfg.inter_time_max);
    return in;
}

Session segment(const SegmentationRequest& req, const SegmentationConfig& cfg) {
    return Session(segment_inputs(req, cfg));
}

double truth_arc_length(const ColumnSet& cols, int c, const ImplicitSurface& truth) {
    const int k = cols.nodes_per_column();
    double f0 = truth(cols.position(c, 0));
    for (int j = 0; j + 1 < k; ++j) {
        const Vec3 a = cols.position(c, j);
        const Vec3 b = cols.position(c, j + 1);
        const double f1 = truth(b);
        if (f0 < 0.0 && f1 >= 0.0) {
            const double len = distance(a, b);
            if (f1 == 0.0) return cols.arc_length(c, j + 1);
            double lo = 0.0, hi = 1.0, flo = f0, fhi = f1;
            while ((hi - lo) * len > 1e-6) {
                const double mid = 0.5 * (lo + hi);
                const double fm = truth(a + (b - a) * mid);
                if (fm < 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                    fhi = fm;
                }
            }
            // Secant step inside the final bracket; exact for fields linear along the segment.
            return cols.arc_length(c, j) + (lo + (hi - lo) * flo / (flo - fhi)) * len;
        }
        f0 = f1;
    }
    return -1.0;
}

SurfaceErrorStats surface_error(const ColumnSet& cols, std::span<const int> nodes, const ImplicitSurface& truth,
                                std::string name, std::span<const int> only) {
    std::vector<double> arc(cols.column_count(), -1.0);
    if (only.empty())
        for (int c = 0; c < cols.column_count(); ++c) arc[c] = truth_arc_length(cols, c, truth);
    else
        for (int c : only) arc[c] = truth_arc_length(cols, c, truth);
    return surface_error(cols, nodes, arc, std::move(name), only);
}

SurfaceErrorStats surface_error(const ColumnSet& cols, std::span<const int> nodes, std::span<const double> truth_arc,
                                std::string name, std::span<const int> only) {
    const int n = cols.column_count();
    if (static_cast<int>(nodes.size()) != n || static_cast<int>(truth_arc.size()) != n)
        throw Error("surface error inputs do not match the column count");
    SurfaceErrorStats r;
    r.name = std::move(name);
    r.signed_mm.assign(n, std::numeric_limits<double>::quiet_NaN());
    std::vector<int> all;
    if (only.empty()) {
        for (int c = 0; c < n; ++c) all.push_back(c);
        only = all;
    }
    std::vector<double> vals;
    for (int c : only) {
        if (c < 0 || c >= n) throw Error("surface error column out of range");
        if (truth_arc[c] < 0.0) {
            r.excluded.push_back(c);
            continue;
        }
        const double d = cols.arc_length(c, nodes[c]) - truth_arc[c];
        r.signed_mm[c] = d;
        vals.push_back(d);
    }
    r.measured = static_cast<int>(vals.size());
    if (vals.empty()) return r;
    const double m = static_cast<double>(vals.size());
    double s = 0.0, u = 0.0;
    for (double d : vals) {
        s += d;
        u += std::abs(d);
    }
    r.signed_mean = s / m;
    r.unsigned_mean = u / m;
    double vs = 0.0, vu = 0.0;
    for (double d : vals) {
        vs += (d - r.signed_mean) * (d - r.signed_mean);
        vu += (std::abs(d) - r.unsigned_mean) * (std::abs(d) - r.unsigned_mean);
    }
    r.signed_sd = std::sqrt(vs / m);
    r.unsigned_sd = std::sqrt(vu / m);
    return r;
}

std::string report_to_json(const ErrorReport& r, bool include_columns) {
    json j;
    j["surfaces"] = json::array();
    for (const auto& s : r.surfaces) {
        json e = {{"name", s.name},
                  {"signed", {{"mean", s.signed_mean}, {"sd", s.signed_sd}}},
                  {"unsigned", {{"mean", s.unsigned_mean}, {"sd", s.unsigned_sd}}},
                  {"measured", s.measured},
                  {"excluded", s.excluded}};
        if (include_columns) {
            json cols = json::array();
            for (double d : s.signed_mm) cols.push_back(std::isnan(d) ? json(nullptr) : json(d));
            e["signed_mm"] = cols;
        }
        j["surfaces"].push_back(std::move(e));
    }
    return j.dump(2) + "\n";
}

namespace {

std::string mean_sd(double mean, double sd) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << (std::abs(mean) < 0.005 ? 0.0 : mean) << " ± " << sd;
    return os.str();
}

std::size_t display_width(const std::string& s) {
    std::size_t w = 0;
    for (unsigned char ch : s) w += (ch & 0xC0) != 0x80;
    return w;
}

std::string render(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width;
    for (const auto& row : rows)
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (width.size() <= i) width.push_back(0);
            width[i] = std::max(width[i], display_width(row[i]));
        }
    std::string out;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::string line;
        for (std::size_t i = 0; i < rows[r].size(); ++i) {
            const std::string& cell = rows[r][i];
            const std::string pad(width[i] - display_width(cell), ' ');
            if (i > 0) line += "  ";
            line += i == 0 ? cell + pad : pad + cell;
        }
        out += line + "\n";
        if (r == 0) {
            std::size_t total = 0;
            for (std::size_t w : width) total += w;
            out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
        }
    }
    return out;
}

}  // namespace

std::string format_table(const ErrorReport& r) {
    std::vector<std::vector<std::string>> rows{{"Surface", "Signed (mm)", "Unsigned (mm)"}};
    for (const auto& s : r.surfaces)
        rows.push_back({s.name, mean_sd(s.signed_mean, s.signed_sd), mean_sd(s.unsigned_mean, s.unsigned_sd)});
    return render(rows);
}

std::string format_comparison(const ErrorReport& before, const ErrorReport& after, const std::string& before_label,
                              const std::string& after_label) {
    if (before.surfaces.size() != after.surfaces.size()) throw Error("reports cover different surfaces");
    std::vector<std::vector<std::string>> rows{{"Surface", after_label, before_label}};
    for (std::size_t i = 0; i < before.surfaces.size(); ++i) {
        const auto& a = after.surfaces[i];
        const auto& b = before.surfaces[i];
        rows.push_back({a.name + " Signed", mean_sd(a.signed_mean, a.signed_sd), mean_sd(b.signed_mean, b.signed_sd)});
        rows.push_back(
            {a.name + " Unsigned", mean_sd(a.unsigned_mean, a.unsigned_sd), mean_sd(b.unsigned_mean, b.unsigned_sd)});
    }
    return render(rows);
}

}  // namespace jei
