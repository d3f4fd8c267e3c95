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

#include "jei/longitudinal.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace jei {

using nlohmann::json;

void TimeSeriesManifest::validate() const {
    if (timepoints.size() < 2) throw Error("time series needs at least two time-points");
    for (std::size_t t = 0; t < timepoints.size(); ++t) {
        if (!std::isfinite(timepoints[t].label)) throw Error("time-point label must be finite");
        if (timepoints[t].volume.empty()) throw Error("time-point " + std::to_string(t) + " has no volume path");
        if (t > 0 && !(timepoints[t].label > timepoints[t - 1].label))
            throw Error("time-point labels must be strictly increasing (" + format_label(timepoints[t - 1].label) +
                        " then " + format_label(timepoints[t].label) + ")");
    }
}

std::string format_label(double label) {
    std::ostringstream os;
    os << label;
    return os.str();
}

TimeSeriesManifest decode_manifest(std::string_view text, const std::filesystem::path& base_dir) {
    TimeSeriesManifest m;
    try {
        const json j = json::parse(text);
        for (const auto& e : j.at("timepoints")) {
            TimePointEntry tp;
            tp.label = e.at("label").get<double>();
            tp.volume = e.at("volume").get<std::string>();
            if (tp.volume.is_relative() && !base_dir.empty()) tp.volume = base_dir / tp.volume;
            m.timepoints.push_back(std::move(tp));
        }
    } catch (const json::exception& e) {
        throw Error(std::string("malformed time-series manifest: ") + e.what());
    }
    m.validate();
    return m;
}

std::string encode_manifest(const TimeSeriesManifest& m) {
    json j;
    j["timepoints"] = json::array();
    for (const auto& tp : m.timepoints) j["timepoints"].push_back({{"label", tp.label}, {"volume", tp.volume.string()}});
    return j.dump(2) + "\n";
}

TimeSeriesManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open manifest " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return decode_manifest(ss.str(), path.parent_path());
}

GraphSpec couple_timepoints(const std::vector<GraphSpec>& per_tp, int inter_time_max) {
    if (per_tp.empty()) throw Error("no time-points to couple");
    if (inter_time_max < 0) throw Error("inter-time bound must be >= 0");
    const GraphSpec& first = per_tp.front();
    for (std::size_t t = 1; t < per_tp.size(); ++t) {
        const GraphSpec& g = per_tp[t];
        const std::string pair = "time-points " + std::to_string(t - 1) + " and " + std::to_string(t);
        const GraphSpec& prev = per_tp[t - 1];
        if (g.nodes_per_column != prev.nodes_per_column) throw Error(pair + " differ in nodes per column");
        if (g.surfaces.size() != prev.surfaces.size()) throw Error(pair + " differ in surface count");
        for (std::size_t s = 0; s < g.surfaces.size(); ++s) {
            const SurfaceDef& a = prev.surfaces[s];
            const SurfaceDef& b = g.surfaces[s];
            if (a.object != b.object || a.columns != b.columns || a.adjacency != b.adjacency)
                throw Error(pair + " differ in topology of surface " + std::to_string(s));
        }
    }

    GraphSpec out;
    out.nodes_per_column = first.nodes_per_column;
    out.smoothness = first.smoothness;
    const int per = static_cast<int>(first.surfaces.size());
    for (std::size_t t = 0; t < per_tp.size(); ++t) {
        const GraphSpec& g = per_tp[t];
        const int off = static_cast<int>(t) * per;
        for (SurfaceDef d : g.surfaces) {
            d.timepoint = static_cast<int>(t);
            if (d.smoothness < 0 && g.smoothness != out.smoothness) d.smoothness = g.smoothness;
            out.surfaces.push_back(std::move(d));
        }
        for (InterSurfaceLink l : g.inter_surface) {
            l.lower += off;
            l.upper += off;
            out.inter_surface.push_back(l);
        }
        for (InterObjectLink l : g.inter_object) {
            l.surface_a += off;
            l.surface_b += off;
            out.inter_object.push_back(std::move(l));
        }
        if (!g.inter_time.empty()) throw Error("per-time-point specs must not carry inter-time links");
        if (t + 1 < per_tp.size())
            for (int s = 0; s < per; ++s) out.inter_time.push_back({off + s, off + per + s, inter_time_max});
    }
    out.validate();
    return out;
}

std::vector<Phantom> make_thinning_series(const PhantomSpec& spec, Index3 dims, Vec3 spacing, int count,
                                          double thinning_mm) {
    if (count < 1) throw Error("series needs at least one time-point");
    if (thinning_mm < 0.0) throw Error("thinning must be >= 0");
    std::vector<Phantom> out;
    for (int t = 0; t < count; ++t) {
        PhantomSpec s = spec;
        for (auto& o : s.objects)
            if (o.cap) {
                o.cap->thickness -= thinning_mm * t;
                if (!(o.cap->thickness > 0.0))
                    throw Error("cartilage thinned away at time-point " + std::to_string(t));
            }
        out.push_back(make_phantom(s, dims, spacing));
    }
    return out;
}

}  // namespace jei
