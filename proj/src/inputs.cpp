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

#include "jei/inputs.hpp"

#include <cctype>

#include "jei/longitudinal.hpp"

namespace jei {

namespace {

template <typename F>
auto for_field(const std::string& field, F&& f) {
    try {
        return f();
    } catch (const InputError&) {
        throw;
    } catch (const Error& e) {
        throw InputError(field, e.what());
    }
}

void require_file(const std::string& field, const std::filesystem::path& p) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(p, ec)) throw InputError(field, "no such file '" + p.string() + "'");
}

}  // namespace

SegmentationRequest phantom_request(const PhantomFile& f) {
    SegmentationRequest rq;
    for (int t = 0; t < f.timepoints; ++t) {
        Phantom ph = make_phantom(f.spec_at(t), f.dims, f.spacing);
        if (t == 0)
            for (std::size_t o = 0; o < ph.objects.size(); ++o) {
                rq.meshes.push_back(ph.objects[o].reference_mesh);
                rq.object_names.push_back(f.object_name(static_cast<int>(o)));
            }
        rq.volumes.push_back(std::move(ph.volume));
        rq.labels.push_back(std::to_string(t));
    }
    return rq;
}

SegmentationRequest load_request(const InputSources& src) {
    const int given = !src.volume.empty() + !src.manifest.empty() + !src.phantom.empty();
    if (given != 1) throw InputError("volume", "exactly one of volume, manifest or phantom is required");

    SegmentationRequest rq;
    if (!src.phantom.empty()) {
        require_file("phantom", src.phantom);
        rq = for_field("phantom", [&] { return phantom_request(load_phantom_file(src.phantom)); });
    } else if (!src.manifest.empty()) {
        require_file("manifest", src.manifest);
        const TimeSeriesManifest m = for_field("manifest", [&] { return load_manifest(src.manifest); });
        for (const auto& tp : m.timepoints) {
            require_file("manifest", tp.volume);
            rq.volumes.push_back(for_field("manifest", [&] { return load_volume(tp.volume); }));
            rq.labels.push_back(format_label(tp.label));
        }
    } else {
        require_file("volume", src.volume);
        rq.volumes.push_back(for_field("volume", [&] { return load_volume(src.volume); }));
    }

    if (!src.meshes.empty()) {
        rq.meshes.clear();
        rq.object_names.clear();
        for (std::size_t i = 0; i < src.meshes.size(); ++i) {
            const std::string field = "meshes[" + std::to_string(i) + "]";
            require_file(field, src.meshes[i]);
            rq.meshes.push_back(for_field(field, [&] { return load_mesh(src.meshes[i]); }));
        }
    }
    if (rq.meshes.empty()) throw InputError("meshes", "at least one object mesh is required");
    if (!src.object_names.empty()) {
        if (src.object_names.size() != rq.meshes.size())
            throw InputError("object_names", "expected " + std::to_string(rq.meshes.size()) + " names");
        rq.object_names = src.object_names;
    }
    return rq;
}

ErrorReport phantom_error_report(const Session& s, const SurfaceSolution& sol, const PhantomFile& truth) {
    if (s.timepoint_count() != truth.timepoints)
        throw Error("session has " + std::to_string(s.timepoint_count()) + " time-points, truth has " +
                    std::to_string(truth.timepoints));
    std::vector<std::vector<PhantomObjectTruth>> per_tp;
    for (int t = 0; t < truth.timepoints; ++t) per_tp.push_back(phantom_truth(truth.spec_at(t)));

    ErrorReport r;
    for (std::size_t g = 0; g < s.surfaces().size(); ++g) {
        const SurfaceInfo& info = s.surfaces()[g];
        const auto& objects = per_tp[info.timepoint];
        if (info.object >= static_cast<int>(objects.size()))
            throw Error("surface '" + info.name + "' has no object in the truth phantom");
        const TruthSurface& t = info.kind == SurfaceKind::bone ? objects[info.object].bone : objects[info.object].cartilage;
        std::string name = info.name;
        if (!name.empty()) name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
        if (s.timepoint_count() > 1) name += " @" + s.inputs().timepoint_labels[info.timepoint];
        r.surfaces.push_back(surface_error(s.column_sets()[info.column_set], sol.nodes[g], ImplicitSurface(t), name));
    }
    return r;
}

}  // namespace jei
