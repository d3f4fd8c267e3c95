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

#include "jei/phantom.hpp"

#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <numbers>
#include <random>

namespace jei {

double TruthSurface::radius_along(const Vec3& u) const {
    const double qx = u.x / radii.x;
    const double qy = u.y / radii.y;
    const double qz = u.z / radii.z;
    return 1.0 / std::sqrt(qx * qx + qy * qy + qz * qz);
}

double TruthSurface::thickness_along(const Vec3& u) const {
    if (cap_thickness <= 0.0 || cap_half_angle_deg <= 0.0) return 0.0;
    const double cos_rim = std::cos(cap_half_angle_deg * std::numbers::pi / 180.0);
    const double c = dot(u, normalized(cap_axis));
    if (c <= cos_rim) return 0.0;
    // Quadratic taper in cos(angle), C1 at the rim.
    const double s = (c - cos_rim) / (1.0 - cos_rim);
    return cap_thickness * s * s;
}

double TruthSurface::operator()(const Vec3& p) const {
    const Vec3 d = p - center;
    const double r = norm(d);
    if (r == 0.0) return -radius_along({1.0, 0.0, 0.0});
    const Vec3 u = d * (1.0 / r);
    return r - (radius_along(u) + thickness_along(u));
}

bool FluidBlob::contains(const Vec3& p) const {
    const Vec3 e3 = normalized(axis);
    Vec3 e1 = normalized(cross({0.0, 1.0, 0.0}, e3));
    if (norm(e1) == 0.0) e1 = {1.0, 0.0, 0.0};
    const Vec3 e2 = cross(e3, e1);
    const Vec3 d = p - center;
    const double qx = dot(d, e1) / (radius * stretch.x);
    const double qy = dot(d, e2) / (radius * stretch.y);
    const double qz = dot(d, e3) / (radius * stretch.z);
    return qx * qx + qy * qy + qz * qz < 1.0;
}

void validate_phantom_spec(const PhantomSpec& spec) {
    for (float level : {spec.bone_level, spec.cartilage_level, spec.background_level})
        if (!(level >= 0.0f && level <= 1.0f)) throw Error("phantom intensity levels must be in [0, 1]");
    if (spec.noise_amplitude < 0.0) throw Error("phantom noise amplitude must be >= 0");
    if (spec.supersample < 1) throw Error("phantom supersample must be >= 1");
    if (spec.objects.empty()) throw Error("phantom needs at least one object");
    for (const auto& o : spec.objects) {
        if (!(o.radii.x > 0.0 && o.radii.y > 0.0 && o.radii.z > 0.0)) throw Error("phantom radii must be positive");
        if (o.cap) {
            if (!(o.cap->thickness > 0.0)) throw Error("cartilage thickness must be positive");
            if (!(o.cap->half_angle_deg > 0.0 && o.cap->half_angle_deg <= 180.0))
                throw Error("cartilage cap angle must be in (0, 180]");
            if (norm(o.cap->axis) == 0.0) throw Error("cartilage cap axis must be non-zero");
        }
    }
    if (spec.fluid && !(spec.fluid->radius > 0.0 && spec.fluid->stretch.x > 0.0 && spec.fluid->stretch.y > 0.0 &&
                        spec.fluid->stretch.z > 0.0 && norm(spec.fluid->axis) > 0.0))
        throw Error("fluid blob radius and stretch must be positive and its axis non-zero");

    // Ellipsoid overlap: sample each surface densely and test against the other's implicit function.
    for (std::size_t a = 0; a < spec.objects.size(); ++a)
        for (std::size_t b = 0; b < spec.objects.size(); ++b) {
            if (a == b) continue;
            const TruthSurface other{spec.objects[b].center, spec.objects[b].radii};
            if (other(spec.objects[a].center) <= 0.0)
                throw Error("phantom bone ellipsoids overlap (objects " + std::to_string(a) + ", " + std::to_string(b) + ")");
            const Mesh probe = make_ellipsoid_mesh(spec.objects[a].center, spec.objects[a].radii, 4);
            for (const auto& v : probe.vertices())
                if (other(v) <= 0.0)
                    throw Error("phantom bone ellipsoids overlap (objects " + std::to_string(a) + ", " +
                                std::to_string(b) + ")");
        }
}

std::vector<PhantomObjectTruth> phantom_truth(const PhantomSpec& spec) {
    validate_phantom_spec(spec);
    std::vector<PhantomObjectTruth> truth;
    for (const auto& o : spec.objects) {
        TruthSurface bone{o.center, o.radii};
        TruthSurface cart = bone;
        if (o.cap) {
            cart.cap_axis = normalized(o.cap->axis);
            cart.cap_half_angle_deg = o.cap->half_angle_deg;
            cart.cap_thickness = o.cap->thickness;
        }
        truth.push_back({bone, cart, make_ellipsoid_mesh(o.center, o.radii, spec.mesh_level)});
    }
    return truth;
}

Phantom make_phantom(const PhantomSpec& spec, Index3 dims, Vec3 spacing) {
    std::vector<PhantomObjectTruth> truth = phantom_truth(spec);
    for (int a = 0; a < 3; ++a)
        if (dims[a] < 2 || !(spacing[a] > 0.0)) throw Error("phantom grid must have dims >= 2 and positive spacing");
    const Vec3 extent{(dims[0] - 1) * spacing.x, (dims[1] - 1) * spacing.y, (dims[2] - 1) * spacing.z};
    for (std::size_t i = 0; i < spec.objects.size(); ++i) {
        const auto& o = spec.objects[i];
        const double pad = o.cap ? o.cap->thickness : 0.0;
        for (int a = 0; a < 3; ++a)
            if (o.center[a] - o.radii[a] - pad < 0.0 || o.center[a] + o.radii[a] + pad > extent[a])
                throw Error("phantom object " + std::to_string(i) + " exceeds the volume bounds");
    }

    auto level_at = [&](const Vec3& p) -> float {
        for (const auto& t : truth) {
            if (t.bone(p) < 0.0) return spec.bone_level;
            if (t.cartilage(p) < 0.0) return spec.cartilage_level;
        }
        if (spec.fluid && spec.fluid->contains(p)) return spec.cartilage_level;
        return spec.background_level;
    };

    const int ss = spec.supersample;
    std::vector<double> offsets(ss);
    for (int m = 0; m < ss; ++m) offsets[m] = (m + 0.5) / ss - 0.5;

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> noise(-spec.noise_amplitude, spec.noise_amplitude);

    std::vector<float> data(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]);
    std::size_t idx = 0;
    for (int k = 0; k < dims[2]; ++k)
        for (int j = 0; j < dims[1]; ++j)
            for (int i = 0; i < dims[0]; ++i, ++idx) {
                const Vec3 center{i * spacing.x, j * spacing.y, k * spacing.z};
                double acc = 0.0;
                for (double oz : offsets)
                    for (double oy : offsets)
                        for (double ox : offsets)
                            acc += level_at(center + Vec3{ox * spacing.x, oy * spacing.y, oz * spacing.z});
                double value = acc / (ss * ss * ss);
                if (ss == 1) value = level_at(center);
                if (spec.noise_amplitude > 0.0) value += noise(rng);
                data[idx] = static_cast<float>(std::clamp(value, 0.0, 1.0));
            }

    return Phantom{Volume(dims, spacing, {0.0, 0.0, 0.0}, std::move(data)), std::move(truth)};
}

PhantomSpec PhantomFile::spec_at(int timepoint) const {
    if (timepoint < 0 || timepoint >= timepoints) throw Error("unknown time-point " + std::to_string(timepoint));
    PhantomSpec s = spec;
    for (auto& o : s.objects)
        if (o.cap) {
            o.cap->thickness -= thinning_mm * timepoint;
            if (!(o.cap->thickness > 0.0)) throw Error("cartilage thinned away at time-point " + std::to_string(timepoint));
        }
    return s;
}

std::string PhantomFile::object_name(int object) const {
    if (object >= 0 && object < static_cast<int>(object_names.size())) return object_names[object];
    return "object" + std::to_string(object);
}

namespace {

using nlohmann::json;

Vec3 vec3(const json& j) {
    if (!j.is_array() || j.size() != 3) throw Error("phantom file: expected [x, y, z]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json arr(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw Error("phantom file: unknown key '" + key + "' in " + where);
    }
}

}  // namespace

PhantomFile phantom_file_from_json(std::string_view text) {
    PhantomFile f;
    try {
        const json j = json::parse(text);
        if (!j.is_object()) throw Error("phantom file must be a JSON object");
        check_keys(j, {"grid", "objects", "levels", "fluid", "noise_amplitude", "seed", "supersample", "mesh_level",
                       "series"},
                   "phantom file");
        const json& g = j.at("grid");
        const json& dims = g.at("dims");
        if (!dims.is_array() || dims.size() != 3) throw Error("phantom file: grid dims must be [nx, ny, nz]");
        f.dims = {dims[0].get<int>(), dims[1].get<int>(), dims[2].get<int>()};
        f.spacing = vec3(g.at("spacing"));
        for (const auto& o : j.at("objects")) {
            check_keys(o, {"name", "center", "radii", "cap"}, "object");
            PhantomObject obj{vec3(o.at("center")), vec3(o.at("radii")), std::nullopt};
            if (o.contains("cap")) {
                const json& c = o.at("cap");
                check_keys(c, {"axis", "half_angle_deg", "thickness_mm"}, "cap");
                CartilageCap cap;
                if (c.contains("axis")) cap.axis = vec3(c.at("axis"));
                cap.half_angle_deg = c.value("half_angle_deg", cap.half_angle_deg);
                cap.thickness = c.value("thickness_mm", cap.thickness);
                obj.cap = cap;
            }
            f.spec.objects.push_back(obj);
            f.object_names.push_back(o.value("name", "object" + std::to_string(f.object_names.size())));
        }
        if (j.contains("levels")) {
            const json& l = j.at("levels");
            check_keys(l, {"bone", "cartilage", "background"}, "levels");
            f.spec.bone_level = l.value("bone", f.spec.bone_level);
            f.spec.cartilage_level = l.value("cartilage", f.spec.cartilage_level);
            f.spec.background_level = l.value("background", f.spec.background_level);
        }
        if (j.contains("fluid") && !j.at("fluid").is_null()) {
            const json& b = j.at("fluid");
            check_keys(b, {"center", "radius", "stretch", "axis"}, "fluid");
            FluidBlob blob{vec3(b.at("center")), b.value("radius", 1.0)};
            if (b.contains("stretch")) blob.stretch = vec3(b.at("stretch"));
            if (b.contains("axis")) blob.axis = vec3(b.at("axis"));
            f.spec.fluid = blob;
        }
        f.spec.noise_amplitude = j.value("noise_amplitude", 0.0);
        f.spec.seed = j.value("seed", std::uint64_t{1});
        f.spec.supersample = j.value("supersample", f.spec.supersample);
        f.spec.mesh_level = j.value("mesh_level", f.spec.mesh_level);
        if (j.contains("series")) {
            const json& s = j.at("series");
            check_keys(s, {"timepoints", "thinning_mm"}, "series");
            f.timepoints = s.value("timepoints", 1);
            f.thinning_mm = s.value("thinning_mm", 0.0);
        }
    } catch (const json::exception& e) {
        throw Error(std::string("malformed phantom file: ") + e.what());
    }
    if (f.timepoints < 1) throw Error("phantom file: series needs at least one time-point");
    if (f.thinning_mm < 0.0) throw Error("phantom file: thinning must be >= 0");
    for (int t = 0; t < f.timepoints; ++t) validate_phantom_spec(f.spec_at(t));
    return f;
}

std::string phantom_file_to_json(const PhantomFile& f) {
    json j;
    j["grid"] = {{"dims", f.dims}, {"spacing", arr(f.spacing)}};
    j["objects"] = json::array();
    for (std::size_t i = 0; i < f.spec.objects.size(); ++i) {
        const auto& o = f.spec.objects[i];
        json e{{"name", f.object_name(static_cast<int>(i))}, {"center", arr(o.center)}, {"radii", arr(o.radii)}};
        if (o.cap)
            e["cap"] = {{"axis", arr(o.cap->axis)},
                        {"half_angle_deg", o.cap->half_angle_deg},
                        {"thickness_mm", o.cap->thickness}};
        j["objects"].push_back(e);
    }
    j["levels"] = {{"bone", f.spec.bone_level},
                   {"cartilage", f.spec.cartilage_level},
                   {"background", f.spec.background_level}};
    if (f.spec.fluid)
        j["fluid"] = {{"center", arr(f.spec.fluid->center)},
                      {"radius", f.spec.fluid->radius},
                      {"stretch", arr(f.spec.fluid->stretch)},
                      {"axis", arr(f.spec.fluid->axis)}};
    j["noise_amplitude"] = f.spec.noise_amplitude;
    j["seed"] = f.spec.seed;
    j["supersample"] = f.spec.supersample;
    j["mesh_level"] = f.spec.mesh_level;
    j["series"] = {{"timepoints", f.timepoints}, {"thinning_mm", f.thinning_mm}};
    return j.dump(2) + "\n";
}

PhantomFile load_phantom_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open phantom file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return phantom_file_from_json(ss.str());
}

}  // namespace jei
