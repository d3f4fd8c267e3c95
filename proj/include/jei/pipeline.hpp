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

#include <functional>
#include <string>
#include <vector>

#include "jei/cost.hpp"
#include "jei/geometry.hpp"
#include "jei/graphnet.hpp"
#include "jei/session.hpp"
#include "jei/volume.hpp"

namespace jei {

/// Graph construction parameters. Defaults follow the published parameter table.
struct SegmentationConfig {
    int nodes_per_column = 61;
    double node_spacing_mm = 0.20;
    int smoothness = 2;
    Bounds inter_surface{0, 20};
    Bounds inter_object{0, 60};
    int inter_time_max = 5;
    double cartilage_weight = 0.5;
    double nudge_delta_mm = 0.40;
    int nudge_n_nearest = 12;
    ColumnMethod column_method = ColumnMethod::elf;
    double inner_fraction = 0.5;
    EdgePolarity bone_polarity = EdgePolarity::dark_to_bright;
    EdgePolarity cartilage_polarity = EdgePolarity::bright_to_dark;
    double contact_mm = 6.0;
    double contact_angle_deg = 45.0;
    bool presegment = true;
    int threads = 1;

    void validate() const;
    ColumnParams column_params() const;
};

SegmentationConfig config_from_json(std::string_view text);
std::string config_to_json(const SegmentationConfig& cfg);
SegmentationConfig load_config(const std::filesystem::path& path);

/// Single-surface bone segmentation on columns built from `s0`; returns the
/// mesh through the selected nodes with the topology of `s0`.
Mesh presegment(const Volume& v, const Mesh& s0, const SegmentationConfig& cfg);

/// Per-time-point volumes plus one initial mesh per object.
struct SegmentationRequest {
    std::vector<Volume> volumes;
    std::vector<std::string> labels;
    std::vector<Mesh> meshes;
    std::vector<std::string> object_names;
};

/// Everything needed to build the automated baseline session. Surfaces are
/// ordered time-point, object, then bone before cartilage; each (time-point,
/// object) has its own column set shared by its two surfaces.
SessionInputs segment_inputs(const SegmentationRequest& req, const SegmentationConfig& cfg);

/// Runs segment_inputs and solves: the automated baseline.
Session segment(const SegmentationRequest& req, const SegmentationConfig& cfg);

/// Signed implicit surface: negative inside, positive outside.
using ImplicitSurface = std::function<double(const Vec3&)>;

struct SurfaceErrorStats {
    std::string name;
    double signed_mean = 0.0;
    double signed_sd = 0.0;
    double unsigned_mean = 0.0;
    double unsigned_sd = 0.0;
    /// Per column, result minus truth arc length in mm; NaN where excluded.
    std::vector<double> signed_mm;
    std::vector<int> excluded;
    int measured = 0;
};

/// Arc length along column c where the polyline first crosses from inside to
/// outside `truth`, found by bisection to 1e-6 mm; negative when it never does.
double truth_arc_length(const ColumnSet& cols, int c, const ImplicitSurface& truth);

/// Along-column error of one surface over the columns in `only`, or all
/// columns when it is empty. Population standard deviations.
SurfaceErrorStats surface_error(const ColumnSet& cols, std::span<const int> nodes, const ImplicitSurface& truth,
                                std::string name = {}, std::span<const int> only = {});

/// Same, against precomputed truth arc lengths (negative = no intersection).
SurfaceErrorStats surface_error(const ColumnSet& cols, std::span<const int> nodes, std::span<const double> truth_arc,
                                std::string name = {}, std::span<const int> only = {});

struct ErrorReport {
    std::vector<SurfaceErrorStats> surfaces;
};

std::string report_to_json(const ErrorReport& r, bool include_columns = false);
/// Aligned plain-text table: surface, signed mean ± sd, unsigned mean ± sd.
std::string format_table(const ErrorReport& r);
/// Two reports side by side, e.g. automated versus edited.
std::string format_comparison(const ErrorReport& before, const ErrorReport& after, const std::string& before_label,
                              const std::string& after_label);

}  // namespace jei
