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

#include <filesystem>
#include <string>
#include <vector>

#include "jei/graphnet.hpp"
#include "jei/phantom.hpp"
#include "jei/volume.hpp"

namespace jei {

struct TimePointEntry {
    double label = 0.0;  // e.g. months from baseline
    std::filesystem::path volume;
};

/// Time-series manifest: labels strictly increasing, at least two entries.
struct TimeSeriesManifest {
    std::vector<TimePointEntry> timepoints;

    void validate() const;
};

/// JSON: {"timepoints": [{"label": 0, "volume": "tp0.evf"}, ...]}; relative
/// volume paths resolve against the manifest's directory.
TimeSeriesManifest decode_manifest(std::string_view text, const std::filesystem::path& base_dir = {});
std::string encode_manifest(const TimeSeriesManifest& m);
TimeSeriesManifest load_manifest(const std::filesystem::path& path);

std::string format_label(double label);

/// Couples per-time-point specs into one: surfaces are concatenated in
/// time-point order with SurfaceDef::timepoint set, and every surface is
/// linked to its counterpart at the next time-point with |dj| <= max.
/// Throws naming the first pair of time-points whose topology differs.
GraphSpec couple_timepoints(const std::vector<GraphSpec>& per_timepoint, int inter_time_max);

/// Phantom series with the cartilage caps thinned by `thinning_mm` per step.
std::vector<Phantom> make_thinning_series(const PhantomSpec& spec, Index3 dims, Vec3 spacing, int count,
                                          double thinning_mm);

}  // namespace jei
