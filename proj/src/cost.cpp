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

#include "jei/cost.hpp"

#include <algorithm>

namespace jei {

std::string_view to_string(SurfaceKind k) { return k == SurfaceKind::bone ? "bone" : "cartilage"; }

std::string_view to_string(EdgePolarity p) {
    return p == EdgePolarity::dark_to_bright ? "dark_to_bright" : "bright_to_dark";
}

EdgePolarity polarity_from_string(std::string_view s) {
    if (s == "dark_to_bright") return EdgePolarity::dark_to_bright;
    if (s == "bright_to_dark") return EdgePolarity::bright_to_dark;
    throw Error("unknown edge polarity '" + std::string(s) + "' (expected dark_to_bright or bright_to_dark)");
}

CostTable::CostTable(SurfaceKind kind, double weight, int columns, int nodes_per_column, std::vector<double> values)
    : kind_(kind), weight_(weight), columns_(columns), k_(nodes_per_column), values_(std::move(values)) {
    if (!(weight_ >= 0.0 && weight_ <= 1.0)) throw Error("cost weight must be in [0, 1]");
    if (columns_ < 0 || k_ < 1 || values_.size() != static_cast<std::size_t>(columns_) * k_)
        throw Error("cost table dimensions do not match its values");
    for (double c : values_)
        if (!(c >= 0.0 && c <= 1.0)) throw Error("cost outside [0, 1]");
}

void CostTable::set_column(int c, std::span<const double> costs) {
    if (c < 0 || c >= columns_) throw Error("cost column out of range");
    if (static_cast<int>(costs.size()) != k_) throw Error("cost column length mismatch");
    for (double x : costs)
        if (!(x >= 0.0 && x <= 1.0)) throw Error("cost outside [0, 1]");
    std::copy(costs.begin(), costs.end(), values_.begin() + static_cast<std::ptrdiff_t>(c) * k_);
}

std::uint64_t CostTable::digest() const {
    Fnv1a h;
    h.value(static_cast<int>(kind_));
    h.value(weight_);
    h.value(columns_);
    h.value(k_);
    h.values(std::span<const double>(values_));
    return h.digest();
}

namespace {

double polarity_sign(EdgePolarity p) { return p == EdgePolarity::dark_to_bright ? 1.0 : -1.0; }

template <typename Fn>
std::vector<double> column_scores(const ColumnSet& cols, Fn&& score) {
    const int k = cols.nodes_per_column();
    std::vector<double> out(static_cast<std::size_t>(cols.column_count()) * k);
    for (int c = 0; c < cols.column_count(); ++c)
        for (int j = 0; j < k; ++j) {
            const Vec3 d = cols.direction(c, j);
            if (d == Vec3{}) throw Error("degenerate direction on column " + std::to_string(c));
            out[static_cast<std::size_t>(c) * k + j] = score(cols.position(c, j), d);
        }
    return out;
}

}  // namespace

std::vector<double> first_derivative_scores(const Volume& v, const ColumnSet& cols, EdgePolarity polarity) {
    const double sign = polarity_sign(polarity);
    return column_scores(cols, [&](const Vec3& p, const Vec3& d) { return sign * deriv1(v, p, d).value; });
}

std::vector<double> second_derivative_scores(const Volume& v, const ColumnSet& cols, EdgePolarity polarity) {
    // The node just past the edge (outward) sits where the profile curves back toward the
    // far-side level, i.e. negative curvature for a rising edge.
    const double sign = -polarity_sign(polarity);
    return column_scores(cols, [&](const Vec3& p, const Vec3& d) { return sign * deriv2(v, p, d).value; });
}

constexpr double kFlatScoreSpread = 1e-9;

std::vector<double> normalize_scores(std::span<const double> scores) {
    std::vector<double> out(scores.size(), 1.0);
    if (scores.empty()) return out;
    double lo = std::max(scores[0], 0.0);
    double hi = lo;
    for (double s : scores) {
        lo = std::min(lo, std::max(s, 0.0));
        hi = std::max(hi, std::max(s, 0.0));
    }
    // Intensities live in [0, 1]; a spread this small is interpolation rounding, not an edge.
    if (!(hi - lo > kFlatScoreSpread)) return out;
    for (std::size_t i = 0; i < scores.size(); ++i)
        out[i] = std::clamp(1.0 - (std::max(scores[i], 0.0) - lo) / (hi - lo), 0.0, 1.0);
    return out;
}

CostTable bone_costs(const Volume& v, const ColumnSet& cols, EdgePolarity polarity) {
    return CostTable(SurfaceKind::bone, 1.0, cols.column_count(), cols.nodes_per_column(),
                     normalize_scores(first_derivative_scores(v, cols, polarity)));
}

std::vector<double> cartilage_scores(const Volume& v, const ColumnSet& cols, double w, EdgePolarity polarity) {
    if (!(w >= 0.0 && w <= 1.0)) throw Error("cartilage weight must be in [0, 1]");
    const auto first = first_derivative_scores(v, cols, polarity);
    const auto second = second_derivative_scores(v, cols, polarity);
    std::vector<double> raw(first.size());
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = w * first[i] + (1.0 - w) * second[i];
    return raw;
}

CostTable cartilage_costs(const Volume& v, const ColumnSet& cols, double w, EdgePolarity polarity) {
    return CostTable(SurfaceKind::cartilage, w, cols.column_count(), cols.nodes_per_column(),
                     normalize_scores(cartilage_scores(v, cols, w, polarity)));
}

}  // namespace jei
