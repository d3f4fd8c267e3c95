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

#include <cstdint>
#include <span>
#include <vector>

#include "jei/geometry.hpp"
#include "jei/volume.hpp"

namespace jei {

enum class SurfaceKind { bone, cartilage };

std::string_view to_string(SurfaceKind k);

/// Expected intensity change when crossing the surface outward.
enum class EdgePolarity { dark_to_bright, bright_to_dark };

std::string_view to_string(EdgePolarity p);
EdgePolarity polarity_from_string(std::string_view s);

/// Node costs (unlikeliness, low = likely) for one surface on one column set.
class CostTable {
public:
    CostTable() = default;
    CostTable(SurfaceKind kind, double weight, int columns, int nodes_per_column, std::vector<double> values);

    SurfaceKind kind() const { return kind_; }
    /// Cartilage first/second derivative weight; 1 for bone tables.
    double weight() const { return weight_; }
    int column_count() const { return columns_; }
    int nodes_per_column() const { return k_; }

    double at(int column, int node) const { return values_[static_cast<std::size_t>(column) * k_ + node]; }
    std::span<const double> column(int c) const {
        return std::span<const double>(values_).subspan(static_cast<std::size_t>(c) * k_, k_);
    }
    /// Overwrites a full column; every value must be finite and in [0, 1].
    void set_column(int c, std::span<const double> costs);

    std::span<const double> values() const { return values_; }
    std::uint64_t digest() const;

    friend bool operator==(const CostTable&, const CostTable&) = default;

private:
    SurfaceKind kind_ = SurfaceKind::bone;
    double weight_ = 1.0;
    int columns_ = 0;
    int k_ = 0;
    std::vector<double> values_;
};

/// Signed raw edge scores before normalization, one per node (columns x K).
/// Positive means the node looks like the surface under the given polarity.
std::vector<double> first_derivative_scores(const Volume& v, const ColumnSet& cols, EdgePolarity polarity);
std::vector<double> second_derivative_scores(const Volume& v, const ColumnSet& cols, EdgePolarity polarity);

/// cost = 1 - minmax(max(score, 0)) over the whole surface; all 1 when the clipped scores are flat.
std::vector<double> normalize_scores(std::span<const double> scores);

CostTable bone_costs(const Volume& v, const ColumnSet& cols, EdgePolarity polarity = EdgePolarity::dark_to_bright);

std::vector<double> cartilage_scores(const Volume& v, const ColumnSet& cols, double w,
                                     EdgePolarity polarity = EdgePolarity::bright_to_dark);

/// Score w * d1 + (1 - w) * d2 with both terms oriented by the polarity.
CostTable cartilage_costs(const Volume& v, const ColumnSet& cols, double w,
                          EdgePolarity polarity = EdgePolarity::bright_to_dark);

}  // namespace jei
