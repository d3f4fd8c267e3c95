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

#include <optional>
#include <random>
#include <vector>

#include "jei/session.hpp"

namespace jei {

/// Single-point stroke on graph surface `graph_surface`, displaced a few nodes
/// off the current surface, whose rewrite touches exactly `columns` columns.
/// Empty when no such stroke turns up within a bounded number of tries.
std::optional<NudgeStroke> column_nudge(const Session& s, int graph_surface, int columns, std::mt19937_64& rng);

struct ColdSolve {
    SurfaceSolution solution;
    std::vector<char> source_side;
    maxflow::Capacity cut = 0;
    double build_ms = 0.0;
    double solve_ms = 0.0;  // max-flow from zero flow plus surface extraction
};

/// Rebuilds the network from the session's current costs and solves it from scratch.
ColdSolve cold_solve(const Session& s);

struct ResolveSample {
    int columns = 0;
    double warm_ms = 0.0;  // whole apply_nudge: match, rewrite, re-solve, re-read
    double cold_ms = 0.0;  // ColdSolve::solve_ms on the same edited costs
    /// Warm and cold source sets and surfaces agree node for node.
    bool same_cut = false;
};

/// Applies `stroke` to `s` and times it against a cold solve of the result.
ResolveSample time_nudge(Session& s, const NudgeStroke& stroke);

double median(std::vector<double> v);

}  // namespace jei
