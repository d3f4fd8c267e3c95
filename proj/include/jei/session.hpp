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
#include <string>
#include <vector>

#include "jei/cost.hpp"
#include "jei/geometry.hpp"
#include "jei/graphnet.hpp"
#include "jei/maxflow.hpp"
#include "jei/volume.hpp"

namespace jei {

/// An edit stack recorded on a different automated baseline.
class BaselineMismatch : public Error {
public:
    using Error::Error;
};

/// A surface of the session graph. `column_set` indexes Session::column_sets().
struct SurfaceInfo {
    std::string name;
    int object = 0;
    int timepoint = 0;
    SurfaceKind kind = SurfaceKind::bone;
    int column_set = 0;
};

/// `surface` counts the surfaces of one time-point in session order.
struct NudgeStroke {
    int surface = 0;
    int timepoint = 0;
    std::vector<Vec3> points;
    double delta_mm = 0.4;
    int n_nearest = 12;

    friend bool operator==(const NudgeStroke&, const NudgeStroke&) = default;
};

struct EditRecord {
    NudgeStroke stroke;
    std::vector<int> columns;
    /// Full K-vectors of the affected columns before the rewrite; empty for
    /// records loaded from a stack file and not yet applied.
    std::vector<std::vector<double>> prior;
    std::uint64_t generation = 0;
};

struct EditStack {
    std::vector<EditRecord> records;
    int cursor = 0;
};

/// Cost rewrite of one stroke, before it is applied.
struct NudgeRewrite {
    int surface = 0;  // graph surface index
    std::vector<int> columns;
    std::vector<std::vector<double>> costs;
};

struct SessionInputs {
    std::vector<Volume> volumes;  // one per time-point
    std::vector<std::string> timepoint_labels;
    std::vector<ColumnSet> column_sets;
    std::vector<SurfaceInfo> surfaces;  // graph surface order
    std::vector<CostTable> costs;       // one per surface
    GraphSpec spec;
    double default_delta_mm = 0.4;
    int default_n_nearest = 12;
};

/// Automated baseline plus everything needed to edit it: the network, its
/// residual state, the current solution and the edit stack.
class Session {
public:
    /// Builds the network from the inputs and solves it.
    explicit Session(SessionInputs inputs);
    /// Restores a persisted session: `inputs.costs` are the current (edited) costs.
    Session(SessionInputs inputs, const maxflow::ResidualSnapshot& snapshot, EditStack stack,
            std::uint64_t baseline_digest, std::uint64_t generation);

    const SessionInputs& inputs() const { return in_; }
    const std::vector<Volume>& volumes() const { return in_.volumes; }
    const std::vector<ColumnSet>& column_sets() const { return in_.column_sets; }
    const std::vector<SurfaceInfo>& surfaces() const { return in_.surfaces; }
    const std::vector<CostTable>& costs() const { return in_.costs; }
    const GraphSpec& spec() const { return net_.spec(); }
    const FlowNetwork& network() const { return net_; }
    const maxflow::ResidualState& residual() const { return state_; }
    maxflow::ResidualState& residual() { return state_; }
    const SurfaceSolution& solution() const { return solution_; }
    const EditStack& stack() const { return stack_; }
    int timepoint_count() const { return static_cast<int>(in_.volumes.size()); }

    std::uint64_t baseline_digest() const { return baseline_digest_; }
    /// Number of mutating calls so far.
    std::uint64_t generation() const { return generation_; }

    /// Graph surface index of the `surface`-th surface of a time-point.
    int graph_surface(int surface, int timepoint) const;
    std::vector<const CostTable*> cost_ptrs() const;

    NudgeRewrite plan_nudge(const NudgeStroke& stroke) const;

    const SurfaceSolution& apply_nudge(const NudgeStroke& stroke);
    const SurfaceSolution& undo();
    const SurfaceSolution& redo();

    std::string save_stack() const;
    /// Resets to the baseline and replays the strokes up to the saved cursor;
    /// later strokes stay redoable. Counts as one mutation.
    const SurfaceSolution& load_stack(std::string_view json);

private:
    void apply_costs(int surface, const std::vector<int>& columns, const std::vector<std::vector<double>>& costs);
    std::vector<std::vector<double>> column_costs(int surface, const std::vector<int>& columns) const;
    void push_edit(const NudgeStroke& stroke);
    void reapply(EditRecord& rec);
    void revert(const EditRecord& rec);
    void build_index();

    SessionInputs in_;
    FlowNetwork net_;
    maxflow::ResidualState state_;
    SurfaceSolution solution_;
    SpatialIndex index_;
    EditStack stack_;
    std::uint64_t baseline_digest_ = 0;
    std::uint64_t generation_ = 0;
};

/// Digest of the automated baseline an edit stack applies to.
std::uint64_t baseline_digest(const SessionInputs& in);

std::string encode_stack(const EditStack& stack, std::uint64_t baseline_digest);

struct StackFile {
    std::uint64_t baseline_digest = 0;
    std::vector<NudgeStroke> strokes;
    int cursor = 0;
};
StackFile decode_stack(std::string_view json);

}  // namespace jei
