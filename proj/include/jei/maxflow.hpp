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
#include <deque>
#include <span>
#include <vector>

namespace jei::maxflow {

/// Fixed-point capacity type shared with graph construction.
using Capacity = std::int64_t;

struct ArcSpec {
    int from = 0;
    int to = 0;
    Capacity capacity = 0;
    Capacity reverse_capacity = 0;
};

/// An s-t network. Source and sink are implicit; every node carries a
/// source->node and a node->sink capacity.
struct Network {
    int node_count = 0;
    std::vector<ArcSpec> arcs;
    std::vector<Capacity> source_caps;
    std::vector<Capacity> sink_caps;

    void validate() const;
};

/// Persisted arrays of a residual state; the search trees are rebuilt on restore.
struct ResidualSnapshot {
    std::vector<Capacity> arc_residuals;  // two entries per ArcSpec: forward, reverse
    std::vector<Capacity> node_residuals;
    std::vector<Capacity> source_caps;
    std::vector<Capacity> sink_caps;
    Capacity flow = 0;
    Capacity reparameterization = 0;
    std::uint64_t generation = 0;
};

/// Residual graph of an s-t max-flow problem plus the search trees of the
/// augmenting-path solver, kept alive between solves so that terminal
/// capacity edits re-optimize incrementally.
///
/// The reported cut is always the set of nodes reachable from the source in
/// the residual graph, which is the same for every maximum flow; warm and
/// cold solves therefore agree node for node.
class ResidualState {
public:
    explicit ResidualState(const Network& net);
    ResidualState(const Network& net, const ResidualSnapshot& snapshot);

    /// Discards the search trees and runs to optimality from the current flow.
    Capacity solve();

    /// Continues from the trees of the previous solve, repairing them only
    /// around nodes touched by update_terminal().
    Capacity re_solve();

    /// Sets the terminal capacities of a node. Decreases below the committed
    /// flow are absorbed by adding the same constant to both terminal arcs.
    void update_terminal(int node, Capacity source_cap, Capacity sink_cap);

    int node_count() const { return static_cast<int>(tr_.size()); }
    bool source_side(int node) const { return parent_[node] != kNone && !is_sink_[node]; }
    std::vector<char> source_set() const;

    /// Nodes whose side may have changed during the last solve()/re_solve().
    std::span<const int> changed_nodes() const { return changed_; }
    /// Nodes edited since the last solve()/re_solve().
    std::span<const int> dirty_nodes() const { return dirty_; }

    /// Total flow pushed, counting the constants added by reparameterization.
    Capacity flow_value() const { return flow_; }
    Capacity reparameterization() const { return reparam_; }
    std::uint64_t generation() const { return generation_; }

    Capacity source_cap(int node) const { return cs_[node]; }
    Capacity sink_cap(int node) const { return ct_[node]; }
    /// Net terminal residual: > 0 residual from the source, < 0 residual to the sink.
    Capacity terminal_residual(int node) const { return tr_[node]; }
    /// Residual capacity of the forward (reverse = false) or backward half of input arc `arc`.
    Capacity arc_residual(std::size_t arc, bool reverse = false) const;

    /// Capacity of the current cut, arc capacities from `net` and the current
    /// terminal capacities of this state.
    Capacity cut_capacity(const Network& net) const;
    /// True when every residual is >= 0 and flow is conserved at every node.
    bool consistent(const Network& net) const;

    /// Work counters of the last solve, for benchmarking.
    std::uint64_t last_growth_steps() const { return growth_steps_; }

    ResidualSnapshot snapshot() const;

private:
    static constexpr int kNone = -1;
    static constexpr int kTerminal = -2;
    static constexpr int kOrphan = -3;

    void run();
    void reset_trees();
    void reuse_trees();
    void set_active(int i);
    int next_active();
    void mark(int i);
    void add_changed(int i);
    void set_orphan_front(int i);
    void set_orphan_rear(int i);
    void augment(int middle);
    void process_source_orphan(int i);
    void process_sink_orphan(int i);
    void adopt_orphans();
    void load_topology(const Network& net);

    // Half-arcs in CSR order by tail node.
    std::vector<int> first_;   // node -> first half-arc, size n + 1
    std::vector<int> head_;
    std::vector<int> sister_;
    std::vector<Capacity> rcap_;
    std::vector<int> input_arc_half_;  // ArcSpec index -> forward half-arc

    std::vector<Capacity> tr_;
    std::vector<Capacity> cs_;
    std::vector<Capacity> ct_;

    std::vector<int> parent_;
    std::vector<int> next_;
    std::vector<std::int64_t> ts_;
    std::vector<int> dist_;
    std::vector<char> is_sink_;
    std::vector<char> marked_;
    std::vector<char> in_changed_;
    std::vector<char> in_dirty_;

    int queue_first_[2] = {kNone, kNone};
    int queue_last_[2] = {kNone, kNone};
    std::deque<int> orphans_;

    std::vector<int> changed_;
    std::vector<int> dirty_;

    std::int64_t time_ = 0;
    Capacity flow_ = 0;
    Capacity reparam_ = 0;
    std::uint64_t generation_ = 0;
    std::uint64_t growth_steps_ = 0;
    bool trees_valid_ = false;
};

}  // namespace jei::maxflow
