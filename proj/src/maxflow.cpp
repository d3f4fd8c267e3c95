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

#include "jei/maxflow.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "jei/types.hpp"

namespace jei::maxflow {

namespace {
constexpr int kInfiniteDistance = std::numeric_limits<int>::max();
}

void Network::validate() const {
    if (node_count < 0) throw Error("negative node count");
    if (source_caps.size() != static_cast<std::size_t>(node_count) || sink_caps.size() != static_cast<std::size_t>(node_count))
        throw Error("terminal capacity arrays do not match the node count");
    for (std::size_t v = 0; v < source_caps.size(); ++v)
        if (source_caps[v] < 0 || sink_caps[v] < 0) throw Error("negative terminal capacity at node " + std::to_string(v));
    for (const auto& a : arcs) {
        if (a.from < 0 || a.to < 0 || a.from >= node_count || a.to >= node_count) throw Error("arc endpoint out of range");
        if (a.from == a.to) throw Error("self-loop arc");
        if (a.capacity < 0 || a.reverse_capacity < 0) throw Error("negative arc capacity");
    }
}

void ResidualState::load_topology(const Network& net) {
    net.validate();
    const int n = net.node_count;
    first_.assign(static_cast<std::size_t>(n) + 1, 0);
    for (const auto& a : net.arcs) {
        ++first_[a.from + 1];
        ++first_[a.to + 1];
    }
    for (int v = 0; v < n; ++v) first_[v + 1] += first_[v];
    const std::size_t halves = net.arcs.size() * 2;
    head_.assign(halves, 0);
    sister_.assign(halves, 0);
    rcap_.assign(halves, 0);
    input_arc_half_.assign(net.arcs.size(), 0);
    std::vector<int> fill(first_.begin(), first_.end() - 1);
    for (std::size_t k = 0; k < net.arcs.size(); ++k) {
        const auto& a = net.arcs[k];
        const int fwd = fill[a.from]++;
        const int rev = fill[a.to]++;
        head_[fwd] = a.to;
        head_[rev] = a.from;
        sister_[fwd] = rev;
        sister_[rev] = fwd;
        rcap_[fwd] = a.capacity;
        rcap_[rev] = a.reverse_capacity;
        input_arc_half_[k] = fwd;
    }

    tr_.assign(n, 0);
    cs_ = net.source_caps;
    ct_ = net.sink_caps;
    parent_.assign(n, kNone);
    next_.assign(n, kNone);
    ts_.assign(n, 0);
    dist_.assign(n, 0);
    is_sink_.assign(n, 0);
    marked_.assign(n, 0);
    in_changed_.assign(n, 0);
    in_dirty_.assign(n, 0);
}

ResidualState::ResidualState(const Network& net) {
    load_topology(net);
    for (int v = 0; v < net.node_count; ++v) {
        flow_ += std::min(cs_[v], ct_[v]);
        tr_[v] = cs_[v] - ct_[v];
    }
}

ResidualState::ResidualState(const Network& net, const ResidualSnapshot& snap) {
    load_topology(net);
    if (snap.arc_residuals.size() != net.arcs.size() * 2 || snap.node_residuals.size() != tr_.size() ||
        snap.source_caps.size() != tr_.size() || snap.sink_caps.size() != tr_.size())
        throw Error("residual snapshot does not match the network");
    for (std::size_t k = 0; k < net.arcs.size(); ++k) {
        const int fwd = input_arc_half_[k];
        rcap_[fwd] = snap.arc_residuals[2 * k];
        rcap_[sister_[fwd]] = snap.arc_residuals[2 * k + 1];
    }
    tr_ = snap.node_residuals;
    cs_ = snap.source_caps;
    ct_ = snap.sink_caps;
    flow_ = snap.flow;
    reparam_ = snap.reparameterization;
    generation_ = snap.generation;
    if (!consistent(net)) throw Error("residual snapshot violates flow conservation");
}

ResidualSnapshot ResidualState::snapshot() const {
    ResidualSnapshot s;
    s.arc_residuals.reserve(input_arc_half_.size() * 2);
    for (int fwd : input_arc_half_) {
        s.arc_residuals.push_back(rcap_[fwd]);
        s.arc_residuals.push_back(rcap_[sister_[fwd]]);
    }
    s.node_residuals = tr_;
    s.source_caps = cs_;
    s.sink_caps = ct_;
    s.flow = flow_;
    s.reparameterization = reparam_;
    s.generation = generation_;
    return s;
}

Capacity ResidualState::arc_residual(std::size_t arc, bool reverse) const {
    const int fwd = input_arc_half_.at(arc);
    return reverse ? rcap_[sister_[fwd]] : rcap_[fwd];
}

std::vector<char> ResidualState::source_set() const {
    std::vector<char> out(tr_.size());
    for (std::size_t v = 0; v < tr_.size(); ++v) out[v] = source_side(static_cast<int>(v)) ? 1 : 0;
    return out;
}

void ResidualState::update_terminal(int node, Capacity source_cap, Capacity sink_cap) {
    if (node < 0 || node >= node_count()) throw Error("update_terminal: node out of range");
    if (source_cap < 0 || sink_cap < 0) throw Error("update_terminal: negative capacity");
    ++generation_;
    const Capacity ds = source_cap - cs_[node];
    const Capacity dt = sink_cap - ct_[node];
    cs_[node] = source_cap;
    ct_[node] = sink_cap;
    if (ds == 0 && dt == 0) return;

    Capacity rs = std::max<Capacity>(tr_[node], 0) + ds;
    Capacity rt = std::max<Capacity>(-tr_[node], 0) + dt;
    const Capacity lift = std::max<Capacity>({0, -rs, -rt});
    rs += lift;
    rt += lift;
    reparam_ += lift;
    flow_ += std::min(rs, rt);
    const Capacity tr = rs - rt;
    if (tr == tr_[node]) return;
    tr_[node] = tr;
    if (!in_dirty_[node]) {
        in_dirty_[node] = 1;
        dirty_.push_back(node);
    }
    if (trees_valid_) mark(node);
}

void ResidualState::set_active(int i) {
    if (next_[i] != kNone) return;
    if (queue_last_[1] != kNone) next_[queue_last_[1]] = i;
    else queue_first_[1] = i;
    queue_last_[1] = i;
    next_[i] = i;
}

int ResidualState::next_active() {
    while (true) {
        int i = queue_first_[0];
        if (i == kNone) {
            queue_first_[0] = i = queue_first_[1];
            queue_last_[0] = queue_last_[1];
            queue_first_[1] = queue_last_[1] = kNone;
            if (i == kNone) return kNone;
        }
        if (next_[i] == i) queue_first_[0] = queue_last_[0] = kNone;
        else queue_first_[0] = next_[i];
        next_[i] = kNone;
        if (parent_[i] != kNone) return i;
    }
}

void ResidualState::mark(int i) {
    if (next_[i] == kNone) {
        if (queue_last_[1] != kNone) next_[queue_last_[1]] = i;
        else queue_first_[1] = i;
        queue_last_[1] = i;
        next_[i] = i;
    }
    marked_[i] = 1;
}

void ResidualState::add_changed(int i) {
    if (in_changed_[i]) return;
    in_changed_[i] = 1;
    changed_.push_back(i);
}

void ResidualState::set_orphan_front(int i) {
    parent_[i] = kOrphan;
    orphans_.push_front(i);
}

void ResidualState::set_orphan_rear(int i) {
    parent_[i] = kOrphan;
    orphans_.push_back(i);
}

void ResidualState::reset_trees() {
    queue_first_[0] = queue_last_[0] = queue_first_[1] = queue_last_[1] = kNone;
    orphans_.clear();
    time_ = 0;
    const int n = node_count();
    for (int i = 0; i < n; ++i) {
        next_[i] = kNone;
        marked_[i] = 0;
        ts_[i] = time_;
        if (tr_[i] > 0) {
            is_sink_[i] = 0;
            parent_[i] = kTerminal;
            set_active(i);
            dist_[i] = 1;
        } else if (tr_[i] < 0) {
            is_sink_[i] = 1;
            parent_[i] = kTerminal;
            set_active(i);
            dist_[i] = 1;
        } else {
            parent_[i] = kNone;
        }
    }
}

void ResidualState::reuse_trees() {
    int queue = queue_first_[1];
    queue_first_[0] = queue_last_[0] = queue_first_[1] = queue_last_[1] = kNone;
    orphans_.clear();
    ++time_;

    while (queue != kNone) {
        const int i = queue;
        queue = next_[i];
        if (queue == i) queue = kNone;
        next_[i] = kNone;
        marked_[i] = 0;
        set_active(i);

        if (tr_[i] == 0) {
            if (parent_[i] != kNone) set_orphan_rear(i);
            continue;
        }
        if (tr_[i] > 0) {
            if (parent_[i] == kNone || is_sink_[i]) {
                is_sink_[i] = 0;
                for (int a = first_[i]; a < first_[i + 1]; ++a) {
                    const int j = head_[a];
                    if (marked_[j]) continue;
                    if (parent_[j] == sister_[a]) set_orphan_rear(j);
                    if (parent_[j] != kNone && is_sink_[j] && rcap_[a] > 0) set_active(j);
                }
                add_changed(i);
            }
        } else {
            if (parent_[i] == kNone || !is_sink_[i]) {
                is_sink_[i] = 1;
                for (int a = first_[i]; a < first_[i + 1]; ++a) {
                    const int j = head_[a];
                    if (marked_[j]) continue;
                    if (parent_[j] == sister_[a]) set_orphan_rear(j);
                    if (parent_[j] != kNone && !is_sink_[j] && rcap_[sister_[a]] > 0) set_active(j);
                }
                add_changed(i);
            }
        }
        parent_[i] = kTerminal;
        ts_[i] = time_;
        dist_[i] = 1;
    }
    adopt_orphans();
}

void ResidualState::augment(int middle) {
    Capacity bottleneck = rcap_[middle];
    int i = head_[sister_[middle]];
    for (;;) {
        const int a = parent_[i];
        if (a == kTerminal) break;
        bottleneck = std::min(bottleneck, rcap_[sister_[a]]);
        i = head_[a];
    }
    bottleneck = std::min(bottleneck, tr_[i]);
    i = head_[middle];
    for (;;) {
        const int a = parent_[i];
        if (a == kTerminal) break;
        bottleneck = std::min(bottleneck, rcap_[a]);
        i = head_[a];
    }
    bottleneck = std::min(bottleneck, -tr_[i]);

    rcap_[sister_[middle]] += bottleneck;
    rcap_[middle] -= bottleneck;
    i = head_[sister_[middle]];
    for (;;) {
        const int a = parent_[i];
        if (a == kTerminal) break;
        rcap_[a] += bottleneck;
        rcap_[sister_[a]] -= bottleneck;
        if (rcap_[sister_[a]] == 0) set_orphan_front(i);
        i = head_[a];
    }
    tr_[i] -= bottleneck;
    if (tr_[i] == 0) set_orphan_front(i);
    i = head_[middle];
    for (;;) {
        const int a = parent_[i];
        if (a == kTerminal) break;
        rcap_[sister_[a]] += bottleneck;
        rcap_[a] -= bottleneck;
        if (rcap_[a] == 0) set_orphan_front(i);
        i = head_[a];
    }
    tr_[i] += bottleneck;
    if (tr_[i] == 0) set_orphan_front(i);
    flow_ += bottleneck;
}

void ResidualState::process_source_orphan(int i) {
    int best = kNone;
    int d_min = kInfiniteDistance;
    for (int a0 = first_[i]; a0 < first_[i + 1]; ++a0) {
        if (rcap_[sister_[a0]] == 0) continue;
        int j = head_[a0];
        if (is_sink_[j] || parent_[j] == kNone) continue;
        int d = 0;
        for (;;) {
            if (ts_[j] == time_) {
                d += dist_[j];
                break;
            }
            const int a = parent_[j];
            ++d;
            if (a == kTerminal) {
                ts_[j] = time_;
                dist_[j] = 1;
                break;
            }
            if (a == kOrphan) {
                d = kInfiniteDistance;
                break;
            }
            j = head_[a];
        }
        if (d < kInfiniteDistance) {
            if (d < d_min) {
                best = a0;
                d_min = d;
            }
            for (j = head_[a0]; ts_[j] != time_; j = head_[parent_[j]]) {
                ts_[j] = time_;
                dist_[j] = d--;
            }
        }
    }
    parent_[i] = best;
    if (best != kNone) {
        ts_[i] = time_;
        dist_[i] = d_min + 1;
        return;
    }
    add_changed(i);
    for (int a0 = first_[i]; a0 < first_[i + 1]; ++a0) {
        const int j = head_[a0];
        const int a = parent_[j];
        if (is_sink_[j] || a == kNone) continue;
        if (rcap_[sister_[a0]] > 0) set_active(j);
        if (a != kTerminal && a != kOrphan && head_[a] == i) set_orphan_rear(j);
    }
}

void ResidualState::process_sink_orphan(int i) {
    int best = kNone;
    int d_min = kInfiniteDistance;
    for (int a0 = first_[i]; a0 < first_[i + 1]; ++a0) {
        if (rcap_[a0] == 0) continue;
        int j = head_[a0];
        if (!is_sink_[j] || parent_[j] == kNone) continue;
        int d = 0;
        for (;;) {
            if (ts_[j] == time_) {
                d += dist_[j];
                break;
            }
            const int a = parent_[j];
            ++d;
            if (a == kTerminal) {
                ts_[j] = time_;
                dist_[j] = 1;
                break;
            }
            if (a == kOrphan) {
                d = kInfiniteDistance;
                break;
            }
            j = head_[a];
        }
        if (d < kInfiniteDistance) {
            if (d < d_min) {
                best = a0;
                d_min = d;
            }
            for (j = head_[a0]; ts_[j] != time_; j = head_[parent_[j]]) {
                ts_[j] = time_;
                dist_[j] = d--;
            }
        }
    }
    parent_[i] = best;
    if (best != kNone) {
        ts_[i] = time_;
        dist_[i] = d_min + 1;
        return;
    }
    add_changed(i);
    for (int a0 = first_[i]; a0 < first_[i + 1]; ++a0) {
        const int j = head_[a0];
        const int a = parent_[j];
        if (!is_sink_[j] || a == kNone) continue;
        if (rcap_[a0] > 0) set_active(j);
        if (a != kTerminal && a != kOrphan && head_[a] == i) set_orphan_rear(j);
    }
}

void ResidualState::adopt_orphans() {
    while (!orphans_.empty()) {
        const int i = orphans_.front();
        orphans_.pop_front();
        if (is_sink_[i]) process_sink_orphan(i);
        else process_source_orphan(i);
    }
}

void ResidualState::run() {
    growth_steps_ = 0;
    int current = kNone;
    for (;;) {
        int i = current;
        if (i != kNone) {
            next_[i] = kNone;
            if (parent_[i] == kNone) i = kNone;
        }
        if (i == kNone) {
            i = next_active();
            if (i == kNone) break;
        }
        ++growth_steps_;

        int middle = kNone;
        if (!is_sink_[i]) {
            for (int a = first_[i]; a < first_[i + 1]; ++a) {
                if (rcap_[a] == 0) continue;
                const int j = head_[a];
                if (parent_[j] == kNone) {
                    is_sink_[j] = 0;
                    parent_[j] = sister_[a];
                    ts_[j] = ts_[i];
                    dist_[j] = dist_[i] + 1;
                    set_active(j);
                    add_changed(j);
                } else if (is_sink_[j]) {
                    middle = a;
                    break;
                } else if (ts_[j] <= ts_[i] && dist_[j] > dist_[i]) {
                    parent_[j] = sister_[a];
                    ts_[j] = ts_[i];
                    dist_[j] = dist_[i] + 1;
                }
            }
        } else {
            for (int a = first_[i]; a < first_[i + 1]; ++a) {
                if (rcap_[sister_[a]] == 0) continue;
                const int j = head_[a];
                if (parent_[j] == kNone) {
                    is_sink_[j] = 1;
                    parent_[j] = sister_[a];
                    ts_[j] = ts_[i];
                    dist_[j] = dist_[i] + 1;
                    set_active(j);
                    add_changed(j);
                } else if (!is_sink_[j]) {
                    middle = sister_[a];
                    break;
                } else if (ts_[j] <= ts_[i] && dist_[j] > dist_[i]) {
                    parent_[j] = sister_[a];
                    ts_[j] = ts_[i];
                    dist_[j] = dist_[i] + 1;
                }
            }
        }

        ++time_;
        if (middle != kNone) {
            next_[i] = i;  // stays the current node
            current = i;
            augment(middle);
            adopt_orphans();
        } else {
            current = kNone;
        }
    }
    trees_valid_ = true;
}

Capacity ResidualState::solve() {
    for (int v : changed_) in_changed_[v] = 0;
    changed_.clear();
    for (int v : dirty_) in_dirty_[v] = 0;
    dirty_.clear();
    reset_trees();
    run();
    // Every node may have moved.
    for (int v = 0; v < node_count(); ++v) add_changed(v);
    return flow_;
}

Capacity ResidualState::re_solve() {
    if (!trees_valid_) return solve();
    for (int v : changed_) in_changed_[v] = 0;
    changed_.clear();
    for (int v : dirty_) in_dirty_[v] = 0;
    dirty_.clear();
    reuse_trees();
    run();
    return flow_;
}

Capacity ResidualState::cut_capacity(const Network& net) const {
    Capacity total = 0;
    for (const auto& a : net.arcs) {
        const bool s_from = source_side(a.from);
        const bool s_to = source_side(a.to);
        if (s_from && !s_to) total += a.capacity;
        if (s_to && !s_from) total += a.reverse_capacity;
    }
    for (int v = 0; v < node_count(); ++v) total += source_side(v) ? ct_[v] : cs_[v];
    return total;
}

bool ResidualState::consistent(const Network& net) const {
    if (net.arcs.size() != input_arc_half_.size() || net.node_count != node_count()) return false;
    for (Capacity r : rcap_)
        if (r < 0) return false;
    std::vector<Capacity> outflow(node_count(), 0);
    for (std::size_t k = 0; k < net.arcs.size(); ++k) {
        const auto& a = net.arcs[k];
        const int fwd = input_arc_half_[k];
        const Capacity f = a.capacity - rcap_[fwd];
        if (rcap_[sister_[fwd]] - a.reverse_capacity != f) return false;
        outflow[a.from] += f;
        outflow[a.to] -= f;
    }
    for (int v = 0; v < node_count(); ++v)
        if (outflow[v] != cs_[v] - ct_[v] - tr_[v]) return false;
    return true;
}

}  // namespace jei::maxflow
