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

#include "jei/bench.hpp"

#include <algorithm>
#include <chrono>

namespace jei {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

std::optional<NudgeStroke> column_nudge(const Session& s, int graph_surface, int columns, std::mt19937_64& rng) {
    const SurfaceInfo& info = s.surfaces().at(graph_surface);
    int local = 0;
    for (int g = 0; g < graph_surface; ++g) local += s.surfaces()[g].timepoint == info.timepoint;
    const ColumnSet& cols = s.column_sets()[info.column_set];
    const int k = cols.nodes_per_column();
    std::uniform_int_distribution<int> pick(0, cols.column_count() - 1);
    std::uniform_int_distribution<int> shift(3, 8);
    std::bernoulli_distribution sign;

    for (int attempt = 0; attempt < 50; ++attempt) {
        const int c = pick(rng);
        const int d = shift(rng) * (sign(rng) ? 1 : -1);
        const int j = std::clamp(s.solution().nodes[graph_surface][c] + d, 0, k - 1);
        NudgeStroke st;
        st.surface = local;
        st.timepoint = info.timepoint;
        st.points = {cols.position(c, j)};
        st.delta_mm = s.inputs().default_delta_mm;
        for (int n = columns; n <= columns * k; ++n) {
            st.n_nearest = n;
            const auto found = static_cast<int>(s.plan_nudge(st).columns.size());
            if (found == columns) return st;
            if (found > columns) break;
        }
    }
    return std::nullopt;
}

ColdSolve cold_solve(const Session& s) {
    ColdSolve out;
    auto t0 = Clock::now();
    const auto ptrs = s.cost_ptrs();
    const FlowNetwork net = build_network(s.spec(), ptrs);
    maxflow::ResidualState st(net.network());
    out.build_ms = ms_since(t0);
    t0 = Clock::now();
    st.solve();
    out.source_side = st.source_set();
    out.solution = extract_surfaces(net, out.source_side, ptrs);
    out.solve_ms = ms_since(t0);
    out.cut = st.cut_capacity(net.network());
    return out;
}

ResolveSample time_nudge(Session& s, const NudgeStroke& stroke) {
    ResolveSample r;
    r.columns = static_cast<int>(s.plan_nudge(stroke).columns.size());
    const auto t0 = Clock::now();
    s.apply_nudge(stroke);
    r.warm_ms = ms_since(t0);
    const ColdSolve cold = cold_solve(s);
    r.cold_ms = cold.solve_ms;
    r.same_cut = cold.solution == s.solution() && cold.source_side == s.residual().source_set();
    return r;
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

}  // namespace jei
