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

// Plain Edmonds-Karp on a dense capacity matrix. Test-only oracle for the
// search-tree solver; it shares no code with it.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

#include "jei/maxflow.hpp"

namespace jei::testing {

struct ReferenceCut {
    std::int64_t flow = 0;
    std::vector<char> source_side;  // per network node, excluding terminals
};

inline ReferenceCut reference_maxflow(const maxflow::Network& net) {
    const int n = net.node_count + 2;
    const int s = net.node_count;
    const int t = net.node_count + 1;
    std::vector<std::vector<std::int64_t>> cap(n, std::vector<std::int64_t>(n, 0));
    for (const auto& a : net.arcs) {
        cap[a.from][a.to] += a.capacity;
        cap[a.to][a.from] += a.reverse_capacity;
    }
    for (int v = 0; v < net.node_count; ++v) {
        cap[s][v] += net.source_caps[v];
        cap[v][t] += net.sink_caps[v];
    }

    ReferenceCut out;
    std::vector<int> prev(n);
    for (;;) {
        std::fill(prev.begin(), prev.end(), -1);
        prev[s] = s;
        std::queue<int> q;
        q.push(s);
        while (!q.empty() && prev[t] < 0) {
            const int u = q.front();
            q.pop();
            for (int v = 0; v < n; ++v)
                if (prev[v] < 0 && cap[u][v] > 0) {
                    prev[v] = u;
                    q.push(v);
                }
        }
        if (prev[t] < 0) break;
        std::int64_t b = std::numeric_limits<std::int64_t>::max();
        for (int v = t; v != s; v = prev[v]) b = std::min(b, cap[prev[v]][v]);
        for (int v = t; v != s; v = prev[v]) {
            cap[prev[v]][v] -= b;
            cap[v][prev[v]] += b;
        }
        out.flow += b;
    }
    out.source_side.assign(net.node_count, 0);
    for (int v = 0; v < net.node_count; ++v) out.source_side[v] = prev[v] >= 0 ? 1 : 0;
    return out;
}

}  // namespace jei::testing
