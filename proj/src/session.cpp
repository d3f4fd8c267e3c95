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

#include "jei/session.hpp"

#include <algorithm>
#include <map>

#include "json.hpp"

namespace jei {

using nlohmann::json;

namespace {

void check_inputs(const SessionInputs& in) {
    if (in.volumes.empty()) throw Error("session needs at least one volume");
    if (!in.timepoint_labels.empty() && in.timepoint_labels.size() != in.volumes.size())
        throw Error("one time-point label per volume required");
    if (in.surfaces.size() != in.costs.size() || in.surfaces.size() != in.spec.surfaces.size())
        throw Error("surfaces, cost tables and graph surfaces disagree");
    for (std::size_t s = 0; s < in.surfaces.size(); ++s) {
        const auto& info = in.surfaces[s];
        if (info.column_set < 0 || info.column_set >= static_cast<int>(in.column_sets.size()))
            throw Error("surface refers to an unknown column set");
        if (info.timepoint < 0 || info.timepoint >= static_cast<int>(in.volumes.size()))
            throw Error("surface refers to an unknown time-point");
        const auto& cols = in.column_sets[info.column_set];
        if (cols.column_count() != in.spec.surfaces[s].columns || cols.nodes_per_column() != in.spec.nodes_per_column)
            throw Error("column set of surface " + std::to_string(s) + " does not match the graph spec");
    }
    if (!(in.default_delta_mm > 0.0) || in.default_n_nearest < 1) throw Error("invalid nudge defaults");
}

void check_stroke(const NudgeStroke& s) {
    if (s.points.empty()) throw Error("nudge stroke has no points");
    if (!(s.delta_mm > 0.0)) throw Error("nudge tolerance must be positive");
    if (s.n_nearest < 1) throw Error("nudge nearest-node count must be >= 1");
}

}  // namespace

std::uint64_t baseline_digest(const SessionInputs& in) {
    Fnv1a h;
    h.value(in.volumes.size());
    for (const auto& v : in.volumes) h.value(v.digest());
    h.value(in.column_sets.size());
    for (const auto& c : in.column_sets) h.value(c.digest());
    h.value(in.costs.size());
    for (const auto& c : in.costs) h.value(c.digest());
    h.value(in.spec.nodes_per_column);
    h.value(in.spec.smoothness);
    for (const auto& s : in.surfaces) {
        h.value(s.object);
        h.value(s.timepoint);
        h.value(static_cast<int>(s.kind));
        h.value(s.column_set);
    }
    return h.digest();
}

Session::Session(SessionInputs inputs)
    : in_((check_inputs(inputs), std::move(inputs))),
      net_([&] {
          std::vector<const CostTable*> p;
          for (const auto& c : in_.costs) p.push_back(&c);
          return build_network(in_.spec, p);
      }()),
      state_(net_.network()) {
    state_.solve();
    solution_ = extract_surfaces(net_, state_.source_set(), cost_ptrs());
    baseline_digest_ = jei::baseline_digest(in_);
    build_index();
}

Session::Session(SessionInputs inputs, const maxflow::ResidualSnapshot& snapshot, EditStack stack,
                 std::uint64_t baseline, std::uint64_t generation)
    : in_((check_inputs(inputs), std::move(inputs))),
      net_([&] {
          std::vector<const CostTable*> p;
          for (const auto& c : in_.costs) p.push_back(&c);
          return build_network(in_.spec, p);
      }()),
      state_(net_.network(), snapshot),
      stack_(std::move(stack)),
      baseline_digest_(baseline),
      generation_(generation) {
    if (stack_.cursor < 0 || stack_.cursor > static_cast<int>(stack_.records.size()))
        throw Error("edit stack cursor out of range");
    for (int r = 0; r < stack_.cursor; ++r)
        if (stack_.records[r].prior.size() != stack_.records[r].columns.size())
            throw Error("applied edit record lacks its prior costs");
    state_.re_solve();
    solution_ = extract_surfaces(net_, state_.source_set(), cost_ptrs());
    build_index();
}

void Session::build_index() {
    index_ = SpatialIndex();
    for (std::size_t c = 0; c < in_.column_sets.size(); ++c) index_.add(static_cast<int>(c), in_.column_sets[c]);
    index_.build();
}

std::vector<const CostTable*> Session::cost_ptrs() const {
    std::vector<const CostTable*> p;
    for (const auto& c : in_.costs) p.push_back(&c);
    return p;
}

int Session::graph_surface(int surface, int timepoint) const {
    if (timepoint < 0 || timepoint >= timepoint_count())
        throw Error("unknown time-point " + std::to_string(timepoint));
    int seen = 0;
    for (std::size_t s = 0; s < in_.surfaces.size(); ++s)
        if (in_.surfaces[s].timepoint == timepoint && seen++ == surface) return static_cast<int>(s);
    throw Error("unknown surface " + std::to_string(surface) + " at time-point " + std::to_string(timepoint));
}

NudgeRewrite Session::plan_nudge(const NudgeStroke& stroke) const {
    check_stroke(stroke);
    NudgeRewrite rw;
    rw.surface = graph_surface(stroke.surface, stroke.timepoint);
    const int set = in_.surfaces[rw.surface].column_set;
    const ColumnSet& cols = in_.column_sets[set];
    const int k = cols.nodes_per_column();
    // Nodes further away than a full column length do not belong to this surface's neighbourhood.
    const double reach = k * cols.spacing();

    // Per column, the matched node closest to its nudge point; ties to the lower node.
    std::map<int, std::pair<double, int>> matched;
    for (const Vec3& p : stroke.points)
        for (const auto& nb : index_.nearest(p, stroke.n_nearest, set)) {
            if (nb.distance > reach) continue;
            const std::pair<double, int> cand{nb.distance, nb.tag.index.node};
            auto [it, fresh] = matched.try_emplace(nb.tag.index.column, cand);
            if (!fresh && cand < it->second) it->second = cand;
        }
    if (matched.empty()) throw Error("nudge matched no columns");

    // Distance along the column; nodes are equally spaced in arc length.
    const double band = stroke.delta_mm / cols.spacing() - 1e-9;
    for (const auto& [c, m] : matched) {
        rw.columns.push_back(c);
        const int ref = m.second;
        std::vector<double> costs(k);
        for (int j = 0; j < k; ++j) costs[j] = std::abs(j - ref) < band ? 0.0 : 1.0;
        rw.costs.push_back(std::move(costs));
    }
    return rw;
}

std::vector<std::vector<double>> Session::column_costs(int surface, const std::vector<int>& columns) const {
    std::vector<std::vector<double>> out;
    for (int c : columns) {
        const auto col = in_.costs[surface].column(c);
        out.emplace_back(col.begin(), col.end());
    }
    return out;
}

void Session::apply_costs(int surface, const std::vector<int>& columns, const std::vector<std::vector<double>>& costs) {
    const int k = net_.nodes_per_column();
    for (std::size_t i = 0; i < columns.size(); ++i) {
        const int c = columns[i];
        in_.costs[surface].set_column(c, costs[i]);
        const auto t = net_.column_terminals(surface, c, costs[i]);
        for (int g = 0; g < k; ++g) state_.update_terminal(net_.graph_node(surface, c, g), t[g].first, t[g].second);
    }
    state_.re_solve();
    update_surfaces(solution_, net_, state_.source_set(), state_.changed_nodes(), cost_ptrs());
}

void Session::reapply(EditRecord& rec) {
    const NudgeRewrite rw = plan_nudge(rec.stroke);
    rec.columns = rw.columns;
    rec.prior = column_costs(rw.surface, rw.columns);
    apply_costs(rw.surface, rw.columns, rw.costs);
    rec.generation = state_.generation();
}

void Session::revert(const EditRecord& rec) {
    apply_costs(graph_surface(rec.stroke.surface, rec.stroke.timepoint), rec.columns, rec.prior);
}

void Session::push_edit(const NudgeStroke& stroke) {
    EditRecord rec;
    rec.stroke = stroke;
    reapply(rec);
    stack_.records.resize(stack_.cursor);
    stack_.records.push_back(std::move(rec));
    ++stack_.cursor;
}

const SurfaceSolution& Session::apply_nudge(const NudgeStroke& stroke) {
    plan_nudge(stroke);  // validates before anything changes
    push_edit(stroke);
    ++generation_;
    return solution_;
}

const SurfaceSolution& Session::undo() {
    if (stack_.cursor == 0) throw Error("nothing to undo");
    revert(stack_.records[stack_.cursor - 1]);
    --stack_.cursor;
    ++generation_;
    return solution_;
}

const SurfaceSolution& Session::redo() {
    if (stack_.cursor >= static_cast<int>(stack_.records.size())) throw Error("nothing to redo");
    reapply(stack_.records[stack_.cursor]);
    ++stack_.cursor;
    ++generation_;
    return solution_;
}

std::string encode_stack(const EditStack& stack, std::uint64_t digest) {
    json j;
    j["baseline_digest"] = to_hex(digest);
    j["strokes"] = json::array();
    for (const auto& r : stack.records) {
        json pts = json::array();
        for (const auto& p : r.stroke.points) pts.push_back({p.x, p.y, p.z});
        j["strokes"].push_back({{"surface", r.stroke.surface},
                                {"timepoint", r.stroke.timepoint},
                                {"delta_mm", r.stroke.delta_mm},
                                {"n_nearest", r.stroke.n_nearest},
                                {"points", pts}});
    }
    j["cursor"] = stack.cursor;
    return j.dump(2) + "\n";
}

StackFile decode_stack(std::string_view text) {
    StackFile f;
    try {
        const json j = json::parse(text);
        const std::string hex = j.at("baseline_digest").get<std::string>();
        std::size_t used = 0;
        f.baseline_digest = std::stoull(hex, &used, 16);
        if (used != hex.size() || hex.size() != 16) throw Error("malformed baseline digest");
        for (const auto& s : j.at("strokes")) {
            NudgeStroke st;
            st.surface = s.at("surface").get<int>();
            st.timepoint = s.at("timepoint").get<int>();
            st.delta_mm = s.at("delta_mm").get<double>();
            st.n_nearest = s.at("n_nearest").get<int>();
            for (const auto& p : s.at("points")) {
                if (p.size() != 3) throw Error("nudge point needs 3 coordinates");
                st.points.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
            }
            check_stroke(st);
            f.strokes.push_back(std::move(st));
        }
        f.cursor = j.at("cursor").get<int>();
    } catch (const json::exception& e) {
        throw Error(std::string("malformed edit stack: ") + e.what());
    } catch (const std::logic_error&) {
        throw Error("malformed baseline digest");
    }
    if (f.cursor < 0 || f.cursor > static_cast<int>(f.strokes.size())) throw Error("edit stack cursor out of range");
    return f;
}

std::string Session::save_stack() const { return encode_stack(stack_, baseline_digest_); }

const SurfaceSolution& Session::load_stack(std::string_view text) {
    const StackFile f = decode_stack(text);
    if (f.baseline_digest != baseline_digest_)
        throw BaselineMismatch("edit stack baseline digest " + to_hex(f.baseline_digest) +
                               " does not match session baseline " + to_hex(baseline_digest_));
    // Rewrites depend only on geometry, so every stroke can be checked before anything changes.
    for (const auto& s : f.strokes) plan_nudge(s);

    while (stack_.cursor > 0) {
        revert(stack_.records[stack_.cursor - 1]);
        --stack_.cursor;
    }
    stack_.records.clear();
    for (int i = 0; i < f.cursor; ++i) push_edit(f.strokes[i]);
    for (std::size_t i = f.cursor; i < f.strokes.size(); ++i) stack_.records.push_back({f.strokes[i], {}, {}, 0});
    ++generation_;
    return solution_;
}

}  // namespace jei
