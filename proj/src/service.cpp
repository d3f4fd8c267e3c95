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

#include "jei/service.hpp"

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <shared_mutex>

#include "httplib.h"
#include "jei/inputs.hpp"
#include "jei/session_io.hpp"
#include "jei/slice.hpp"
#include "json.hpp"

namespace jei {

using nlohmann::json;

void TicketLock::acquire(bool exclusive) {
    std::unique_lock l(m_);
    const std::uint64_t ticket = next_ticket_++;
    cv_.wait(l, [&] { return ticket == next_start_ && !writer_ && (!exclusive || readers_ == 0); });
    ++next_start_;
    if (exclusive) writer_ = true;
    else ++readers_;
    cv_.notify_all();
}

void TicketLock::unlock_shared() {
    std::lock_guard l(m_);
    --readers_;
    cv_.notify_all();
}

void TicketLock::lock() { acquire(true); }

void TicketLock::unlock() {
    std::lock_guard l(m_);
    writer_ = false;
    cv_.notify_all();
}

namespace {

struct HttpError {
    int status = 400;
    std::string code;
    std::string message;
    json extra = json::object();
};

HttpError bad_field(const std::string& field, const std::string& message) {
    return {400, "invalid_request", message, {{"field", field}}};
}

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const HttpError& e) {
    json err = e.extra;
    err["code"] = e.code;
    err["message"] = e.message;
    send_json(res, e.status, {{"error", err}});
}

template <typename F>
void guarded(httplib::Response& res, F&& f) {
    try {
        f();
    } catch (const HttpError& e) {
        send_error(res, e);
    } catch (const InputError& e) {
        send_error(res, bad_field(e.field(), e.message()));
    } catch (const BaselineMismatch& e) {
        send_error(res, {409, "baseline_mismatch", e.what()});
    } catch (const json::exception& e) {
        send_error(res, {400, "malformed_json", e.what()});
    } catch (const Error& e) {
        send_error(res, {422, "rejected", e.what()});
    } catch (const std::exception& e) {
        send_error(res, {500, "internal", e.what()});
    }
}

json parse_body(const httplib::Request& req, bool allow_empty) {
    if (req.body.empty()) {
        if (allow_empty) return json::object();
        throw HttpError{400, "malformed_json", "request body is empty"};
    }
    json b = json::parse(req.body);
    if (!b.is_object()) throw HttpError{400, "malformed_json", "request body must be a JSON object"};
    return b;
}

int int_field(const json& b, const std::string& key, std::optional<int> fallback = std::nullopt) {
    if (!b.contains(key)) {
        if (fallback) return *fallback;
        throw bad_field(key, "required");
    }
    if (!b[key].is_number_integer()) throw bad_field(key, "expected an integer");
    return b[key].get<int>();
}

std::string string_field(const json& b, const std::string& key) {
    if (!b.contains(key)) return {};
    if (!b[key].is_string()) throw bad_field(key, "expected a string");
    return b[key].get<std::string>();
}

int int_param(const httplib::Request& req, const std::string& key, std::optional<int> fallback = std::nullopt) {
    if (!req.has_param(key)) {
        if (fallback) return *fallback;
        throw bad_field(key, "required");
    }
    const std::string v = req.get_param_value(key);
    std::size_t used = 0;
    int out = 0;
    try {
        out = std::stoi(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw bad_field(key, "expected an integer, got '" + v + "'");
    return out;
}

SliceAxis axis_of(const std::string& field, const std::string& s) {
    try {
        return slice_axis_from_string(s);
    } catch (const Error& e) {
        throw bad_field(field, e.what());
    }
}

/// A validated slice request against one session.
struct SlicePose {
    int timepoint = 0;
    SliceAxis axis = SliceAxis::z;
    int index = 0;
    int step = 1;
};

SlicePose make_pose(const Session& s, int tp, const std::string& axis, int index, int max_width) {
    if (tp < 0 || tp >= s.timepoint_count())
        throw bad_field("tp", "time-point " + std::to_string(tp) + " out of range [0, " +
                                  std::to_string(s.timepoint_count() - 1) + "]");
    SlicePose p{tp, axis_of("axis", axis), index, 1};
    const Volume& v = s.volumes()[tp];
    const int n = v.dims()[static_cast<int>(p.axis)];
    if (index < 0 || index >= n) {
        HttpError e = bad_field("index", "slice index " + std::to_string(index) + " out of range [0, " +
                                             std::to_string(n - 1) + "]");
        e.extra["range"] = {0, n - 1};
        throw e;
    }
    if (max_width < 0) throw bad_field("max_width", "must be >= 0");
    p.step = slice_step(v, p.axis, max_width);
    return p;
}

double round4(double x) { return std::round(x * 1e4) / 1e4; }

json slice_payload(const Session& s, const SlicePose& pose) {
    const Volume& v = s.volumes()[pose.timepoint];
    const SliceImage img = extract_slice(v, pose.axis, pose.index, pose.step);
    const int w = static_cast<int>(pose.axis);
    const auto [ua, va] = plane_axes(pose.axis);
    const double plane = v.origin()[w] + pose.index * v.spacing()[w];
    const double su = v.spacing()[ua] * pose.step;
    const double sv = v.spacing()[va] * pose.step;

    json contours = json::array();
    int local = 0;
    for (std::size_t g = 0; g < s.surfaces().size(); ++g) {
        const SurfaceInfo& info = s.surfaces()[g];
        if (info.timepoint != pose.timepoint) continue;
        const ColumnSet& cs = s.column_sets()[info.column_set];
        const std::vector<int>& nodes = s.solution().nodes[g];
        std::vector<Vec3> verts(static_cast<std::size_t>(cs.column_count()));
        for (int c = 0; c < cs.column_count(); ++c) verts[c] = cs.position(c, nodes[c]);
        json lines = json::array();
        for (const auto& line : mesh_plane_section(verts, cs.triangles(), pose.axis, plane)) {
            json pts = json::array();
            for (const Vec3& p : line) {
                const double pu = std::clamp((p[ua] - v.origin()[ua]) / su, 0.0, img.width - 1.0);
                const double pv = std::clamp((p[va] - v.origin()[va]) / sv, 0.0, img.height - 1.0);
                pts.push_back({round4(pu), round4(pv)});
            }
            lines.push_back(std::move(pts));
        }
        contours.push_back({{"surface", local++},
                            {"name", info.name},
                            {"object", info.object},
                            {"kind", to_string(info.kind)},
                            {"polylines", std::move(lines)}});
    }
    const std::string raw(img.pixels.begin(), img.pixels.end());
    return {{"tp", pose.timepoint},
            {"axis", to_string(pose.axis)},
            {"index", pose.index},
            {"step", img.step},
            {"width", img.width},
            {"height", img.height},
            {"pixels", httplib::detail::base64_encode(raw)},
            {"contours", std::move(contours)}};
}

std::optional<SlicePose> body_pose(const Session& s, const json& b) {
    if (!b.contains("index")) return std::nullopt;
    const std::string axis = b.contains("axis") ? string_field(b, "axis") : "z";
    return make_pose(s, int_field(b, "tp", 0), axis, int_field(b, "index"), int_field(b, "max_width", 0));
}

void check_generation(const Session& s, const json& b) {
    if (!b.contains("generation")) return;
    if (!b["generation"].is_number_unsigned()) throw bad_field("generation", "expected a non-negative integer");
    const auto g = b["generation"].get<std::uint64_t>();
    if (g != s.generation()) {
        throw HttpError{409, "stale_generation",
                        "client generation " + std::to_string(g) + " is behind session generation " +
                            std::to_string(s.generation()),
                        {{"generation", s.generation()}}};
    }
}

json changed_surfaces(const Session& s, const SurfaceSolution& before) {
    json out = json::array();
    std::vector<int> local(static_cast<std::size_t>(s.timepoint_count()), 0);
    for (std::size_t g = 0; g < s.surfaces().size(); ++g) {
        const SurfaceInfo& info = s.surfaces()[g];
        const int idx = local[info.timepoint]++;
        if (before.nodes[g] != s.solution().nodes[g])
            out.push_back({{"tp", info.timepoint}, {"surface", idx}, {"name", info.name}});
    }
    return out;
}

json stack_state(const Session& s) {
    return {{"cursor", s.stack().cursor}, {"size", s.stack().records.size()}};
}

json session_info(const std::string& id, const Session& s) {
    json vols = json::array();
    for (const Volume& v : s.volumes()) {
        vols.push_back({{"dims", v.dims()},
                        {"spacing", {v.spacing().x, v.spacing().y, v.spacing().z}},
                        {"origin", {v.origin().x, v.origin().y, v.origin().z}}});
    }
    json surfaces = json::array();
    std::vector<int> local(static_cast<std::size_t>(s.timepoint_count()), 0);
    for (const SurfaceInfo& info : s.surfaces()) {
        surfaces.push_back({{"tp", info.timepoint},
                            {"surface", local[info.timepoint]++},
                            {"name", info.name},
                            {"object", info.object},
                            {"kind", to_string(info.kind)},
                            {"columns", s.column_sets()[info.column_set].column_count()}});
    }
    return {{"id", id},
            {"generation", s.generation()},
            {"timepoints", s.timepoint_count()},
            {"labels", s.inputs().timepoint_labels},
            {"volumes", std::move(vols)},
            {"surfaces", std::move(surfaces)},
            {"stack", stack_state(s)},
            {"nudge_defaults", {{"delta_mm", s.inputs().default_delta_mm}, {"n_nearest", s.inputs().default_n_nearest}}},
            {"baseline_digest", to_hex(s.baseline_digest())}};
}

NudgeStroke stroke_from(const Session& s, const json& b, const SlicePose& pose) {
    NudgeStroke st;
    st.timepoint = pose.timepoint;
    st.surface = int_field(b, "surface");
    st.delta_mm = s.inputs().default_delta_mm;
    st.n_nearest = s.inputs().default_n_nearest;
    if (b.contains("delta_mm")) {
        if (!b["delta_mm"].is_number()) throw bad_field("delta_mm", "expected a number");
        st.delta_mm = b["delta_mm"].get<double>();
    }
    if (b.contains("n_nearest")) st.n_nearest = int_field(b, "n_nearest");
    if (!b.contains("points") || !b["points"].is_array()) throw bad_field("points", "expected an array of [u, v] pairs");
    if (b["points"].empty()) throw bad_field("points", "stroke has no points");

    const Volume& v = s.volumes()[pose.timepoint];
    const int w = static_cast<int>(pose.axis);
    const auto [ua, va] = plane_axes(pose.axis);
    const double wmax = (v.dims()[ua] - 1) / pose.step;
    const double hmax = (v.dims()[va] - 1) / pose.step;
    for (const json& p : b["points"]) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
            throw bad_field("points", "each point must be [u, v]");
        const double pu = p[0].get<double>();
        const double pv = p[1].get<double>();
        if (!(pu >= 0.0 && pu <= wmax && pv >= 0.0 && pv <= hmax))
            throw bad_field("points", "point outside the slice [0, " + std::to_string(static_cast<int>(wmax)) +
                                          "] x [0, " + std::to_string(static_cast<int>(hmax)) + "]");
        Vec3 q;
        q[w] = v.origin()[w] + pose.index * v.spacing()[w];
        q[ua] = v.origin()[ua] + pu * pose.step * v.spacing()[ua];
        q[va] = v.origin()[va] + pv * pose.step * v.spacing()[va];
        st.points.push_back(q);
    }
    return st;
}

}  // namespace

Service::Service(ServiceOptions options) : options_(std::move(options)), id_state_(options_.seed) {}

Service::~Service() = default;

std::string Service::next_id() {
    std::uint64_t z = (id_state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return to_hex(z ^ (z >> 31));
}

std::string Service::add(Session session) {
    auto e = std::make_shared<Entry>(std::move(session));
    std::lock_guard l(registry_mutex_);
    std::string id = next_id();
    while (sessions_.contains(id)) id = next_id();
    sessions_.emplace(id, std::move(e));
    return id;
}

std::shared_ptr<Service::Entry> Service::find(const std::string& id) {
    std::lock_guard l(registry_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw HttpError{404, "unknown_session", "no session '" + id + "'"};
    return it->second;
}

void Service::install(httplib::Server& server) {
    server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const json b = parse_body(req, false);
            std::optional<Session> session;
            if (b.contains("session_file")) {
                const std::string path = string_field(b, "session_file");
                std::error_code ec;
                if (!std::filesystem::is_regular_file(path, ec))
                    throw bad_field("session_file", "no such file '" + path + "'");
                try {
                    session.emplace(load_session(path));
                } catch (const Error& e) {
                    throw bad_field("session_file", e.what());
                }
            } else {
                InputSources src;
                src.volume = string_field(b, "volume");
                src.manifest = string_field(b, "manifest");
                src.phantom = string_field(b, "phantom");
                if (b.contains("meshes")) {
                    if (!b["meshes"].is_array()) throw bad_field("meshes", "expected an array of paths");
                    for (const json& m : b["meshes"]) {
                        if (!m.is_string()) throw bad_field("meshes", "expected an array of paths");
                        src.meshes.emplace_back(m.get<std::string>());
                    }
                }
                if (b.contains("object_names")) {
                    if (!b["object_names"].is_array()) throw bad_field("object_names", "expected an array of names");
                    for (const json& m : b["object_names"]) {
                        if (!m.is_string()) throw bad_field("object_names", "expected an array of names");
                        src.object_names.push_back(m.get<std::string>());
                    }
                }
                SegmentationConfig cfg = options_.config;
                if (b.contains("config")) {
                    try {
                        if (b["config"].is_string()) cfg = load_config(b["config"].get<std::string>());
                        else cfg = config_from_json(b["config"].dump());
                    } catch (const Error& e) {
                        throw bad_field("config", e.what());
                    }
                }
                const SegmentationRequest rq = load_request(src);
                session.emplace(segment(rq, cfg));
            }
            const int tps = session->timepoint_count();
            const std::uint64_t gen = session->generation();
            const std::string id = add(std::move(*session));
            send_json(res, 201, {{"id", id}, {"timepoints", tps}, {"generation", gen}});
        });
    });

    server.Get(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const std::string id = req.matches[1];
            auto e = find(id);
            std::shared_lock l(e->lock);
            send_json(res, 200, session_info(id, e->session));
        });
    });

    server.Get(R"(/sessions/([^/]+)/slice)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto e = find(req.matches[1]);
            std::shared_lock l(e->lock);
            const std::string axis = req.has_param("axis") ? req.get_param_value("axis") : "z";
            const SlicePose pose = make_pose(e->session, int_param(req, "tp", 0), axis, int_param(req, "index"),
                                             int_param(req, "max_width", 0));
            res.set_header("X-Jei-Generation", std::to_string(e->session.generation()));
            send_json(res, 200, slice_payload(e->session, pose));
        });
    });

    server.Post(R"(/sessions/([^/]+)/nudge)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto e = find(req.matches[1]);
            std::lock_guard l(e->lock);
            Session& s = e->session;
            const json b = parse_body(req, false);
            check_generation(s, b);
            const auto pose = body_pose(s, b);
            if (!pose) throw bad_field("index", "required");
            const NudgeStroke st = stroke_from(s, b, *pose);
            const SurfaceSolution before = s.solution();
            s.apply_nudge(st);
            send_json(res, 200,
                      {{"generation", s.generation()},
                       {"changed_surfaces", changed_surfaces(s, before)},
                       {"stack", stack_state(s)},
                       {"slice", slice_payload(s, *pose)}});
        });
    });

    for (const bool is_undo : {true, false}) {
        const std::string path = is_undo ? R"(/sessions/([^/]+)/undo)" : R"(/sessions/([^/]+)/redo)";
        server.Post(path, [this, is_undo](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                auto e = find(req.matches[1]);
                std::lock_guard l(e->lock);
                Session& s = e->session;
                const json b = parse_body(req, true);
                check_generation(s, b);
                const auto pose = body_pose(s, b);
                const bool can = is_undo ? s.stack().cursor > 0
                                         : s.stack().cursor < static_cast<int>(s.stack().records.size());
                if (!can) {
                    throw HttpError{409, is_undo ? "nothing_to_undo" : "nothing_to_redo",
                                    is_undo ? "nothing to undo" : "nothing to redo",
                                    {{"generation", s.generation()}, {"stack", stack_state(s)}}};
                }
                const SurfaceSolution before = s.solution();
                if (is_undo) s.undo();
                else s.redo();
                json out{{"generation", s.generation()},
                         {"changed_surfaces", changed_surfaces(s, before)},
                         {"stack", stack_state(s)}};
                if (pose) out["slice"] = slice_payload(s, *pose);
                send_json(res, 200, out);
            });
        });
    }

    server.Get(R"(/sessions/([^/]+)/stack)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto e = find(req.matches[1]);
            std::shared_lock l(e->lock);
            res.status = 200;
            res.set_content(e->session.save_stack(), "application/json");
        });
    });

    server.Put(R"(/sessions/([^/]+)/stack)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto e = find(req.matches[1]);
            std::lock_guard l(e->lock);
            Session& s = e->session;
            const SurfaceSolution before = s.solution();
            try {
                s.load_stack(req.body);
            } catch (const BaselineMismatch&) {
                throw;
            } catch (const Error& err) {
                throw HttpError{400, "invalid_stack", err.what()};
            }
            send_json(res, 200,
                      {{"generation", s.generation()},
                       {"changed_surfaces", changed_surfaces(s, before)},
                       {"stack", stack_state(s)}});
        });
    });

    server.Get(R"(/sessions/([^/]+)/surfaces)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto e = find(req.matches[1]);
            std::shared_lock l(e->lock);
            const Session& s = e->session;
            const int only = int_param(req, "tp", -1);
            if (only < -1 || only >= s.timepoint_count())
                throw bad_field("tp", "time-point " + std::to_string(only) + " out of range [0, " +
                                          std::to_string(s.timepoint_count() - 1) + "]");
            json list = json::array();
            std::vector<int> local(static_cast<std::size_t>(s.timepoint_count()), 0);
            for (std::size_t g = 0; g < s.surfaces().size(); ++g) {
                const SurfaceInfo& info = s.surfaces()[g];
                const int idx = local[info.timepoint]++;
                if (only >= 0 && info.timepoint != only) continue;
                const ColumnSet& cs = s.column_sets()[info.column_set];
                list.push_back({{"tp", info.timepoint},
                                {"surface", idx},
                                {"name", info.name},
                                {"object", info.object},
                                {"kind", to_string(info.kind)},
                                {"mesh", encode_mesh(cs.surface_mesh(s.solution().nodes[g]))}});
            }
            send_json(res, 200, {{"generation", s.generation()}, {"surfaces", std::move(list)}});
        });
    });
}

std::string default_address() {
    const char* env = std::getenv("JEI_ADDR");
    return env && *env ? env : "127.0.0.1:8080";
}

void serve(Service& service, const std::string& address) {
    const auto colon = address.rfind(':');
    if (colon == std::string::npos) throw Error("address must be host:port, got '" + address + "'");
    const std::string host = address.substr(0, colon);
    int port = 0;
    try {
        port = std::stoi(address.substr(colon + 1));
    } catch (const std::exception&) {
        throw Error("address must be host:port, got '" + address + "'");
    }
    httplib::Server server;
    service.install(server);
    std::cerr << "listening on " << host << ":" << port << "\n";
    if (!server.listen(host, port)) throw Error("cannot listen on " + address);
}

}  // namespace jei
