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

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "jei/bench.hpp"
#include "jei/inputs.hpp"
#include "jei/longitudinal.hpp"
#include "jei/service.hpp"
#include "jei/session_io.hpp"
#include "json.hpp"

using namespace jei;
namespace fs = std::filesystem;

namespace {

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;

    SegmentationConfig segmentation() const {
        SegmentationConfig c = config.empty() ? SegmentationConfig{} : load_config(config);
        if (threads) c.threads = *threads;
        c.validate();
        return c;
    }
};

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    out << text;
}

PhantomFile phantom_with_seed(const fs::path& p, const Globals& g) {
    PhantomFile f = load_phantom_file(p);
    if (g.seed) f.spec.seed = *g.seed;
    return f;
}

void print_report(const Session& s, const PhantomFile& truth, bool as_json) {
    const ErrorReport edited = phantom_error_report(s, s.solution(), truth);
    if (as_json) {
        std::cout << report_to_json(edited) << "\n";
        return;
    }
    if (s.stack().cursor == 0) {
        std::cout << format_table(edited);
        return;
    }
    Session automated = s;
    while (automated.stack().cursor > 0) automated.undo();
    const ErrorReport base = phantom_error_report(automated, automated.solution(), truth);
    std::cout << format_comparison(base, edited, "Automated", "JEI");
}

struct PhantomCmd {
    std::string spec;
    std::string out;

    void run(const Globals& g) const {
        const PhantomFile f = phantom_with_seed(spec, g);
        fs::create_directories(out);
        const SegmentationRequest rq = phantom_request(f);
        TimeSeriesManifest m;
        for (int t = 0; t < f.timepoints; ++t) {
            const std::string name = f.timepoints == 1 ? "volume.evf" : "tp" + std::to_string(t) + ".evf";
            save_volume(rq.volumes[t], fs::path(out) / name);
            m.timepoints.push_back({static_cast<double>(t), name});
            std::cout << "wrote " << (fs::path(out) / name).string() << "\n";
        }
        if (f.timepoints > 1) write_text(fs::path(out) / "series.json", encode_manifest(m));
        for (std::size_t o = 0; o < rq.meshes.size(); ++o) {
            const fs::path p = fs::path(out) / (rq.object_names[o] + ".mesh");
            save_mesh(rq.meshes[o], p);
            std::cout << "wrote " << p.string() << "\n";
        }
        write_text(fs::path(out) / "truth.json", phantom_file_to_json(f));
        std::cout << "wrote " << (fs::path(out) / "truth.json").string() << "\n";
    }
};

struct SegmentCmd {
    InputSources src;
    std::vector<std::string> meshes;
    std::string out;
    std::string truth;
    bool json = false;

    void run(const Globals& g) {
        for (const auto& m : meshes) src.meshes.emplace_back(m);
        SegmentationRequest rq;
        std::optional<PhantomFile> truth_file;
        if (!src.phantom.empty()) {
            truth_file = phantom_with_seed(src.phantom, g);
            rq = phantom_request(*truth_file);
            if (!src.meshes.empty()) {
                rq.meshes.clear();
                rq.object_names.clear();
                for (const auto& m : src.meshes) rq.meshes.push_back(load_mesh(m));
            }
            if (!src.object_names.empty()) rq.object_names = src.object_names;
        } else {
            rq = load_request(src);
        }
        if (!truth.empty()) truth_file = phantom_with_seed(truth, g);
        const Session s = segment(rq, g.segmentation());
        save_session(s, out);
        std::cerr << "wrote " << out << " (" << s.surfaces().size() << " surfaces, " << s.timepoint_count()
                  << " time-points)\n";
        if (truth_file) print_report(s, *truth_file, json);
    }
};

struct ReplayCmd {
    std::string session;
    std::string stack;
    std::string out;
    std::string truth;

    void run(const Globals& g) const {
        Session s = load_session(session);
        s.load_stack(read_text(stack));
        save_session(s, out);
        std::cerr << "replayed " << s.stack().cursor << " of " << s.stack().records.size() << " edits into " << out
                  << "\n";
        if (!truth.empty()) print_report(s, phantom_with_seed(truth, g), false);
    }
};

struct EvalCmd {
    std::string session;
    std::string truth;
    bool json = false;

    void run(const Globals& g) const { print_report(load_session(session), phantom_with_seed(truth, g), json); }
};

struct ServeCmd {
    std::string addr;

    void run(const Globals& g) const {
        ServiceOptions o;
        o.config = g.segmentation();
        if (g.seed) o.seed = *g.seed;
        Service service(o);
        serve(service, addr.empty() ? default_address() : addr);
    }
};

struct BenchCmd {
    std::string session;
    std::string phantom;
    int nudges = 20;
    int columns = 20;
    bool json = false;

    void run(const Globals& g) const {
        if (session.empty() == phantom.empty()) throw Error("bench needs exactly one of --session or --phantom");
        Session s = session.empty() ? segment(phantom_request(phantom_with_seed(phantom, g)), g.segmentation())
                                    : load_session(session);
        std::mt19937_64 rng(g.seed.value_or(1));
        std::vector<double> warm, cold;
        int same = 0;
        int columns_total = 0;
        for (std::size_t sc = 0; sc < s.column_sets().size(); ++sc) columns_total += s.column_sets()[sc].column_count();
        for (int i = 0; i < nudges; ++i) {
            const int surface = i % static_cast<int>(s.surfaces().size());
            const auto st = column_nudge(s, surface, columns, rng);
            if (!st) throw Error("no " + std::to_string(columns) + "-column nudge found on surface " + std::to_string(surface));
            const ResolveSample r = time_nudge(s, *st);
            warm.push_back(r.warm_ms);
            cold.push_back(r.cold_ms);
            same += r.same_cut;
        }
        const double mw = median(warm), mc = median(cold);
        if (json) {
            nlohmann::json j{{"nudges", nudges},        {"columns_per_nudge", columns}, {"median_warm_ms", mw},
                             {"median_cold_ms", mc},    {"ratio", mw / mc},           {"same_cut", same},
                             {"warm_ms", warm},         {"cold_ms", cold},            {"graph_columns", columns_total}};
            std::cout << j.dump(2) << "\n";
            return;
        }
        std::cout << "Graph: " << s.surfaces().size() << " surfaces, " << columns_total << " columns in "
                  << s.column_sets().size() << " column sets\n";
        std::cout << std::fixed << std::setprecision(2);
        std::cout << std::left << std::setw(8) << "Nudge" << std::right << std::setw(10) << "Columns" << std::setw(12)
                  << "Warm (ms)" << std::setw(12) << "Cold (ms)" << "\n";
        std::cout << std::string(42, '-') << "\n";
        for (int i = 0; i < nudges; ++i)
            std::cout << std::left << std::setw(8) << i + 1 << std::right << std::setw(10) << columns << std::setw(12)
                      << warm[i] << std::setw(12) << cold[i] << "\n";
        std::cout << std::string(42, '-') << "\n";
        std::cout << std::left << std::setw(18) << "Median" << std::right << std::setw(12) << mw << std::setw(12) << mc
                  << "\n";
        std::cout << "Warm/cold median ratio " << std::setprecision(4) << mw / mc << "; identical cuts " << same
                  << "/" << nudges << "\n";
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal-surface knee segmentation with just-enough-interaction editing"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "Segmentation config JSON")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "Seed for phantom noise, session ids and bench strokes");
    app.add_option("--threads", g.threads, "Column tracing threads")->check(CLI::PositiveNumber);

    PhantomCmd phantom;
    auto* ph = app.add_subcommand("phantom", "Render a phantom file to volumes, meshes and truth");
    ph->add_option("spec", phantom.spec, "Phantom file")->required()->check(CLI::ExistingFile);
    ph->add_option("-o,--out", phantom.out, "Output directory")->required();

    SegmentCmd segment_cmd;
    auto* sg = app.add_subcommand("segment", "Automated segmentation to a session file");
    auto* vol = sg->add_option("--volume", segment_cmd.src.volume, "EVF volume");
    auto* man = sg->add_option("--manifest", segment_cmd.src.manifest, "Time-series manifest");
    auto* phf = sg->add_option("--phantom", segment_cmd.src.phantom, "Phantom file (also the truth)");
    vol->excludes(man)->excludes(phf);
    man->excludes(phf);
    sg->add_option("--mesh", segment_cmd.meshes, "Initial object mesh, one per object");
    sg->add_option("--name", segment_cmd.src.object_names, "Object name, one per mesh");
    sg->add_option("-o,--out", segment_cmd.out, "Session file to write")->required();
    sg->add_option("--truth", segment_cmd.truth, "Phantom file to report errors against")->check(CLI::ExistingFile);
    sg->add_flag("--json", segment_cmd.json, "Report as JSON");

    ReplayCmd replay;
    auto* rp = app.add_subcommand("nudge-replay", "Apply an edit stack file to a session file");
    rp->add_option("session", replay.session, "Session file")->required()->check(CLI::ExistingFile);
    rp->add_option("stack", replay.stack, "Edit stack JSON")->required()->check(CLI::ExistingFile);
    rp->add_option("-o,--out", replay.out, "Session file to write")->required();
    rp->add_option("--truth", replay.truth, "Phantom file to report errors against")->check(CLI::ExistingFile);

    EvalCmd eval;
    auto* ev = app.add_subcommand("eval", "Surface errors of a session against phantom truth");
    ev->add_option("session", eval.session, "Session file")->required()->check(CLI::ExistingFile);
    ev->add_option("truth", eval.truth, "Phantom file")->required()->check(CLI::ExistingFile);
    ev->add_flag("--json", eval.json, "Report as JSON");

    ServeCmd serve_cmd;
    auto* sv = app.add_subcommand("serve", "Start the HTTP service");
    sv->add_option("--addr", serve_cmd.addr, "host:port (default $JEI_ADDR or 127.0.0.1:8080)");

    BenchCmd bench;
    auto* bn = app.add_subcommand("bench", "Cold versus warm re-solve timing");
    bn->add_option("--session", bench.session, "Session file")->check(CLI::ExistingFile);
    bn->add_option("--phantom", bench.phantom, "Phantom file to segment first")->check(CLI::ExistingFile);
    bn->add_option("--nudges", bench.nudges, "Number of timed nudges")->check(CLI::PositiveNumber);
    bn->add_option("--columns", bench.columns, "Columns rewritten per nudge")->check(CLI::PositiveNumber);
    bn->add_flag("--json", bench.json, "Output as JSON");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*ph) phantom.run(g);
        else if (*sg) segment_cmd.run(g);
        else if (*rp) replay.run(g);
        else if (*ev) eval.run(g);
        else if (*sv) serve_cmd.run(g);
        else if (*bn) bench.run(g);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
