#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "config.hpp"
#include "sphere2b/blowup.hpp"
#include "sphere2b/collision.hpp"
#include "sphere2b/integrate.hpp"
#include "sphere2b/io.hpp"
#include "sphere2b/topology.hpp"
#include "sphere2b/version.hpp"

namespace fs = std::filesystem;
using namespace sphere2b;
using namespace sphere2b::cli;

namespace {

enum Exit { kOk = 0, kFailedVerdict = 1, kSchema = 2, kIntegration = 3, kInsufficientTail = 4 };

int exit_code_for(ErrorKind k) {
    switch (k) {
        case ErrorKind::Domain:
        case ErrorKind::InvalidState:
        case ErrorKind::SingularInput:
        case ErrorKind::DegenerateConfiguration:
        case ErrorKind::CoordinateSingularity: return kSchema;
        case ErrorKind::StepUnderflow:
        case ErrorKind::BudgetExhausted: return kIntegration;
        case ErrorKind::InsufficientTail:
        case ErrorKind::WindowTooShort: return kInsufficientTail;
        default: return kFailedVerdict;
    }
}

// One line on stderr per failure: key=value pairs, message quoted.
void report_error(const std::string& command, const std::string& kind, const std::string& what, int code) {
    json msg = what;
    std::cerr << "error command=" << command << " kind=" << kind << " exit=" << code << " message=" << msg.dump()
              << "\n";
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs))));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex m;
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(m);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

json complex_list(const std::vector<std::complex<double>>& v) {
    json a = json::array();
    for (const auto& z : v) a.push_back({z.real(), z.imag()});
    return a;
}

json sidecar(const std::string& command, const json& cfg, const std::vector<std::string>& outputs) {
    return {{"tool", "sphere2b"},
            {"version", kVersion},
            {"command", command},
            {"config", cfg},
            {"config_hash", hex64(fnv1a(cfg.dump()))},
            {"outputs", outputs}};
}

fs::path with_ext(const std::string& prefix, const std::string& suffix) { return fs::path(prefix + suffix); }

// CSV and its sidecar x.csv -> x.json.
void write_pair(const fs::path& csv_path, const CsvBuilder& csv, json side) {
    fs::path json_path = csv_path;
    json_path.replace_extension(".json");
    if (csv_path.has_parent_path()) fs::create_directories(csv_path.parent_path());
    side["csv"] = csv_path.filename().string();
    side["rows"] = csv.rows();
    atomic_write(csv_path, csv.str());
    atomic_write(json_path, side.dump(2) + "\n");
}

const Field kOut{"out", Kind::String, nullptr, "Output prefix"};
const Field kJobs{"jobs", Kind::Integer, 1, "Worker threads"};

// ---------------------------------------------------------------- simulate

Schema simulate_schema() {
    return {
        {"system", Kind::String, "poly",
         "full, reduced, poly, regularised, regularised-timed, invariant-plane-q, invariant-plane, "
         "invariant-plane-reg, invariant-plane-blowup, chart1, chart2"},
        {"state", Kind::NumberList, nullptr, "Full initial state in the system's component order"},
        {"m", Kind::NumberList, nullptr, "m1,m2,m3 (m1,m2 for the blow-up charts)"},
        {"q", Kind::Number, nullptr, "Angular separation"},
        {"xi", Kind::Number, nullptr, "cot q"},
        {"p", Kind::Number, nullptr, "Momentum conjugate to q"},
        {"eta", Kind::Number, nullptr, "Regularised eta = 1/xi"},
        {"zeta", Kind::Number, nullptr, "Regularised zeta"},
        {"C", Kind::Number, nullptr, "Casimir value (invariant-plane systems)"},
        {"sign", Kind::Sign, "+", "Branch m1 = -sign sqrt(C) (invariant-plane systems)"},
        {"mu1", Kind::Number, 1.0, "Mass of body 1 (full and reduced systems)"},
        {"mu2", Kind::Number, 1.0, "Mass of body 2"},
        {"t", Kind::Range, "0:10", "Time span a:b"},
        {"rtol", Kind::Number, 1e-10, "Relative tolerance"},
        {"atol", Kind::Number, 1e-12, "Absolute tolerance"},
        {"max_step", Kind::Number, nullptr, "Largest step"},
        {"threshold", Kind::Number, 1e6, "xi at which a collision is declared"},
        {"undivided", Kind::Bool, false, "Blow-up charts: integrate the field before division by the radial coordinate"},
        {"regularise", Kind::Bool, false, "Continue a collision in the regularised system to reconstruct t*"},
        {"every", Kind::Integer, 1, "Write every n-th accepted step (the last one always)"},
        kOut,
        kJobs,
    };
}

std::vector<double> assemble_state(System sys, const json& cfg) {
    const auto names = component_names(sys);
    if (has(cfg, "state")) {
        auto v = nums(cfg, "state");
        if (v.size() != names.size())
            throw SchemaError("state: system " + std::string(system_name(sys)) + " needs " +
                              std::to_string(names.size()) + " values");
        return v;
    }
    std::vector<double> m;
    if (has(cfg, "m")) m = nums(cfg, "m");
    std::vector<double> y;
    for (const auto& n : names) {
        if (n == "m1" || n == "m2" || n == "m3") {
            const std::size_t k = static_cast<std::size_t>(n[1] - '1');
            if (k >= m.size()) throw SchemaError("missing " + n + " (give --m or --state)");
            y.push_back(m[k]);
        } else if (n == "t_phys") {
            y.push_back(0.0);
        } else if (has(cfg, n)) {
            y.push_back(num(cfg, n));
        } else {
            throw SchemaError("missing initial value '" + n + "' for system " + system_name(sys));
        }
    }
    return y;
}

int cmd_simulate(const json& cfg) {
    const auto sys = system_from_name(cfg["system"].get<std::string>());
    if (!sys) throw SchemaError("unknown system '" + cfg["system"].get<std::string>() + "'");
    SystemSpec spec;
    spec.system = *sys;
    spec.masses = {num(cfg, "mu1"), num(cfg, "mu2")};
    spec.sign = cfg["sign"].get<int>();
    spec.divided = !cfg["undivided"].get<bool>();
    const bool plane = *sys == System::InvariantPlaneQ || *sys == System::InvariantPlaneXi ||
                       *sys == System::InvariantPlaneReg || *sys == System::InvariantPlaneBlowup;
    if (plane) spec.C = num(cfg, "C");
    const auto y0 = assemble_state(*sys, cfg);

    IntegratorConfig ic;
    ic.rel_tol = num(cfg, "rtol");
    ic.abs_tol = num(cfg, "atol");
    if (has(cfg, "max_step")) ic.max_step = num(cfg, "max_step");
    ic.xi_collision_threshold = num(cfg, "threshold");
    const auto span = nums(cfg, "t");
    const long long every = cfg["every"].get<long long>();
    if (every < 1) throw SchemaError("every must be >= 1");

    const Trajectory tr = integrate(spec, y0, span[0], span[1], ic);

    auto header = component_names(*sys);
    header.insert(header.begin(), "t");
    header.emplace_back("H");
    header.emplace_back("C");
    CsvBuilder csv(header);
    for (std::size_t i = 0; i < tr.size(); ++i) {
        if (i % static_cast<std::size_t>(every) != 0 && i + 1 != tr.size()) continue;
        csv.add(tr.times[i]);
        for (std::size_t k = 0; k < tr.dim; ++k) csv.add(tr.state(i)[k]);
        const auto [H, C] = invariants(spec, tr.state(i));
        csv.add(H).add(C);
        csv.end_row();
    }

    const std::string prefix = has(cfg, "out") ? cfg["out"].get<std::string>() : "simulate";
    const fs::path csv_path = with_ext(prefix, ".csv");
    json side = sidecar("simulate", cfg, {csv_path.string()});
    json res = {{"termination", termination_name(tr.termination)},
                {"samples", tr.size()},
                {"accepted_steps", tr.accepted_steps},
                {"rejected_steps", tr.rejected_steps},
                {"t_end", tr.times.back()},
                {"H0", tr.H0},
                {"C0", tr.C0},
                {"max_drift_H", tr.max_drift_H()},
                {"max_drift_C", tr.max_drift_C()}};
    if (poly_view(spec, y0.data())) {
        const auto [rh, rc] = max_relative_drift(tr);
        res["max_relative_drift_H"] = rh;
        res["max_relative_drift_C"] = rc;
    }
    if (tr.terminal_event) {
        const auto& e = *tr.terminal_event;
        res["terminal_event"] = {{"t_star", e.t_star},         {"t_star_stderr", e.t_star_stderr},
                                 {"beta", e.beta},             {"beta_stderr", e.beta_stderr},
                                 {"fit_residual", e.fit_residual}, {"terminal_state", e.terminal_state}};
    } else if (tr.termination == Termination::Collision) {
        res["terminal_event"] = {{"t_star", nullptr}, {"note", "threshold reached; tail too short for a pole fit"}};
    }
    if (cfg["regularise"].get<bool>() && tr.termination == Termination::Collision) {
        const auto rc = continue_regularised(tr, ic);
        res["regularised"] = {{"t_star", rc.t_star},
                              {"handoff_residual", rc.handoff_residual},
                              {"tail_estimate", rc.tail_estimate}};
    }
    side["result"] = res;
    write_pair(csv_path, csv, side);
    std::cout << "simulate: " << termination_name(tr.termination) << " at t=" << format_double(tr.times.back())
              << ", " << tr.size() << " samples -> " << csv_path.string() << "\n";
    return kOk;
}

// ---------------------------------------------------------------- verify-collision

Schema verify_schema() {
    Field seed{"seed", Kind::NumberList, nullptr, "m1,m2,m3,xi,p of one polynomial-system seed (default: the 5-seed battery)"};
    seed.size = 5;
    return {
        {"system", Kind::String, "poly", "poly or invariant-plane"},
        seed,
        {"C", Kind::Number, nullptr, "Casimir (invariant-plane seed)"},
        {"sign", Kind::Sign, "+", "Branch (invariant-plane seed)"},
        {"xi", Kind::Number, 0.0, "Initial xi (invariant-plane seed)"},
        {"p", Kind::Number, 0.0, "Initial p (invariant-plane seed)"},
        {"negative_control", Kind::Bool, false, "Add the deliberately false bound m3 = O(1/xi^2)"},
        {"t_max", Kind::Number, 50.0, "Integration horizon"},
        {"rtol", Kind::Number, 1e-13, "Relative tolerance"},
        {"atol", Kind::Number, 1e-16, "Absolute tolerance"},
        kOut,
        kJobs,
    };
}

int cmd_verify(const json& cfg) {
    struct Job {
        std::string name;
        SystemSpec spec;
        std::vector<double> y0;
    };
    std::vector<Job> jobs;
    const std::string system = cfg["system"].get<std::string>();
    if (system == "poly") {
        if (has(cfg, "seed")) {
            jobs.push_back({"seed", {}, nums(cfg, "seed")});
        } else {
            for (const auto& s : default_collision_seeds())
                jobs.push_back({s.name, {}, {s.state.m1, s.state.m2, s.state.m3, s.state.xi, s.state.p}});
        }
        for (auto& j : jobs) j.spec.system = System::Poly;
    } else if (system == "invariant-plane") {
        Job j{"invariant-plane", {}, {num(cfg, "xi"), num(cfg, "p")}};
        j.spec.system = System::InvariantPlaneXi;
        j.spec.C = num(cfg, "C");
        j.spec.sign = cfg["sign"].get<int>();
        jobs.push_back(j);
    } else {
        throw SchemaError("system must be poly or invariant-plane");
    }

    VerifyOptions opts;
    opts.cfg.rel_tol = num(cfg, "rtol");
    opts.cfg.abs_tol = num(cfg, "atol");
    opts.t_max = num(cfg, "t_max");
    opts.negative_control = cfg["negative_control"].get<bool>();

    std::vector<CollisionVerification> results(jobs.size());
    parallel_for(jobs.size(), cfg["jobs"].get<int>(),
                 [&](std::size_t i) { results[i] = verify_collision(jobs[i].spec, jobs[i].y0, opts); });

    CsvBuilder csv({"seed", "check", "window_min", "window_max", "value", "slope", "stderr", "limit", "trivial", "pass"});
    json seeds = json::array();
    bool all = true;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const auto& r = results[i];
        json failing = json::array();
        for (const auto& c : r.records) {
            csv.add(jobs[i].name).add(c.name).add(c.window_min).add(c.window_max).add(c.value).add(c.slope);
            csv.add(c.stderr_).add(c.limit).add(c.trivial).add(c.pass);
            csv.end_row();
            if (!c.pass) {
                failing.push_back(c.name);
                std::cerr << "failed seed=" << jobs[i].name << " check=" << c.name << " value=" << format_double(c.value)
                          << " slope=" << format_double(c.slope) << " limit=" << format_double(c.limit) << "\n";
            }
        }
        json s = {{"name", jobs[i].name}, {"state", jobs[i].y0}, {"xi_end", r.xi_end}, {"pass", r.pass},
                  {"failing", failing}};
        if (r.event) s["t_star"] = r.event->t_star, s["beta"] = r.event->beta;
        seeds.push_back(s);
        all = all && r.pass;
    }
    const std::string prefix = has(cfg, "out") ? cfg["out"].get<std::string>() : "verify-collision";
    const fs::path csv_path = with_ext(prefix, ".csv");
    json side = sidecar("verify-collision", cfg, {csv_path.string()});
    side["result"] = {{"pass", all}, {"seeds", seeds}};
    write_pair(csv_path, csv, side);
    std::cout << "verify-collision: " << jobs.size() << " seed(s), " << (all ? "all pass" : "FAILED") << "\n";
    return all ? kOk : kFailedVerdict;
}

// ---------------------------------------------------------------- topology

Schema topology_schema() {
    return {
        {"h", Kind::Number, nullptr, "Energy of a single level set"},
        {"C", Kind::Number, nullptr, "Casimir of a single level set"},
        {"grid", Kind::StringList, nullptr, "Product grid: h=a:b:n C=a:b:n"},
        {"region_mask", Kind::String, nullptr, "Write the projection-region mask of the single level set to this CSV"},
        {"mask_resolution", Kind::Integer, 400, "Mask samples per axis"},
        {"cross_check", Kind::Bool, false, "Also count holes with the independent region sampler"},
        {"n_theta", Kind::Integer, 600, "Sampler resolution in theta"},
        kOut,
        kJobs,
    };
}

int cmd_topology(const json& cfg) {
    std::vector<double> hs, Cs;
    if (has(cfg, "grid")) {
        if (has(cfg, "h") || has(cfg, "C")) throw SchemaError("give either --grid or --h/--C, not both");
        std::vector<std::string> axes;
        for (const auto& entry : cfg["grid"]) {
            std::istringstream words(entry.get<std::string>());
            for (std::string w; words >> w;) axes.push_back(w);
        }
        for (const auto& s : axes) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw SchemaError("grid axis must look like h=a:b:n or C=a:b:n");
            int n = 0;
            const auto name = s.substr(0, eq);
            const auto values = parse_grid_axis(s.substr(eq + 1), n);
            if (name == "h")
                hs = values;
            else if (name == "C")
                Cs = values;
            else
                throw SchemaError("unknown grid axis '" + name + "'");
        }
        if (hs.empty() || Cs.empty()) throw SchemaError("grid needs both an h axis and a C axis");
    } else {
        hs = {num(cfg, "h")};
        Cs = {num(cfg, "C")};
    }
    for (double C : Cs)
        if (C < 0) throw SchemaError("C must be non-negative");

    const int jobs = cfg["jobs"].get<int>();
    const auto cells = scan_topology(hs, Cs, jobs);
    const bool cross = cfg["cross_check"].get<bool>();
    std::vector<int> sampled(cells.size(), -1);
    if (cross) {
        const int nt = cfg["n_theta"].get<int>();
        parallel_for(cells.size(), jobs, [&](std::size_t i) {
            if (cells[i].C > 0) sampled[i] = count_holes_by_sampling({cells[i].h, cells[i].C}, nt);
        });
    }

    std::vector<std::string> header{"h", "C", "holes", "label", "margin"};
    if (cross) header.emplace_back("sampled_holes");
    CsvBuilder csv(header);
    int mismatches = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& c = cells[i];
        csv.add(c.h).add(c.C).add(c.holes).add(topology_label_name(c.label)).add(c.margin);
        if (cross) {
            csv.add(sampled[i]);
            if (sampled[i] >= 0 && sampled[i] != c.holes && c.label != TopologyLabel::NearDegenerate) ++mismatches;
        }
        csv.end_row();
    }
    const std::string prefix = has(cfg, "out") ? cfg["out"].get<std::string>() : "topology";
    const fs::path csv_path = with_ext(prefix, ".csv");
    std::vector<std::string> outputs{csv_path.string()};

    if (has(cfg, "region_mask")) {
        if (cells.size() != 1) throw SchemaError("region_mask needs a single (h, C)");
        if (!(cells[0].C > 0)) throw SchemaError("region_mask needs C > 0");
        const auto mask = sample_projection_region({cells[0].h, cells[0].C}, cfg["mask_resolution"].get<int>());
        CsvBuilder m({"m2", "m3", "admissible"});
        for (int i = 0; i < mask.n; ++i)
            for (int j = 0; j < mask.n; ++j) {
                m.add(mask.m2(i)).add(mask.m3(j)).add(mask.at(i, j));
                m.end_row();
            }
        const fs::path mask_path = cfg["region_mask"].get<std::string>();
        json mside = sidecar("topology", cfg, {mask_path.string()});
        mside["result"] = {{"h", cells[0].h}, {"C", cells[0].C}, {"n", mask.n}, {"extent", mask.extent},
                           {"holes", cells[0].holes}};
        write_pair(mask_path, m, mside);
        outputs.push_back(mask_path.string());
    }

    json side = sidecar("topology", cfg, outputs);
    json hist = json::object();
    for (const auto& c : cells) hist[std::to_string(c.holes)] = hist.value(std::to_string(c.holes), 0) + 1;
    side["result"] = {{"cells", cells.size()}, {"hole_histogram", hist}};
    if (cross) side["result"]["sampler_mismatches"] = mismatches;
    write_pair(csv_path, csv, side);
    if (cells.size() == 1)
        std::cout << csv.str();
    else
        std::cout << "topology: " << cells.size() << " cells -> " << csv_path.string() << "\n";
    return mismatches == 0 ? kOk : kFailedVerdict;
}

// ---------------------------------------------------------------- blowup

Schema blowup_schema() {
    return {
        {"chart", Kind::String, "1", "1, 2 or invariant-plane"},
        {"C", Kind::Number, 9.0, "Casimir (invariant plane)"},
        {"sign", Kind::Sign, "+", "Branch (invariant plane)"},
        {"m1", Kind::Number, 1.0, "m1 of the equilibrium plane point"},
        {"m2", Kind::Number, 0.5, "m2 of the equilibrium plane point"},
        {"resolution", Kind::Integer, 2000, "Angular scan cells per angle"},
        {"portrait_resolution", Kind::Integer, 128, "Phase-portrait samples per angle"},
        kOut,
        kJobs,
    };
}

Chart chart_from(const std::string& s) {
    if (s == "1" || s == "chart1") return Chart::Chart1;
    if (s == "2" || s == "chart2") return Chart::Chart2;
    if (s == "invariant-plane" || s == "ip") return Chart::InvariantPlane;
    throw SchemaError("chart must be 1, 2 or invariant-plane");
}

int cmd_blowup(const json& cfg) {
    const Chart chart = chart_from(cfg["chart"].get<std::string>());
    ChartContext ctx;
    ctx.m1 = num(cfg, "m1");
    ctx.m2 = num(cfg, "m2");
    ctx.C = num(cfg, "C");
    ctx.sign = cfg["sign"].get<int>();
    if (ctx.C < 0) throw SchemaError("C must be non-negative");
    const int res = cfg["resolution"].get<int>();
    const int jobs = cfg["jobs"].get<int>();

    const auto pts = find_divisor_equilibria(chart, ctx, res);
    std::vector<EquilibriumReport> reps(pts.size());
    parallel_for(pts.size(), jobs, [&](std::size_t i) { reps[i] = classify_equilibrium(pts[i], ctx); });

    // Chart 2 is compared with chart 1 through the shared direction sphere.
    std::vector<EquilibriumReport> ref;
    if (chart == Chart::Chart2) {
        for (const auto& p : find_divisor_equilibria(Chart::Chart1, ctx, res)) ref.push_back(classify_equilibrium(p, ctx));
    }

    CsvBuilder csv({"index", "frame", "angle1", "angle2", "dir_m3", "dir_eta", "dir_zeta", "class", "full_equilibrium",
                    "residual", "zero_multiplicity"});
    json eqs = json::array();
    bool all_match = true;
    for (std::size_t i = 0; i < reps.size(); ++i) {
        const auto& r = reps[i];
        const Vec3 d = divisor_direction(r.point);
        const char* frame = r.point.frame == LocalFrame::Angles ? "angles"
                            : r.point.frame == LocalFrame::PoleNorth ? "pole-north" : "pole-south";
        csv.add(i).add(frame).add(r.point.angle1).add(r.point.angle2).add(d[0]).add(d[1]).add(d[2]);
        csv.add(equilibrium_class_name(r.cls)).add(r.point.full_equilibrium).add(r.point.residual).add(r.zero_multiplicity);
        csv.end_row();
        json e = {{"location", {r.point.angle1, r.point.angle2}},
                  {"frame", frame},
                  {"direction", {d[0], d[1], d[2]}},
                  {"class", equilibrium_class_name(r.cls)},
                  {"full_equilibrium", r.point.full_equilibrium},
                  {"residual", r.point.residual},
                  {"dim", r.dim},
                  {"jacobian", r.jacobian},
                  {"eigenvalues", complex_list(r.eigenvalues)},
                  {"on_sphere_eigenvalues", complex_list({r.on_sphere[0], r.on_sphere[1]})},
                  {"zero_multiplicity", r.zero_multiplicity},
                  {"m_rotation", r.m_rotation}};
        if (!r.point.full_equilibrium) e["location_mismatch"] = r.location_mismatch;
        if (!ref.empty()) {
            const EquilibriumReport* match = nullptr;
            for (const auto& q : ref) {
                const Vec3 e1 = divisor_direction(q.point);
                if (std::hypot(e1[0] - d[0], e1[1] - d[1], e1[2] - d[2]) <= 1e-9) match = &q;
            }
            e["chart1_class"] = match ? json(equilibrium_class_name(match->cls)) : json(nullptr);
            if (!match || match->cls != r.cls) all_match = false;
        }
        eqs.push_back(e);
    }

    const int pres = cfg["portrait_resolution"].get<int>();
    json portrait_info = nullptr;
    CsvBuilder pcsv({"angle1", "angle2", "d1", "d2"});
    const auto pp = divisor_phase_portrait(chart, pres, ctx);
    for (const auto& s : pp.samples) {
        pcsv.add(s.a1).add(s.a2).add(s.d1).add(s.d2);
        pcsv.end_row();
    }

    const std::string prefix = has(cfg, "out") ? cfg["out"].get<std::string>() : "blowup";
    const fs::path csv_path = with_ext(prefix, ".csv");
    const fs::path p_path = with_ext(prefix, "_portrait.csv");
    json side = sidecar("blowup", cfg, {csv_path.string(), p_path.string()});
    const auto full = std::count_if(pts.begin(), pts.end(), [](const auto& p) { return p.full_equilibrium; });
    side["result"] = {{"chart", chart_name(chart)},
                      {"equilibria", full},
                      {"centres", static_cast<long long>(pts.size()) - full},
                      {"reports", eqs},
                      {"index_sum", pp.index_sum}};
    if (!ref.empty()) side["result"]["chart1_classes_match"] = all_match;
    write_pair(csv_path, csv, side);
    json pside = sidecar("blowup", cfg, {p_path.string()});
    pside["result"] = {{"chart", chart_name(chart)}, {"resolution", pres}, {"index_sum", pp.index_sum}};
    write_pair(p_path, pcsv, pside);

    std::cout << "blowup " << chart_name(chart) << ": " << full << " equilibria";
    if (chart != Chart::InvariantPlane) std::cout << ", " << (pts.size() - static_cast<std::size_t>(full)) << " centres";
    std::cout << "\n";
    for (const auto& r : reps) {
        std::cout << "  " << equilibrium_class_name(r.cls) << " at (" << format_double(r.point.angle1) << ", "
                  << format_double(r.point.angle2) << ")";
        if (!r.point.full_equilibrium) std::cout << " [not a full equilibrium" << (r.location_mismatch ? "; differs from the stated location" : "") << "]";
        std::cout << "\n";
    }
    return (ref.empty() || all_match) ? kOk : kFailedVerdict;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two bodies on the sphere with cotangent potential: simulation and analysis"};
    app.require_subcommand(1);
    // -h stays free for the energy flag --h.
    app.set_help_flag("--help", "Print this help message and exit");

    struct Cmd {
        const char* name;
        const char* help;
        Schema schema;
        int (*run)(const json&);
        CLI::App* sub = nullptr;
        Binding binding;
    };
    std::vector<Cmd> cmds;
    cmds.push_back({"simulate", "Integrate one of the systems and write the trajectory", simulate_schema(), cmd_simulate, nullptr, {}});
    cmds.push_back({"verify-collision", "Run the collision tail checks on seeds", verify_schema(), cmd_verify, nullptr, {}});
    cmds.push_back({"topology", "Classify isoenergy surfaces for one (h, C) or a grid", topology_schema(), cmd_topology, nullptr, {}});
    cmds.push_back({"blowup", "Equilibria on the exceptional divisor and the divisor phase portrait", blowup_schema(), cmd_blowup, nullptr, {}});
    for (auto& c : cmds) {
        c.sub = app.add_subcommand(c.name, c.help);
        c.binding.schema = c.schema;
        bind(*c.sub, c.binding);
    }
    auto* version = app.add_subcommand("version", "Print the version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report_error("parse", "schema", e.what(), kSchema);
        return kSchema;
    }

    if (version->parsed()) {
        std::cout << "sphere2b " << kVersion << "\n";
        return kOk;
    }
    for (auto& c : cmds) {
        if (!c.sub->parsed()) continue;
        if (c.binding.print_schema) {
            std::cout << schema_json(c.schema).dump(2) << "\n";
            return kOk;
        }
        try {
            const json cfg = merge(c.binding);
            if (cfg["jobs"].get<int>() < 1) throw SchemaError("jobs must be >= 1");
            return c.run(cfg);
        } catch (const SchemaError& e) {
            report_error(c.name, "schema", e.what(), kSchema);
            return kSchema;
        } catch (const Error& e) {
            const int code = exit_code_for(e.kind());
            report_error(c.name, error_kind_name(e.kind()), e.what(), code);
            return code;
        } catch (const std::exception& e) {
            report_error(c.name, "internal", e.what(), kFailedVerdict);
            return kFailedVerdict;
        }
    }
    return kSchema;
}
