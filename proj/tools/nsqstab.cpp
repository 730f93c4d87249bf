// nsqstab command-line front end: decides and certifies stability-type
// properties of block-structured non-square real matrices and searches for
// conjecture counterexamples. Exit codes: 0 property holds / feasible,
// 1 refuted / infeasible, 2 unknown (budget), 64+ usage/IO/parse errors.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nsqstab/archive.hpp"
#include "nsqstab/nsqstab.hpp"

namespace {

using namespace nsqstab;

constexpr int kExitHolds = 0;
constexpr int kExitRefuted = 1;
constexpr int kExitUnknown = 2;
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitNoInput = 66;
constexpr int kExitSoftware = 70;

struct GlobalOpts {
    std::string report_path;
    int jobs = 1;
    long long cap = kDefaultEnumerationCap;
    double eig_tol = 1e-9;
    double sym_tol = 1e-9;
    double margin_tol = 1e-8;

    Tolerances tolerances() const { return Tolerances{eig_tol, sym_tol, margin_tol}; }
};

struct LoadedInput {
    ParsedModel model;
    std::string path;
    std::string hash;
};

LoadedInput load_input(const std::string& path) {
    std::string bytes = read_file(path);
    return LoadedInput{parse_matrix_text(bytes), path, hex64(fnv1a64(bytes.data(), bytes.size()))};
}

BlockStructure structure_from_list(const std::vector<int>& p) {
    return BlockStructure(p);
}

void config_common(JsonWriter& w, const GlobalOpts& g, const LoadedInput* in) {
    if (in) {
        w.key("input").value(in->path);
        w.key("input_hash").value(in->hash);
    } else {
        w.key("input").null();
        w.key("input_hash").null();
    }
    w.key("cap").value(static_cast<long long>(g.cap));
    w.key("jobs").value(g.jobs);
    w.key("eig_tol").value(g.eig_tol);
    w.key("sym_tol").value(g.sym_tol);
    w.key("margin_tol").value(g.margin_tol);
}

void begin_report(JsonWriter& w, const char* command) {
    w.begin_object();
    w.key("tool").value("nsqstab");
    w.key("version").value(kVersion);
    w.key("command").value(command);
}

void json_verdict(JsonWriter& w, const FeasibilityVerdict& v) {
    w.begin_object();
    w.key("status").value(to_string(v.status));
    if (v.certificate) {
        w.key("d").value(v.certificate->d);
        w.key("margin").value(v.certificate->margin);
    } else {
        w.key("d").null();
        w.key("margin").null();
    }
    w.key("best_objective").value(v.best_objective);
    w.key("upper_bound").value(v.upper_bound);
    w.key("iterations").value(v.iterations);
    w.end_object();
}

void json_witness(JsonWriter& w, const std::optional<DusWitness>& witness) {
    if (!witness) {
        w.null();
        return;
    }
    w.begin_object();
    w.key("E");
    json_block_entries(w, witness->E.eps);
    w.key("subset").value_indices(witness->subset);
    w.key("spectrum").begin_array();
    for (const auto& z : witness->spectrum) {
        w.begin_array();
        w.value(z.real());
        w.value(z.imag());
        w.end_array();
    }
    w.end_array();
    w.end_object();
}

void json_dus(JsonWriter& w, const DusReport& r) {
    w.begin_object();
    w.key("verdict").value(to_string(r.verdict));
    w.key("worst_margin").value(r.worst_margin);
    w.key("samples_tested").value(r.samples_tested);
    w.key("witness");
    json_witness(w, r.witness);
    w.end_object();
}

void json_falsify(JsonWriter& w, const FalsifyResult& r) {
    w.begin_object();
    w.key("found").value(r.found);
    w.key("margin").value(r.margin);
    w.key("evaluations").value(r.evaluations);
    w.key("witness");
    json_witness(w, r.witness);
    w.end_object();
}

int status_exit(Feasibility s) {
    switch (s) {
        case Feasibility::FEASIBLE: return kExitHolds;
        case Feasibility::INFEASIBLE: return kExitRefuted;
        default: return kExitUnknown;
    }
}

// ---------------------------------------------------------------------------

int cmd_enum(const GlobalOpts& g, const std::optional<LoadedInput>& in,
             const std::vector<int>& p_flag, int k, JsonWriter& w) {
    BlockStructure s = in ? in->model.A.structure : structure_from_list(p_flag);
    std::vector<SquaredSelection> sels =
        k > 0 ? enumerate_reduced_selections(s, k, g.cap) : enumerate_full_selections(s, g.cap);

    begin_report(w, "enum");
    w.key("config").begin_object();
    config_common(w, g, in ? &*in : nullptr);
    w.key("p").begin_array();
    for (int pi : s.sizes()) w.value(pi);
    w.end_array();
    w.key("k").value(k);
    w.end_object();
    w.key("result").begin_object();
    w.key("count").value(static_cast<long long>(sels.size()));
    w.key("selections").begin_array();
    for (const auto& sel : sels) {
        w.begin_object();
        w.key("active").value_indices(sel.active);
        w.key("choice").value_indices(sel.choice);
        w.end_object();
    }
    w.end_array();
    w.end_object();
    w.end_object();

    std::cout << "enum: " << sels.size() << (k > 0 ? " reduced" : " full")
              << " selections for p = (";
    for (std::size_t i = 0; i < s.sizes().size(); ++i)
        std::cout << (i ? "," : "") << s.sizes()[i];
    std::cout << ")\n";
    return kExitHolds;
}

int cmd_vl(const GlobalOpts& g, const LoadedInput& in, const std::string& mode, long budget,
           std::uint64_t seed, JsonWriter& w) {
    SolveOptions opt;
    opt.budget = budget;
    opt.tol = g.tolerances();
    opt.seed = seed;
    auto mats = full_squared_matrices(in.model.A, g.cap);

    begin_report(w, "vl");
    w.key("config").begin_object();
    config_common(w, g, &in);
    w.key("mode").value(mode);
    w.key("budget").value(budget);
    w.key("seed").value(static_cast<std::uint64_t>(seed));
    w.end_object();
    w.key("result").begin_object();
    w.key("squared_matrices").value(static_cast<long long>(mats.size()));

    int exit_code;
    if (mode == "sim") {
        FeasibilityVerdict v = find_common_D(mats, opt);
        w.key("verdict");
        json_verdict(w, v);
        exit_code = status_exit(v.status);
        std::cout << "vl sim: " << to_string(v.status);
        if (v.certificate) std::cout << ", margin " << v.certificate->margin;
        std::cout << "\n";
    } else {
        auto verdicts = find_individual_Ds(mats, opt);
        bool any_inf = false, all_feas = true;
        w.key("verdicts").begin_array();
        for (const auto& v : verdicts) {
            json_verdict(w, v);
            any_inf = any_inf || v.status == Feasibility::INFEASIBLE;
            all_feas = all_feas && v.status == Feasibility::FEASIBLE;
        }
        w.end_array();
        exit_code = all_feas ? kExitHolds : (any_inf ? kExitRefuted : kExitUnknown);
        std::cout << "vl ind: " << (all_feas ? "all FEASIBLE" : any_inf ? "some INFEASIBLE"
                                                                        : "UNKNOWN")
                  << " over " << verdicts.size() << " squared matrices\n";
    }
    w.end_object();
    w.end_object();
    return exit_code;
}

int cmd_dom(const GlobalOpts& g, const LoadedInput& in, long budget, std::uint64_t seed,
            JsonWriter& w) {
    SolveOptions opt;
    opt.budget = budget;
    opt.tol = g.tolerances();
    opt.seed = seed;
    auto mats = full_squared_matrices(in.model.A, g.cap);
    DominanceReport report = find_balance_D(mats, opt);

    begin_report(w, "dom");
    w.key("config").begin_object();
    config_common(w, g, &in);
    w.key("budget").value(budget);
    w.key("seed").value(static_cast<std::uint64_t>(seed));
    w.end_object();
    w.key("result").begin_object();
    w.key("verdict");
    json_verdict(w, report.verdict);
    w.key("per_matrix_margins").begin_array();
    for (double m : report.per_matrix_margins) w.value(m);
    w.end_array();
    w.key("diagonal_positive").value(report.diagonal_positive);
    if (report.verdict.status == Feasibility::FEASIBLE) {
        bool implies = dominance_implies_vl(mats, report);
        w.key("implies_vl").value(implies);
        w.key("vl_margin_at_d").value(vl_margin(mats, report.verdict.certificate->d));
    } else {
        w.key("implies_vl").null();
        w.key("vl_margin_at_d").null();
    }
    w.end_object();
    w.end_object();

    std::cout << "dom: " << to_string(report.verdict.status);
    if (report.verdict.certificate)
        std::cout << ", margin " << report.verdict.certificate->margin;
    std::cout << "\n";
    return status_exit(report.verdict.status);
}

int cmd_dus(const GlobalOpts& g, const LoadedInput& in, int samples, std::uint64_t seed,
            long falsify_budget, JsonWriter& w) {
    const auto& A = in.model.A;
    GainMatrix K = in.model.K ? *in.model.K : GainMatrix::all_ones(A.structure);
    SweepOptions sweep;
    sweep.n_samples = samples;
    sweep.seed = seed;
    sweep.jobs = g.jobs;
    Tolerances tol = g.tolerances();

    DusReport report = sweep_condition(A, K, sweep, tol, g.cap);
    std::optional<FalsifyResult> fals;
    if (falsify_budget > 0) fals = falsify_condition(A, K, falsify_budget, seed, tol, g.cap);

    begin_report(w, "dus");
    w.key("config").begin_object();
    config_common(w, g, &in);
    w.key("samples").value(samples);
    w.key("seed").value(static_cast<std::uint64_t>(seed));
    w.key("falsify_budget").value(falsify_budget);
    w.key("k_source").value(in.model.K ? "file" : "all-ones");
    if (in.model.E) w.key("note").value("E block in input ignored: dus sweeps over E");
    w.end_object();
    w.key("result").begin_object();
    w.key("sweep");
    json_dus(w, report);
    w.key("falsification");
    if (fals)
        json_falsify(w, *fals);
    else
        w.null();
    w.end_object();
    w.end_object();

    bool refuted =
        report.verdict == DusVerdict::REFUTED || (fals && fals->found);
    std::cout << "dus: " << (refuted ? "REFUTED" : "HOLDS-ON-SAMPLES") << ", worst margin "
              << std::min(report.worst_margin, fals ? fals->margin : report.worst_margin)
              << " over " << report.samples_tested << " sampled E\n";
    return refuted ? kExitRefuted : kExitHolds;
}

int cmd_gamma_verify(const GlobalOpts& g, const LoadedInput& in, double tol, JsonWriter& w) {
    const auto& A = in.model.A;
    GainMatrix K = in.model.K ? *in.model.K : GainMatrix::all_ones(A.structure);
    Detuning E = in.model.E ? *in.model.E : Detuning::all_ones(A.structure);

    AggregationCheck check = verify_aggregation_identity(A, E, K, tol, g.cap);

    // ratio law of the induced card-game tensor (only meaningful when every
    // member is in service, i.e. all ratios strictly positive)
    EffectiveGains eg = effective_gains(E, K);
    bool all_positive = true;
    for (const auto& row : eg.ktilde)
        for (double v : row) all_positive = all_positive && v > 0.0;
    std::optional<bool> ratio_ok;
    if (all_positive) {
        std::vector<std::vector<double>> kappa;
        for (const auto& row : eg.ktilde) {
            std::vector<double> r(row.size());
            for (std::size_t j = 0; j < row.size(); ++j) r[j] = row[j] / row[0];
            r[0] = 1.0;
            kappa.push_back(std::move(r));
        }
        ratio_ok = verify_ratio_property(build_gamma(RatioTable(A.structure, kappa), g.cap));
    }

    begin_report(w, "gamma-verify");
    w.key("config").begin_object();
    config_common(w, g, &in);
    w.key("tol").value(tol);
    w.key("k_source").value(in.model.K ? "file" : "all-ones");
    w.key("e_source").value(in.model.E ? "file" : "all-ones");
    w.end_object();
    w.key("result").begin_object();
    w.key("residual").value(check.residual);
    w.key("ok").value(check.ok);
    w.key("d_used").value(check.d_used);
    w.key("column_scaling").value(check.column_scaling);
    if (ratio_ok)
        w.key("ratio_law").value(*ratio_ok);
    else
        w.key("ratio_law").null();
    w.end_object();
    w.end_object();

    bool pass = check.ok && (!ratio_ok || *ratio_ok);
    std::cout << "gamma-verify: residual " << check.residual << (pass ? " (ok)" : " (FAIL)")
              << "\n";
    return pass ? kExitHolds : kExitRefuted;
}

int cmd_theorem2(const GlobalOpts& g, const LoadedInput& in, int samples, std::uint64_t seed,
                 long budget, long falsify_budget, JsonWriter& w) {
    SolveOptions solve;
    solve.budget = budget;
    solve.tol = g.tolerances();
    solve.seed = seed;
    SweepOptions sweep;
    sweep.n_samples = samples;
    sweep.seed = seed;
    sweep.jobs = g.jobs;

    Theorem2Result result =
        theorem2_check(in.model.A, g.tolerances(), solve, sweep, falsify_budget, g.cap);

    begin_report(w, "theorem2");
    w.key("config").begin_object();
    config_common(w, g, &in);
    w.key("samples").value(samples);
    w.key("seed").value(static_cast<std::uint64_t>(seed));
    w.key("budget").value(budget);
    w.key("falsify_budget").value(falsify_budget);
    w.end_object();
    w.key("result").begin_object();
    w.key("hypotheses").begin_array();
    for (const auto& h : result.hypotheses) {
        w.begin_object();
        w.key("normal").value(h.normal);
        w.key("class_f").value(h.class_f);
        w.key("positive_stable").value(h.positive_stable);
        w.end_object();
    }
    w.end_array();
    w.key("hypotheses_hold").value(result.hypotheses_hold);
    if (result.conclusion) {
        w.key("certificate");
        json_verdict(w, result.conclusion->cert);
        w.key("dus");
        if (result.conclusion->dus)
            json_dus(w, *result.conclusion->dus);
        else
            w.null();
        w.key("falsification");
        if (result.conclusion->falsification)
            json_falsify(w, *result.conclusion->falsification);
        else
            w.null();
    } else {
        w.key("certificate").null();
        w.key("dus").null();
        w.key("falsification").null();
    }
    w.end_object();
    w.end_object();

    if (!result.hypotheses_hold) {
        std::cout << "theorem2: hypotheses rejected\n";
        return kExitRefuted;
    }
    const auto& c = *result.conclusion;
    if (c.cert.status == Feasibility::UNKNOWN) {
        std::cout << "theorem2: hypotheses hold, certificate UNKNOWN\n";
        return kExitUnknown;
    }
    bool refuted = c.cert.status == Feasibility::INFEASIBLE ||
                   (c.dus && c.dus->verdict == DusVerdict::REFUTED) ||
                   (c.falsification && c.falsification->found);
    std::cout << "theorem2: hypotheses hold, conclusion "
              << (refuted ? "REFUTED" : "HOLDS-ON-SAMPLES") << "\n";
    return refuted ? kExitRefuted : kExitHolds;
}

int cmd_conjecture(const GlobalOpts& g, const std::vector<int>& p, const std::string& dist,
                   double amplitude, std::uint64_t seed, long budget, long falsify_budget,
                   int k_draws, long solver_budget, int retries, const std::string& archive,
                   JsonWriter& w) {
    InstanceSpec spec;
    spec.structure = structure_from_list(p);
    spec.dist = dist == "classf"      ? EntryDistribution::kClassFShifted
                : dist == "symmetric" ? EntryDistribution::kSymmetric
                                      : EntryDistribution::kUniform;
    spec.amplitude = amplitude;
    spec.seed = seed;
    spec.max_retries = retries;

    SearchOptions opt;
    opt.budget = budget;
    opt.falsify_budget = falsify_budget;
    opt.random_k_draws = k_draws;
    opt.solve.budget = solver_budget;
    opt.solve.tol = g.tolerances();
    opt.tol = g.tolerances();
    opt.cap = g.cap;
    opt.jobs = g.jobs;

    std::ofstream archive_out;
    if (!archive.empty()) {
        archive_out.open(archive, std::ios::app);
        if (!archive_out) throw io_error("cannot open archive '" + archive + "' for append");
        opt.on_candidate = [&archive_out](const CounterexampleCandidate& cand) {
            archive_out << candidate_to_line(cand) << "\n";
            archive_out.flush();
        };
    }

    auto candidates = search_conjecture1(spec, opt);

    begin_report(w, "conjecture");
    w.key("config").begin_object();
    config_common(w, g, nullptr);
    w.key("p").begin_array();
    for (int pi : p) w.value(pi);
    w.end_array();
    w.key("dist").value(dist);
    w.key("amplitude").value(amplitude);
    w.key("seed").value(static_cast<std::uint64_t>(seed));
    w.key("budget").value(budget);
    w.key("falsify_budget").value(falsify_budget);
    w.key("k_draws").value(k_draws);
    w.key("solver_budget").value(solver_budget);
    w.key("retries").value(retries);
    w.key("archive").value(archive);
    w.end_object();
    w.key("result").begin_object();
    w.key("note").value("failure under the sampled K set is evidence, not proof, of "
                        "violation for all K");
    w.key("instances").value(budget);
    w.key("candidates").begin_array();
    for (const auto& cand : candidates) {
        // embed the archive document verbatim
        w.value(candidate_to_line(cand));
    }
    w.end_array();
    w.end_object();
    w.end_object();

    std::cout << "conjecture: " << candidates.size() << " candidate(s) over " << budget
              << " instances\n";
    if (budget <= 0) return kExitUnknown;
    return candidates.empty() ? kExitHolds : kExitRefuted;
}

int cmd_demo(const GlobalOpts& g, const LoadedInput& in, double dt, double T,
             const std::vector<double>& x0_flag, JsonWriter& w) {
    const auto& A = in.model.A;
    GainMatrix K = in.model.K ? *in.model.K : GainMatrix::all_ones(A.structure);
    Detuning E = in.model.E ? *in.model.E : Detuning::all_ones(A.structure);
    const int m = A.structure.group_count();
    Vec x0 = Vec::Ones(m);
    if (!x0_flag.empty()) {
        if (static_cast<int>(x0_flag.size()) != m)
            throw precondition_error("demo: --x0 must list m = " + std::to_string(m) +
                                     " values");
        for (int i = 0; i < m; ++i) x0[i] = x0_flag[static_cast<std::size_t>(i)];
    }

    Trajectory traj = simulate_static_loop(A, E, K, x0, dt, T);
    Mat aek = assemble_AEK(A, E, K);
    double margin = eigenvalues(aek).min_real();

    begin_report(w, "demo");
    w.key("config").begin_object();
    config_common(w, g, &in);
    w.key("dt").value(dt);
    w.key("t").value(T);
    w.key("x0").value(x0);
    w.end_object();
    w.key("result").begin_object();
    w.key("decayed").value(traj.decayed);
    w.key("norm_ratio").value(traj.norm_ratio);
    w.key("steps").value(static_cast<long long>(traj.times.size()) - 1);
    w.key("aek_margin").value(margin);
    // decimated trajectory (at most ~200 points, deterministic stride)
    const std::size_t stride = std::max<std::size_t>(1, traj.times.size() / 200);
    w.key("trajectory").begin_array();
    for (std::size_t i = 0; i < traj.times.size(); i += stride) {
        w.begin_object();
        w.key("t").value(traj.times[i]);
        w.key("e").value(traj.states[i]);
        w.end_object();
    }
    w.end_array();
    w.end_object();
    w.end_object();

    std::cout << "demo: |e(T)|/|e(0)| = " << traj.norm_ratio
              << (traj.decayed ? " (decayed)" : " (no decay)") << ", AEK margin " << margin
              << "\n";
    return traj.decayed ? kExitHolds : kExitRefuted;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"nsqstab: stability certificates for block-structured non-square matrices"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--report", g.report_path, "write a machine-readable report to this path");
    app.add_option("--jobs", g.jobs, "worker parallelism (deterministic reductions)")
        ->check(CLI::PositiveNumber);
    app.add_option("--cap", g.cap, "enumeration cap")->envname("NSQSTAB_CAP");
    app.add_option("--eig-tol", g.eig_tol, "eigenvalue strictness tolerance");
    app.add_option("--sym-tol", g.sym_tol, "symmetry/normality tolerance");
    app.add_option("--margin-tol", g.margin_tol, "feasibility margin threshold");

    std::string file;
    std::vector<int> p_flag;
    int enum_k = 0;
    auto* c_enum = app.add_subcommand("enum", "enumerate squared-matrix selections");
    c_enum->add_option("file", file, "matrix file (structure source)");
    c_enum->add_option("--p", p_flag, "group sizes (alternative to a file)")->delimiter(',');
    c_enum->add_option("--k", enum_k, "active-group count for reduced selections");

    std::string vl_mode = "sim";
    long budget = 5000;
    std::uint64_t seed = 0;
    auto* c_vl = app.add_subcommand("vl", "Volterra-Lyapunov feasibility (sim|ind)");
    c_vl->add_option("file", file, "matrix file")->required();
    c_vl->add_option("--mode", vl_mode, "sim (one common D) or ind (one D per matrix)")
        ->check(CLI::IsMember({"sim", "ind"}));
    c_vl->add_option("--budget", budget, "solver evaluation budget");
    c_vl->add_option("--seed", seed, "solver tie-break seed");

    auto* c_dom = app.add_subcommand("dom", "positive diagonally balanced dominance");
    c_dom->add_option("file", file, "matrix file")->required();
    c_dom->add_option("--budget", budget, "solver evaluation budget");
    c_dom->add_option("--seed", seed, "solver tie-break seed");

    int samples = 100;
    long falsify_budget = 0;
    auto* c_dus = app.add_subcommand("dus", "sweep the eigenvalue condition over detunings");
    c_dus->add_option("file", file, "matrix file (K block used when present)")->required();
    c_dus->add_option("--samples", samples, "number of random detunings");
    c_dus->add_option("--seed", seed, "sampling seed")->required();
    c_dus->add_option("--falsify-budget", falsify_budget, "active falsification budget");

    double gamma_tol = 1e-10;
    auto* c_gamma = app.add_subcommand("gamma-verify", "check the aggregation identity");
    c_gamma->add_option("file", file, "matrix file (K/E blocks used when present)")->required();
    c_gamma->add_option("--tol", gamma_tol, "residual tolerance");

    long t2_falsify = 500;
    auto* c_t2 = app.add_subcommand("theorem2", "normal/class-F hypotheses + pipeline");
    c_t2->add_option("file", file, "matrix file")->required();
    c_t2->add_option("--samples", samples, "number of random detunings");
    c_t2->add_option("--seed", seed, "sampling seed")->required();
    c_t2->add_option("--budget", budget, "solver evaluation budget");
    c_t2->add_option("--falsify-budget", t2_falsify, "active falsification budget");

    std::string dist = "uniform", archive;
    double amplitude = 1.0;
    long cj_budget = 100, cj_falsify = 500, solver_budget = 800;
    int k_draws = 2, retries = 200;
    auto* c_cj = app.add_subcommand("conjecture", "search for conjecture counterexamples");
    c_cj->add_option("--p", p_flag, "group sizes")->delimiter(',')->required();
    c_cj->add_option("--dist", dist, "entry distribution")
        ->check(CLI::IsMember({"uniform", "classf", "symmetric"}));
    c_cj->add_option("--amplitude", amplitude, "entry amplitude");
    c_cj->add_option("--seed", seed, "instance stream seed")->required();
    c_cj->add_option("--budget", cj_budget, "instances to examine")->required();
    c_cj->add_option("--falsify-budget", cj_falsify, "falsification budget per instance");
    c_cj->add_option("--k-draws", k_draws, "random positive K draws besides all-ones");
    c_cj->add_option("--solver-budget", solver_budget, "inner feasibility solver budget");
    c_cj->add_option("--retries", retries, "rejection retries per instance");
    c_cj->add_option("--archive", archive, "append re-verified candidates to this file");

    double dt = 0.01, t_end = 20.0;
    std::vector<double> x0_flag;
    auto* c_demo = app.add_subcommand("demo", "toy static-plant integral-loop simulation");
    c_demo->add_option("file", file, "matrix file (K/E blocks used when present)")->required();
    c_demo->add_option("--dt", dt, "integration step");
    c_demo->add_option("--t", t_end, "final time");
    c_demo->add_option("--x0", x0_flag, "initial error vector")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    JsonWriter report;
    int code = kExitSoftware;
    try {
        if (*c_enum) {
            std::optional<LoadedInput> in;
            if (!file.empty()) in = load_input(file);
            if (!in && p_flag.empty())
                throw precondition_error("enum: provide a matrix file or --p");
            code = cmd_enum(g, in, p_flag, enum_k, report);
        } else if (*c_vl) {
            code = cmd_vl(g, load_input(file), vl_mode, budget, seed, report);
        } else if (*c_dom) {
            code = cmd_dom(g, load_input(file), budget, seed, report);
        } else if (*c_dus) {
            code = cmd_dus(g, load_input(file), samples, seed, falsify_budget, report);
        } else if (*c_gamma) {
            code = cmd_gamma_verify(g, load_input(file), gamma_tol, report);
        } else if (*c_t2) {
            code = cmd_theorem2(g, load_input(file), samples, seed, budget, t2_falsify, report);
        } else if (*c_cj) {
            code = cmd_conjecture(g, p_flag, dist, amplitude, seed, cj_budget, cj_falsify,
                                  k_draws, solver_budget, retries, archive, report);
        } else if (*c_demo) {
            code = cmd_demo(g, load_input(file), dt, t_end, x0_flag, report);
        }
    } catch (const parse_error& e) {
        std::cerr << "nsqstab: parse error: " << e.what() << "\n";
        return kExitData;
    } catch (const io_error& e) {
        std::cerr << "nsqstab: " << e.what() << "\n";
        return kExitNoInput;
    } catch (const cap_error& e) {
        std::cerr << "nsqstab: " << e.what() << "\n";
        return kExitData;
    } catch (const numerical_error& e) {
        std::cerr << "nsqstab: numerical error: " << e.what() << "\n";
        return kExitSoftware;
    } catch (const std::invalid_argument& e) {
        std::cerr << "nsqstab: " << e.what() << "\n";
        return kExitData;
    } catch (const std::out_of_range& e) {
        std::cerr << "nsqstab: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "nsqstab: internal error: " << e.what() << "\n";
        return kExitSoftware;
    }

    if (!g.report_path.empty()) {
        std::ofstream out(g.report_path, std::ios::binary);
        if (!out) {
            std::cerr << "nsqstab: cannot write report to '" << g.report_path << "'\n";
            return kExitNoInput;
        }
        out << report.str() << "\n";
    }
    return code;
}
