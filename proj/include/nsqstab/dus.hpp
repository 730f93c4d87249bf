#pragma once

#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include "nsqstab/block.hpp"
#include "nsqstab/diag_lyapunov.hpp"
#include "nsqstab/linalg.hpp"
#include "nsqstab/parallel.hpp"
#include "nsqstab/rng.hpp"

namespace nsqstab {

struct SubsystemMargin {
    std::vector<int> subset; // 0-based group indices, increasing
    double min_real;
};

struct ConditionReport {
    double margin = std::numeric_limits<double>::infinity();
    std::vector<SubsystemMargin> per_subset;
    std::vector<int> in_service;
};

/// Evaluate the eigenvalue condition at one detuning: for every nonempty
/// subset of in-service groups, the minimum eigenvalue real part of the
/// corresponding principal subsystem of AEK. Out-of-service groups are
/// excluded (their loops are removed, not violated); with no group in
/// service the margin is +inf by convention.
inline ConditionReport check_condition_at(const PlantMatrix& A, const GainMatrix& K,
                                          const Detuning& E,
                                          long long cap = kDefaultEnumerationCap) {
    if (!(A.structure == K.structure) || !(A.structure == E.structure))
        throw dimension_error("check_condition_at: block structures do not match");
    ConditionReport report;
    EffectiveGains eg = effective_gains(E, K);
    report.in_service = eg.in_service_indices();
    const int k = static_cast<int>(report.in_service.size());
    if (k == 0) return report;
    if (k > 62 || ((1LL << k) - 1) > cap)
        throw cap_error("check_condition_at: subsystem count exceeds cap");

    Mat aek = assemble_AEK(A, E, K);
    for (long long mask = 1; mask < (1LL << k); ++mask) {
        std::vector<int> subset;
        for (int t = 0; t < k; ++t)
            if (mask & (1LL << t)) subset.push_back(report.in_service[static_cast<std::size_t>(t)]);
        double mr = eigenvalues(principal_submatrix(aek, subset)).min_real();
        report.per_subset.push_back({std::move(subset), mr});
        report.margin = std::min(report.margin, mr);
    }
    return report;
}

enum class DusVerdict { HOLDS_ON_SAMPLES, REFUTED };

inline const char* to_string(DusVerdict v) {
    return v == DusVerdict::REFUTED ? "REFUTED" : "HOLDS-ON-SAMPLES";
}

struct DusWitness {
    Detuning E;
    std::vector<int> subset;
    std::vector<std::complex<double>> spectrum;
};

struct DusReport {
    DusVerdict verdict = DusVerdict::HOLDS_ON_SAMPLES;
    double worst_margin = std::numeric_limits<double>::infinity();
    std::optional<DusWitness> witness;
    long samples_tested = 0;
};

struct SweepOptions {
    int n_samples = 100;
    std::uint64_t seed = 0;
    double zero_prob = 0.2; // per-entry probability of an exact zero
    double eps_lo = 1e-3;
    double eps_hi = 1e3;
    int jobs = 1;
};

namespace detail {

inline Detuning sampled_detuning(const BlockStructure& s, std::uint64_t seed, long sample,
                                 const SweepOptions& opt) {
    KeyedRng rng(seed, {0xE5u, static_cast<std::uint64_t>(sample)});
    auto entries = uniform_block_entries(s, 0.0);
    for (auto& row : entries)
        for (double& v : row) {
            double u = rng.next_unit();
            v = (u < opt.zero_prob) ? 0.0 : rng.log_uniform(opt.eps_lo, opt.eps_hi);
        }
    return Detuning(s, std::move(entries));
}

inline DusWitness make_witness(const PlantMatrix& A, const GainMatrix& K, const Detuning& E,
                               const std::vector<int>& subset) {
    Mat sub = principal_submatrix(assemble_AEK(A, E, K), subset);
    return DusWitness{E, subset, eigenvalues(sub).eigenvalues};
}

} // namespace detail

/// Sample the condition over detunings: the deterministic corners first
/// (all-ones, then one one-hot E per full selection, i.e. the squared-matrix
/// corners), then n_samples random mixtures (each entry zero with
/// probability zero_prob, otherwise log-uniform). Deterministic for a fixed
/// seed; the reduction is by sample index, independent of the worker count.
inline DusReport sweep_condition(const PlantMatrix& A, const GainMatrix& K,
                                 const SweepOptions& opt = {}, const Tolerances& tol = {},
                                 long long cap = kDefaultEnumerationCap) {
    std::vector<Detuning> detunings;
    detunings.push_back(Detuning::all_ones(A.structure));
    for (const auto& sel : enumerate_full_selections(A.structure, cap)) {
        auto entries = detail::uniform_block_entries(A.structure, 0.0);
        for (std::size_t t = 0; t < sel.active.size(); ++t)
            entries[static_cast<std::size_t>(sel.active[t])]
                   [static_cast<std::size_t>(sel.choice[t])] = 1.0;
        detunings.emplace_back(A.structure, std::move(entries));
    }
    for (int s = 0; s < opt.n_samples; ++s)
        detunings.push_back(detail::sampled_detuning(A.structure, opt.seed, s, opt));

    struct Slot {
        double margin;
        std::vector<int> subset;
    };
    std::vector<Slot> slots(detunings.size());
    parallel_for(static_cast<long>(detunings.size()), opt.jobs, [&](long i) {
        ConditionReport r = check_condition_at(A, K, detunings[static_cast<std::size_t>(i)], cap);
        Slot slot{r.margin, {}};
        for (const auto& ps : r.per_subset)
            if (ps.min_real == r.margin) {
                slot.subset = ps.subset;
                break;
            }
        slots[static_cast<std::size_t>(i)] = std::move(slot);
    });

    DusReport report;
    report.samples_tested = static_cast<long>(detunings.size());
    long worst_index = -1;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].margin < report.worst_margin) {
            report.worst_margin = slots[i].margin;
            worst_index = static_cast<long>(i);
        }
    }
    if (worst_index >= 0 && !slots[static_cast<std::size_t>(worst_index)].subset.empty())
        report.witness = detail::make_witness(
            A, K, detunings[static_cast<std::size_t>(worst_index)],
            slots[static_cast<std::size_t>(worst_index)].subset);
    report.verdict = report.worst_margin < -tol.eig_tol ? DusVerdict::REFUTED
                                                        : DusVerdict::HOLDS_ON_SAMPLES;
    return report;
}

struct FalsifyResult {
    bool found = false;
    double margin = std::numeric_limits<double>::infinity();
    std::optional<DusWitness> witness;
    long evaluations = 0;
};

/// Search for a detuning violating the condition: random restarts followed
/// by coordinate descent on log-eps with boundary moves (switching members
/// out of service and back). The returned witness is re-verified before
/// being reported; margin >= -eig_tol means no violation was found within
/// the budget.
inline FalsifyResult falsify_condition(const PlantMatrix& A, const GainMatrix& K, long budget,
                                       std::uint64_t seed, const Tolerances& tol = {},
                                       long long cap = kDefaultEnumerationCap) {
    FalsifyResult res;
    if (budget <= 0) return res;

    double best_margin = std::numeric_limits<double>::infinity();
    std::optional<Detuning> best_e;
    std::vector<int> best_subset;

    auto evaluate = [&](const Detuning& e) -> double {
        ConditionReport r = check_condition_at(A, K, e, cap);
        ++res.evaluations;
        if (r.margin < best_margin) {
            best_margin = r.margin;
            best_e = e;
            best_subset.clear();
            for (const auto& ps : r.per_subset)
                if (ps.min_real == r.margin) {
                    best_subset = ps.subset;
                    break;
                }
        }
        return r.margin;
    };

    SweepOptions mix; // reuse the sweep's entry mixture for restart points
    int restart = 0;
    while (res.evaluations < budget) {
        Detuning e = restart == 0
                         ? Detuning::all_ones(A.structure)
                         : detail::sampled_detuning(A.structure, seed,
                                                    0x7A000000L + restart, mix);
        ++restart;
        double current = evaluate(e);

        bool improved = true;
        while (improved && res.evaluations < budget) {
            improved = false;
            for (int i = 0; i < A.structure.group_count() && res.evaluations < budget; ++i) {
                for (int j = 0; j < A.structure.group_size(i) && res.evaluations < budget;
                     ++j) {
                    double orig = e(i, j);
                    std::vector<double> candidates;
                    if (orig > 0.0) {
                        candidates = {orig * 4.0, orig * 0.25, 0.0};
                    } else {
                        candidates = {mix.eps_lo, 1.0};
                    }
                    for (double cand : candidates) {
                        if (res.evaluations >= budget) break;
                        Detuning trial = e;
                        trial.eps[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                            cand;
                        double margin = evaluate(trial);
                        if (margin < current - 1e-15) {
                            current = margin;
                            e = std::move(trial);
                            improved = true;
                            break;
                        }
                    }
                }
            }
        }
    }

    res.margin = best_margin;
    if (best_e && best_margin < -tol.eig_tol && !best_subset.empty()) {
        // re-verify the witness from scratch before reporting it
        ConditionReport check = check_condition_at(A, K, *best_e, cap);
        if (check.margin < -tol.eig_tol) {
            res.found = true;
            res.margin = check.margin;
            res.witness = detail::make_witness(A, K, *best_e, best_subset);
        }
    }
    return res;
}

struct Lemma4Result {
    FeasibilityVerdict cert;
    std::optional<DusReport> dus;
    std::optional<FalsifyResult> falsification;
};

/// End-to-end Lemma 4: find a common D over all full squared matrices; on
/// success take the canonical all-ones K and both sweep and actively try to
/// falsify the condition. A FEASIBLE certificate must yield
/// HOLDS-ON-SAMPLES and an empty falsification.
inline Lemma4Result lemma4_pipeline(const PlantMatrix& A, const SolveOptions& solve = {},
                                    const SweepOptions& sweep = {}, long falsify_budget = 500,
                                    const Tolerances& tol = {},
                                    long long cap = kDefaultEnumerationCap) {
    Lemma4Result result;
    result.cert = find_common_D(full_squared_matrices(A, cap), solve);
    if (result.cert.status == Feasibility::FEASIBLE) {
        GainMatrix K = GainMatrix::all_ones(A.structure);
        result.dus = sweep_condition(A, K, sweep, tol, cap);
        result.falsification = falsify_condition(A, K, falsify_budget, sweep.seed, tol, cap);
    }
    return result;
}

struct SquaredHypotheses {
    bool normal = false;
    bool class_f = false;
    bool positive_stable = false;
    bool all() const { return normal && class_f && positive_stable; }
};

struct Theorem2Result {
    std::vector<SquaredHypotheses> hypotheses;
    bool hypotheses_hold = false;
    std::optional<Lemma4Result> conclusion;
};

/// Theorem 2 pipeline: every full squared matrix must be normal, in class F,
/// and positive stable; then the Lemma 4 machinery must report no violation.
inline Theorem2Result theorem2_check(const PlantMatrix& A, const Tolerances& tol = {},
                                     const SolveOptions& solve = {},
                                     const SweepOptions& sweep = {}, long falsify_budget = 500,
                                     long long cap = kDefaultEnumerationCap) {
    Theorem2Result result;
    result.hypotheses_hold = true;
    for (const auto& m : full_squared_matrices(A, cap)) {
        SquaredHypotheses h{is_normal(m, tol), in_class_F(m, tol), positive_stable(m, tol)};
        result.hypotheses_hold = result.hypotheses_hold && h.all();
        result.hypotheses.push_back(h);
    }
    if (result.hypotheses_hold)
        result.conclusion = lemma4_pipeline(A, solve, sweep, falsify_budget, tol, cap);
    return result;
}

struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;
    bool decayed = false;
    double norm_ratio = 0.0; // |e(T)| / |e(0)|
};

/// Toy static-plant integral loop: integrate e' = -(AEK) e with the classical
/// 4th-order one-step method. Decay verdict: |e(T)| < 1e-2 |e(0)|; a norm
/// blowup past 1e12 aborts with a numerical error.
inline Trajectory simulate_static_loop(const PlantMatrix& A, const Detuning& E,
                                       const GainMatrix& K, const Vec& x0, double dt,
                                       double T) {
    if (!(dt > 0.0) || !(T > dt))
        throw precondition_error("simulate_static_loop: need dt > 0 and T > dt");
    const int m = A.structure.group_count();
    if (x0.size() != m)
        throw dimension_error("simulate_static_loop: x0 must have length m");
    const long steps = static_cast<long>(std::ceil(T / dt));
    if (steps > 10'000'000)
        throw precondition_error("simulate_static_loop: step count too large");

    Mat M = assemble_AEK(A, E, K);
    auto deriv = [&M](const Vec& e) -> Vec { return -(M * e); };

    // integration is exact per step; recording is decimated on long runs
    const long stride = std::max<long>(1, (steps + 65535) / 65536);

    Trajectory traj;
    traj.times.reserve(static_cast<std::size_t>(steps / stride) + 2);
    traj.states.reserve(static_cast<std::size_t>(steps / stride) + 2);
    Vec e = x0;
    double t = 0.0;
    const double e0_norm = e.norm();
    const double blowup = 1e12 * std::max(1.0, e0_norm);
    traj.times.push_back(t);
    traj.states.push_back(e);
    for (long s = 0; s < steps; ++s) {
        double h = std::min(dt, T - t);
        Vec k1 = deriv(e);
        Vec k2 = deriv(e + 0.5 * h * k1);
        Vec k3 = deriv(e + 0.5 * h * k2);
        Vec k4 = deriv(e + h * k3);
        e = e + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
        if (!e.allFinite() || e.norm() > blowup)
            throw numerical_error("simulate_static_loop: norm blowup; reduce dt");
        if ((s + 1) % stride == 0 || s + 1 == steps) {
            traj.times.push_back(t);
            traj.states.push_back(e);
        }
    }
    traj.norm_ratio = e0_norm > 0.0 ? e.norm() / e0_norm : 0.0;
    traj.decayed = e.norm() < 1e-2 * e0_norm;
    return traj;
}

} // namespace nsqstab
