#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nsqstab/dus.hpp"
#include "nsqstab/hash.hpp"
#include "nsqstab/parallel.hpp"

namespace nsqstab {

enum class EntryDistribution { kUniform, kClassFShifted, kSymmetric };

inline const char* to_string(EntryDistribution d) {
    switch (d) {
        case EntryDistribution::kUniform: return "uniform";
        case EntryDistribution::kClassFShifted: return "classf";
        default: return "symmetric";
    }
}

/// Seeded generator description for random plant matrices. With rejection
/// enabled, instances are resampled until every full squared matrix is
/// individually Volterra-Lyapunov feasible.
struct InstanceSpec {
    BlockStructure structure;
    EntryDistribution dist = EntryDistribution::kUniform;
    double amplitude = 1.0;
    std::uint64_t seed = 0;
    bool reject_on_individual_vl = true;
    int max_retries = 200;
};

namespace detail {

inline Mat draw_plant_data(const BlockStructure& s, EntryDistribution dist, double a,
                           KeyedRng& rng) {
    const int m = s.group_count();
    const int n = s.total_cols();
    Mat data(m, n);
    switch (dist) {
        case EntryDistribution::kUniform:
            for (Eigen::Index i = 0; i < m; ++i)
                for (Eigen::Index j = 0; j < n; ++j) data(i, j) = rng.uniform(-a, a);
            break;
        case EntryDistribution::kClassFShifted:
            // columns with nonnegative off-channel entries and a diagonal
            // entry exceeding their sum: squared matrices are class F and
            // strictly column dominant with positive diagonal
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < s.group_size(i); ++j) {
                    int c = s.col_index(i, j);
                    double off = 0.0;
                    for (int r = 0; r < m; ++r) {
                        if (r == i) continue;
                        data(r, c) = rng.uniform(0.0, a);
                        off += data(r, c);
                    }
                    data(i, c) = off + rng.uniform(0.1 * a, a);
                }
            break;
        case EntryDistribution::kSymmetric: {
            // columns drawn from a positive definite base, scaled per member
            // and mildly perturbed
            Mat r(m, m);
            for (Eigen::Index i = 0; i < m; ++i)
                for (Eigen::Index j = 0; j < m; ++j) r(i, j) = rng.uniform(-a, a);
            Mat base = (r * r.transpose()) / static_cast<double>(m) +
                       0.2 * a * a * Mat::Identity(m, m);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < s.group_size(i); ++j) {
                    double scale = rng.log_uniform(0.5, 2.0);
                    int c = s.col_index(i, j);
                    for (int row = 0; row < m; ++row)
                        data(row, c) =
                            scale * base(row, i) + 0.05 * a * rng.uniform(-1.0, 1.0);
                }
            break;
        }
    }
    return data;
}

/// Cheap necessary condition for individual VL feasibility of every full
/// squared matrix: each paired diagonal entry must be positive.
inline bool positive_paired_diagonals(const PlantMatrix& A) {
    for (int i = 0; i < A.structure.group_count(); ++i)
        for (int j = 0; j < A.structure.group_size(i); ++j)
            if (!(A.data(i, A.structure.col_index(i, j)) > 0.0)) return false;
    return true;
}

struct GeneratedInstance {
    PlantMatrix A;
    std::vector<DiagonalCertificate> individual_certs; // filled when rejection ran
};

inline std::optional<GeneratedInstance> try_random_instance(const InstanceSpec& spec,
                                                            long instance_index,
                                                            const SolveOptions& solve,
                                                            long long cap) {
    for (int attempt = 0; attempt < std::max(1, spec.max_retries); ++attempt) {
        KeyedRng rng(spec.seed, {0xA11CEu, static_cast<std::uint64_t>(instance_index),
                                 static_cast<std::uint64_t>(attempt)});
        PlantMatrix A(spec.structure,
                      draw_plant_data(spec.structure, spec.dist, spec.amplitude, rng));
        if (!spec.reject_on_individual_vl) return GeneratedInstance{std::move(A), {}};
        if (!positive_paired_diagonals(A)) continue;
        auto verdicts = find_individual_Ds(full_squared_matrices(A, cap), solve);
        bool all_feasible = true;
        std::vector<DiagonalCertificate> certs;
        for (const auto& v : verdicts) {
            if (v.status != Feasibility::FEASIBLE) {
                all_feasible = false;
                break;
            }
            certs.push_back(*v.certificate);
        }
        if (all_feasible) return GeneratedInstance{std::move(A), std::move(certs)};
    }
    return std::nullopt;
}

} // namespace detail

/// Deterministic random plant matrix for (spec, instance_index); throws on
/// rejection-retry exhaustion.
inline PlantMatrix random_instance(const InstanceSpec& spec, long instance_index = 0,
                                   const SolveOptions& solve = {},
                                   long long cap = kDefaultEnumerationCap) {
    auto inst = detail::try_random_instance(spec, instance_index, solve, cap);
    if (!inst)
        throw numerical_error("random_instance: rejection sampling exhausted after " +
                              std::to_string(spec.max_retries) + " retries (instance " +
                              std::to_string(instance_index) + ")");
    return std::move(inst->A);
}

/// A fully re-verified conjecture violation: individually VL-feasible plant
/// whose condition margin goes below the violation threshold at witness_E
/// for the recorded K.
struct CounterexampleCandidate {
    PlantMatrix A;
    std::vector<DiagonalCertificate> individual_certs;
    GainMatrix witness_K;
    Detuning witness_E;
    std::vector<int> witness_subset;
    double violation_margin = 0.0;
    std::uint64_t matrix_hash = 0;
};

struct SearchOptions {
    long budget = 100;        // instances examined
    long falsify_budget = 500; // split across the tested K draws
    int random_k_draws = 2;    // sampled positive K besides the all-ones K
    SolveOptions solve;
    Tolerances tol;
    long long cap = kDefaultEnumerationCap;
    int jobs = 1;
    /// called on discovery, in instance order (crash-safe persistence hook)
    std::function<void(const CounterexampleCandidate&)> on_candidate;
};

/// Re-verify a candidate from its matrix alone: fresh individual solves and
/// a fresh witness evaluation (used before emitting and by consumers of the
/// archive).
inline bool reverify_candidate(const CounterexampleCandidate& cand,
                               const SolveOptions& solve = {}, const Tolerances& tol = {},
                               long long cap = kDefaultEnumerationCap) {
    auto mats = full_squared_matrices(cand.A, cap);
    if (mats.size() != cand.individual_certs.size()) return false;
    for (std::size_t i = 0; i < mats.size(); ++i) {
        double margin = vl_margin({mats[i]}, cand.individual_certs[i].d);
        if (!(margin > tol.margin_tol)) return false;
        if (std::abs(margin - cand.individual_certs[i].margin) > tol.margin_tol) return false;
    }
    auto verdicts = find_individual_Ds(mats, solve);
    for (const auto& v : verdicts)
        if (v.status != Feasibility::FEASIBLE) return false;
    ConditionReport at = check_condition_at(cand.A, cand.witness_K, cand.witness_E, cap);
    return at.margin <= cand.violation_margin + tol.eig_tol;
}

/// Search for counterexamples to "individual VL stability implies the DUS
/// condition". Each instance with all-individual certificates is attacked
/// with the all-ones K plus sampled positive K; the falsification budget is
/// split across them. An empty result is the expected outcome. Candidates
/// are emitted only after they re-verify from scratch, and only below the
/// conservative threshold -10 * eig_tol.
inline std::vector<CounterexampleCandidate> search_conjecture1(const InstanceSpec& spec,
                                                               const SearchOptions& opt) {
    const int k_variants = 1 + std::max(0, opt.random_k_draws);
    const long per_k_budget = opt.falsify_budget / k_variants;

    auto examine = [&](long idx) -> std::optional<CounterexampleCandidate> {
        auto inst = detail::try_random_instance(spec, idx, opt.solve, opt.cap);
        if (!inst) return std::nullopt; // rejection exhausted; instance skipped
        if (!spec.reject_on_individual_vl) {
            auto verdicts = find_individual_Ds(full_squared_matrices(inst->A, opt.cap),
                                               opt.solve);
            for (const auto& v : verdicts)
                if (v.status != Feasibility::FEASIBLE) return std::nullopt;
            inst->individual_certs.clear();
            for (const auto& v : verdicts) inst->individual_certs.push_back(*v.certificate);
        }

        for (int kv = 0; kv < k_variants; ++kv) {
            GainMatrix K = GainMatrix::all_ones(spec.structure);
            if (kv > 0) {
                KeyedRng rng(spec.seed, {0x5EEDFULL, static_cast<std::uint64_t>(idx),
                                         static_cast<std::uint64_t>(kv)});
                for (auto& row : K.k)
                    for (double& v : row) v = rng.log_uniform(0.1, 10.0);
            }
            FalsifyResult fr = falsify_condition(inst->A, K, per_k_budget,
                                                 spec.seed ^ static_cast<std::uint64_t>(idx),
                                                 opt.tol, opt.cap);
            if (!fr.found || !(fr.margin < -10.0 * opt.tol.eig_tol)) continue;

            CounterexampleCandidate cand;
            cand.A = inst->A;
            cand.individual_certs = inst->individual_certs;
            cand.witness_K = K;
            cand.witness_E = fr.witness->E;
            cand.witness_subset = fr.witness->subset;
            cand.violation_margin = fr.margin;
            cand.matrix_hash = plant_hash(inst->A);
            if (reverify_candidate(cand, opt.solve, opt.tol, opt.cap)) return cand;
        }
        return std::nullopt;
    };

    // chunked so the single writer persists discoveries promptly, in
    // instance order, independent of the worker count
    std::vector<CounterexampleCandidate> out;
    std::set<std::uint64_t> seen;
    const long chunk = std::max<long>(1, 8L * std::max(1, opt.jobs));
    for (long base = 0; base < opt.budget; base += chunk) {
        const long count = std::min(chunk, opt.budget - base);
        std::vector<std::optional<CounterexampleCandidate>> slots(
            static_cast<std::size_t>(count));
        parallel_for(count, opt.jobs,
                     [&](long i) { slots[static_cast<std::size_t>(i)] = examine(base + i); });
        for (auto& slot : slots) {
            if (!slot) continue;
            if (!seen.insert(slot->matrix_hash).second) continue;
            if (opt.on_candidate) opt.on_candidate(*slot);
            out.push_back(std::move(*slot));
        }
    }
    return out;
}

struct SpecialCaseReport {
    bool individually_feasible = false;
    DusReport dus;
    FalsifyResult falsification;
    bool claim_holds = false; // empirically, on this instance
};

/// The note after the conjecture: redundancy confined to one channel. Checks
/// individual VL feasibility, then exhaustive corners plus sampling plus
/// active falsification with the all-ones K.
inline SpecialCaseReport special_case_one_redundant_channel(
    const PlantMatrix& A, const Tolerances& tol = {}, const SolveOptions& solve = {},
    const SweepOptions& sweep = {}, long falsify_budget = 500,
    long long cap = kDefaultEnumerationCap) {
    int redundant = 0;
    for (int i = 0; i < A.structure.group_count(); ++i)
        if (A.structure.group_size(i) > 1) ++redundant;
    if (redundant != 1)
        throw precondition_error(
            "special_case_one_redundant_channel: exactly one group must have p_i > 1 (got " +
            std::to_string(redundant) + ")");

    SpecialCaseReport report;
    auto verdicts = find_individual_Ds(full_squared_matrices(A, cap), solve);
    report.individually_feasible = true;
    for (const auto& v : verdicts)
        if (v.status != Feasibility::FEASIBLE) report.individually_feasible = false;

    GainMatrix K = GainMatrix::all_ones(A.structure);
    report.dus = sweep_condition(A, K, sweep, tol, cap);
    report.falsification = falsify_condition(A, K, falsify_budget, sweep.seed, tol, cap);
    report.claim_holds = report.individually_feasible &&
                         report.dus.verdict == DusVerdict::HOLDS_ON_SAMPLES &&
                         !report.falsification.found;
    return report;
}

} // namespace nsqstab
