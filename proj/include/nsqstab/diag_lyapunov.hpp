#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nsqstab/block.hpp"
#include "nsqstab/concave_maxmin.hpp"
#include "nsqstab/linalg.hpp"
#include "nsqstab/rng.hpp"

namespace nsqstab {

/// Positive diagonal D (as its diagonal d, normalized to sum d_i = order)
/// together with the margin it achieves.
struct DiagonalCertificate {
    Vec d;
    double margin = 0.0;
};

enum class Feasibility { FEASIBLE, INFEASIBLE, UNKNOWN };

inline const char* to_string(Feasibility f) {
    switch (f) {
        case Feasibility::FEASIBLE: return "FEASIBLE";
        case Feasibility::INFEASIBLE: return "INFEASIBLE";
        default: return "UNKNOWN";
    }
}

/// Outcome of a diagonal-certificate search. FEASIBLE carries a certificate
/// with margin > margin_tol; INFEASIBLE means the certified upper bound on
/// the achievable margin fell to margin_tol or below; UNKNOWN is an
/// exhausted budget with neither.
struct FeasibilityVerdict {
    Feasibility status = Feasibility::UNKNOWN;
    std::optional<DiagonalCertificate> certificate;
    double best_objective = 0.0;
    double upper_bound = 0.0;
    long iterations = 0;
};

struct SolveOptions {
    long budget = 5000;
    Tolerances tol;
    double d_min = 1e-9;
    double gap_tol = 1e-9;
    std::uint64_t seed = 0;
};

namespace detail {

inline void require_common_order(const std::vector<Mat>& mats, Eigen::Index order,
                                 const char* who) {
    if (mats.empty()) throw dimension_error(std::string(who) + ": empty matrix list");
    for (const auto& m : mats) {
        require_square(m, who);
        if (m.rows() != order)
            throw dimension_error(std::string(who) + ": matrices must share one order");
    }
}

inline Mat vl_form(const Mat& m, const Vec& d) {
    Mat s = m * d.asDiagonal();
    return s + s.transpose(); // exactly symmetric: entries are the same sums
}

} // namespace detail

/// min over the list of the smallest eigenvalue of M D + D M^T.
inline double vl_margin(const std::vector<Mat>& mats, const Vec& d) {
    detail::require_common_order(mats, d.size(), "vl_margin");
    for (Eigen::Index i = 0; i < d.size(); ++i)
        if (!(d[i] > 0.0)) throw precondition_error("vl_margin: d must be strictly positive");
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& m : mats) {
        Eigen::SelfAdjointEigenSolver<Mat> es(detail::vl_form(m, d), Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) throw numerical_error("vl_margin: eigensolver failed");
        worst = std::min(worst, es.eigenvalues()(0));
    }
    return worst;
}

/// Search for one positive diagonal D certifying M_s D + D M_s^T > 0 for
/// every matrix in the list. Maximizes the concave margin over the simplex;
/// supergradient at the active matrix with eigenvector v is 2 v_i (M^T v)_i.
inline FeasibilityVerdict find_common_D(const std::vector<Mat>& mats,
                                        const SolveOptions& opt = {}) {
    if (mats.empty()) throw dimension_error("find_common_D: empty matrix list");
    const auto order = mats.front().rows();
    detail::require_common_order(mats, order, "find_common_D");

    PieceEvaluator pieces = [&mats](const Vec& d) {
        std::vector<PieceValue> out;
        out.reserve(mats.size());
        for (const auto& m : mats) {
            Eigen::SelfAdjointEigenSolver<Mat> es(detail::vl_form(m, d));
            if (es.info() != Eigen::Success)
                throw numerical_error("find_common_D: eigensolver failed");
            Vec v = es.eigenvectors().col(0);
            Vec mtv = m.transpose() * v;
            out.push_back({es.eigenvalues()(0), 2.0 * v.cwiseProduct(mtv)});
        }
        return out;
    };

    MaxMinOptions mopt;
    mopt.budget = std::max<long>(1, opt.budget);
    mopt.d_min = opt.d_min;
    mopt.gap_tol = opt.gap_tol;
    mopt.stop_below = opt.tol.margin_tol;
    mopt.seed = opt.seed;
    MaxMinResult r = maximize_concave_on_simplex(static_cast<int>(order), pieces, mopt);

    FeasibilityVerdict verdict;
    verdict.best_objective = r.best_value;
    verdict.upper_bound = r.upper_bound;
    verdict.iterations = r.evaluations;
    if (r.best_value > opt.tol.margin_tol) {
        verdict.status = Feasibility::FEASIBLE;
        verdict.certificate = DiagonalCertificate{r.best_d, r.best_value};
    } else if (r.upper_bound <= opt.tol.margin_tol) {
        verdict.status = Feasibility::INFEASIBLE;
    } else {
        verdict.status = Feasibility::UNKNOWN;
    }
    return verdict;
}

/// Independent per-matrix searches (one D_i each).
inline std::vector<FeasibilityVerdict> find_individual_Ds(const std::vector<Mat>& mats,
                                                          const SolveOptions& opt = {}) {
    std::vector<FeasibilityVerdict> out;
    out.reserve(mats.size());
    for (const auto& m : mats) out.push_back(find_common_D({m}, opt));
    return out;
}

/// Sampling check of Lemma 2's conclusion: for random positive diagonals D
/// and every nonempty principal subset, Re sigma([MD]_idx) > 0. A refutation
/// is certified by its witness; a pass is only sampling evidence.
struct DStabilityReport {
    bool holds = true;
    long samples = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    Vec worst_d;
    std::vector<int> worst_subset;
};

inline DStabilityReport sampled_d_stability(const Mat& m, int n_samples, std::uint64_t seed,
                                            const Tolerances& tol = {},
                                            long long cap = kDefaultEnumerationCap) {
    require_square(m, "sampled_d_stability");
    if (n_samples < 1) throw precondition_error("sampled_d_stability: n_samples must be >= 1");
    const int q = static_cast<int>(m.rows());
    if (q > 62 || ((1LL << q) - 1) > cap)
        throw cap_error("sampled_d_stability: subset count exceeds cap");

    DStabilityReport report;
    for (int s = 0; s < n_samples; ++s) {
        KeyedRng rng(seed, {0xD5u, static_cast<std::uint64_t>(s)});
        Vec d(q);
        for (int i = 0; i < q; ++i) d[i] = rng.log_uniform(1e-3, 1e3);
        Mat md = m * d.asDiagonal();
        for (long long mask = 1; mask < (1LL << q); ++mask) {
            std::vector<int> idx;
            for (int i = 0; i < q; ++i)
                if (mask & (1LL << i)) idx.push_back(i);
            double margin = eigenvalues(principal_submatrix(md, idx)).min_real();
            if (margin < report.worst_margin) {
                report.worst_margin = margin;
                report.worst_d = d;
                report.worst_subset = idx;
            }
        }
        ++report.samples;
    }
    report.holds = report.worst_margin > tol.eig_tol;
    return report;
}

/// Recompute the margin of a claimed certificate, independently of the
/// solver path that produced it.
inline bool verify_certificate(const std::vector<Mat>& mats, const DiagonalCertificate& cert,
                               const Tolerances& tol = {}) {
    double recomputed = vl_margin(mats, cert.d);
    return std::abs(recomputed - cert.margin) <= tol.margin_tol;
}

} // namespace nsqstab
