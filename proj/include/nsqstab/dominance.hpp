#pragma once

#include <vector>

#include "nsqstab/diag_lyapunov.hpp"

namespace nsqstab {

/// Sentinel for "some diagonal entry of M D + D M^T is nonpositive"; the
/// positive-diagonal clause of balanced dominance can then never hold.
inline constexpr double kDominanceSentinel = -1e100;

namespace detail {

/// Column margins of B = M D + D M^T: min_j (B_jj - sum_{i!=j} |B_ij|).
/// With entrywise_absolute, dominance is measured on |MD| + |DM^T| while the
/// positive-diagonal clause stays on B itself.
inline double balance_margin_one(const Mat& m, const Vec& d, bool entrywise_absolute) {
    Mat s = m * d.asDiagonal();
    Mat b = s + s.transpose();
    for (Eigen::Index j = 0; j < b.cols(); ++j)
        if (!(b(j, j) > 0.0)) return kDominanceSentinel;
    if (!entrywise_absolute) return column_dominance_margin(b);
    Mat babs = s.cwiseAbs() + s.transpose().cwiseAbs();
    return column_dominance_margin(babs);
}

} // namespace detail

/// min over matrices and columns of the balanced-dominance margin of
/// M D + D M^T; sentinel when any diagonal entry is nonpositive.
inline double dominance_margin(const std::vector<Mat>& mats, const Vec& d,
                               bool entrywise_absolute = false) {
    detail::require_common_order(mats, d.size(), "dominance_margin");
    for (Eigen::Index i = 0; i < d.size(); ++i)
        if (!(d[i] > 0.0))
            throw precondition_error("dominance_margin: d must be strictly positive");
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& m : mats)
        worst = std::min(worst, detail::balance_margin_one(m, d, entrywise_absolute));
    return worst;
}

struct DominanceReport {
    FeasibilityVerdict verdict;
    std::vector<double> per_matrix_margins; // at the returned d
    bool diagonal_positive = false;
};

/// Search for a positive diagonal making every M_s D + D M_s^T strictly
/// column diagonally dominant with positive diagonal. The objective (linear
/// diagonal term minus summed absolute values) is concave; the subgradient
/// of -|B_ij| uses sign(B_ij) with 0 treated as +1.
inline DominanceReport find_balance_D(const std::vector<Mat>& mats,
                                      const SolveOptions& opt = {}) {
    if (mats.empty()) throw dimension_error("find_balance_D: empty matrix list");
    const auto order = mats.front().rows();
    detail::require_common_order(mats, order, "find_balance_D");

    DominanceReport report;

    // A nonpositive diagonal entry makes B_jj = 2 d_j m_jj <= 0 for every
    // d > 0, so the margin can never exceed 0: analytic infeasibility.
    bool diag_ok = true;
    for (const auto& m : mats)
        for (Eigen::Index j = 0; j < m.rows(); ++j)
            if (!(m(j, j) > 0.0)) diag_ok = false;
    if (!diag_ok) {
        Vec uniform = Vec::Ones(order);
        report.verdict.status = Feasibility::INFEASIBLE;
        report.verdict.best_objective = dominance_margin(mats, uniform);
        report.verdict.upper_bound = 0.0;
        report.verdict.iterations = 1;
        for (const auto& m : mats)
            report.per_matrix_margins.push_back(detail::balance_margin_one(m, uniform, false));
        report.diagonal_positive = false;
        return report;
    }

    PieceEvaluator pieces = [&mats](const Vec& d) {
        std::vector<PieceValue> out;
        out.reserve(mats.size());
        const auto q = d.size();
        for (const auto& m : mats) {
            double worst = std::numeric_limits<double>::infinity();
            Eigen::Index worst_col = 0;
            for (Eigen::Index j = 0; j < q; ++j) {
                double term = 2.0 * m(j, j) * d[j];
                for (Eigen::Index i = 0; i < q; ++i)
                    if (i != j) term -= std::abs(m(i, j) * d[j] + d[i] * m(j, i));
                if (term < worst) {
                    worst = term;
                    worst_col = j;
                }
            }
            Vec g = Vec::Zero(q);
            const Eigen::Index j = worst_col;
            g[j] = 2.0 * m(j, j);
            for (Eigen::Index i = 0; i < q; ++i) {
                if (i == j) continue;
                double bij = m(i, j) * d[j] + d[i] * m(j, i);
                double sgn = bij >= 0.0 ? 1.0 : -1.0;
                g[j] -= sgn * m(i, j);
                g[i] -= sgn * m(j, i);
            }
            out.push_back({worst, std::move(g)});
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

    report.verdict.best_objective = r.best_value;
    report.verdict.upper_bound = r.upper_bound;
    report.verdict.iterations = r.evaluations;
    if (r.best_value > opt.tol.margin_tol) {
        report.verdict.status = Feasibility::FEASIBLE;
        report.verdict.certificate = DiagonalCertificate{r.best_d, r.best_value};
    } else if (r.upper_bound <= opt.tol.margin_tol) {
        report.verdict.status = Feasibility::INFEASIBLE;
    } else {
        report.verdict.status = Feasibility::UNKNOWN;
    }

    const Vec& at = r.best_d;
    report.diagonal_positive = true;
    for (const auto& m : mats) {
        double pm = detail::balance_margin_one(m, at, false);
        report.per_matrix_margins.push_back(pm);
        if (pm == kDominanceSentinel) report.diagonal_positive = false;
    }
    return report;
}

/// Check the note after Definition 7 on this instance: the balancing D also
/// certifies simultaneous Volterra-Lyapunov stability.
inline bool dominance_implies_vl(const std::vector<Mat>& mats, const DominanceReport& report) {
    if (report.verdict.status != Feasibility::FEASIBLE || !report.verdict.certificate)
        throw precondition_error("dominance_implies_vl: report must be FEASIBLE");
    return vl_margin(mats, report.verdict.certificate->d) > 0.0;
}

} // namespace nsqstab
