#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "nsqstab/matrix.hpp"

namespace nsqstab {

namespace detail {

/// Diagonal similarity scaling with radix-2 powers (the classic balancing
/// pass). Exact in floating point, so eigenvalues are unchanged while the
/// sensitivity of badly scaled matrices drops sharply.
inline void balance_in_place(Mat& a) {
    const Eigen::Index n = a.rows();
    const double radix = 2.0, sqrdx = radix * radix;
    bool done = false;
    int guard = 0;
    while (!done && guard++ < 200) {
        done = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            double c = 0.0, r = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(a(j, i));
                r += std::abs(a(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double g = r / radix, f = 1.0;
            const double s = c + r;
            while (c < g) {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while (c > g) {
                f /= radix;
                c /= sqrdx;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                a.row(i) /= f;
                a.col(i) *= f;
            }
        }
    }
}

} // namespace detail

/// All eigenvalues of a real square matrix. Deterministic for fixed input
/// bits; the result is sorted by (real, imag).
inline Spectrum eigenvalues(const Mat& m) {
    require_square(m, "eigenvalues");
    require_finite(m, "eigenvalues");
    Mat balanced = m;
    detail::balance_in_place(balanced);
    Eigen::EigenSolver<Mat> solver(balanced, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw numerical_error("eigenvalues: QR iteration did not converge for order " +
                              std::to_string(m.rows()));
    Spectrum s;
    s.eigenvalues.reserve(static_cast<std::size_t>(m.rows()));
    const auto& ev = solver.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) s.eigenvalues.push_back(ev[i]);
    std::sort(s.eigenvalues.begin(), s.eigenvalues.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return s;
}

/// True iff every eigenvalue of m has real part > eig_tol.
inline bool positive_stable(const Mat& m, const Tolerances& tol = {}) {
    return eigenvalues(m).min_real() > tol.eig_tol;
}

/// Smallest eigenvalue of (s + s^T)/2. The input must already be symmetric
/// up to sym_tol * max(1, |s|_max); gross asymmetry is a caller bug.
inline double min_symmetric_eig(const Mat& s, const Tolerances& tol = {}) {
    require_square(s, "min_symmetric_eig");
    require_finite(s, "min_symmetric_eig");
    const double scale = std::max(1.0, max_abs(s));
    if (max_abs(s - s.transpose()) > tol.sym_tol * scale)
        throw precondition_error("min_symmetric_eig: input is not symmetric within tolerance");
    Mat sym = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> solver(sym, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw numerical_error("min_symmetric_eig: solver failed");
    return solver.eigenvalues()(0);
}

/// Normality test: |MM^T - M^T M|_max <= sym_tol * max(1, |M|_max^2).
inline bool is_normal(const Mat& m, const Tolerances& tol = {}) {
    require_square(m, "is_normal");
    const double scale = std::max(1.0, max_abs(m) * max_abs(m));
    Mat comm = m * m.transpose() - m.transpose() * m;
    return max_abs(comm) <= tol.sym_tol * scale;
}

/// Metzler-type class: every off-diagonal entry >= -eig_tol.
inline bool in_class_F(const Mat& m, const Tolerances& tol = {}) {
    require_square(m, "in_class_F");
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (i != j && m(i, j) < -tol.eig_tol) return false;
    return true;
}

/// min over columns j of (m_jj - sum_{i != j} |m_ij|). The signed diagonal is
/// used (no absolute value): callers that need the classic |m_jj| form take
/// the margin of a matrix known to have positive diagonal.
inline double column_dominance_margin(const Mat& m) {
    require_square(m, "column_dominance_margin");
    double worst = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        double off = 0.0;
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (i != j) off += std::abs(m(i, j));
        worst = std::min(worst, m(j, j) - off);
    }
    return worst;
}

/// Strict column diagonal dominance: |m_jj| - sum_{i != j} |m_ij| > margin_tol
/// for every column j.
inline bool strictly_column_diag_dominant(const Mat& m, const Tolerances& tol = {}) {
    require_square(m, "strictly_column_diag_dominant");
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        double off = 0.0;
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (i != j) off += std::abs(m(i, j));
        if (!(std::abs(m(j, j)) - off > tol.margin_tol)) return false;
    }
    return true;
}

/// Rows and columns of m restricted to idx (0-based, strictly increasing).
inline Mat principal_submatrix(const Mat& m, const std::vector<int>& idx) {
    require_square(m, "principal_submatrix");
    if (idx.empty()) throw index_error("principal_submatrix: empty index set");
    for (std::size_t t = 0; t < idx.size(); ++t) {
        if (idx[t] < 0 || idx[t] >= m.rows())
            throw index_error("principal_submatrix: index " + std::to_string(idx[t]) +
                              " out of range for order " + std::to_string(m.rows()));
        if (t > 0 && idx[t] <= idx[t - 1])
            throw index_error("principal_submatrix: index set must be strictly increasing");
    }
    Mat out(idx.size(), idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::size_t c = 0; c < idx.size(); ++c)
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m(idx[r], idx[c]);
    return out;
}

} // namespace nsqstab
