#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "nsqstab/errors.hpp"

namespace nsqstab {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Eigenvalues of a real square matrix, sorted by (real, imag) so that the
/// order is reproducible regardless of the backend's internal ordering.
struct Spectrum {
    std::vector<std::complex<double>> eigenvalues;

    double min_real() const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& z : eigenvalues) m = std::min(m, z.real());
        return m;
    }
};

/// Numeric tolerances shared by every predicate in the library.
///   eig_tol    — strictness margin for eigenvalue sign tests
///   sym_tol    — allowed relative asymmetry / non-normality residual
///   margin_tol — feasibility threshold for solver verdicts
struct Tolerances {
    double eig_tol = 1e-9;
    double sym_tol = 1e-9;
    double margin_tol = 1e-8;
};

inline double max_abs(const Mat& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool all_finite(const Mat& m) { return m.allFinite(); }

inline void require_square(const Mat& m, const char* who) {
    if (m.rows() != m.cols())
        throw dimension_error(std::string(who) + ": matrix must be square, got " +
                              std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

inline void require_finite(const Mat& m, const char* who) {
    if (!all_finite(m))
        throw precondition_error(std::string(who) + ": matrix has non-finite entries");
}

} // namespace nsqstab
