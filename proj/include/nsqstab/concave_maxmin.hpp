#pragma once

#include <algorithm>
#include <deque>
#include <functional>
#include <limits>
#include <vector>

#include "nsqstab/matrix.hpp"
#include "nsqstab/rng.hpp"

namespace nsqstab {

/// One concave piece evaluated at the current point: its value and a
/// supergradient. The objective is the pointwise min over pieces.
struct PieceValue {
    double value;
    Vec gradient;
};

/// Evaluates every piece at d; the objective value is the min of the values.
using PieceEvaluator = std::function<std::vector<PieceValue>(const Vec&)>;

struct MaxMinOptions {
    long budget = 5000;      // objective evaluations
    double d_min = 1e-9;     // floor keeping the diagonal strictly positive
    double gap_tol = 1e-9;   // stop when upper_bound - best_value <= gap_tol
    double stop_below = 0.0; // stop once upper_bound <= stop_below (infeasible)
    std::uint64_t seed = 0;  // used only for stall-perturbation restarts
    int dual_refresh = 16;   // iterations between dual bound refinements
    int dual_steps = 200;    // projected subgradient steps per refinement
    int max_cuts = 192;
};

struct MaxMinResult {
    Vec best_d;
    double best_value = -std::numeric_limits<double>::infinity();
    double upper_bound = std::numeric_limits<double>::infinity();
    long evaluations = 0;
};

namespace detail {

/// Euclidean projection of x onto {e >= 0, sum e = total}.
inline Vec project_unit_simplex(Vec x, double total) {
    const auto n = x.size();
    std::vector<double> u(x.data(), x.data() + n);
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumsum = 0.0, tau = 0.0;
    int rho = 0;
    for (int k = 0; k < n; ++k) {
        cumsum += u[static_cast<std::size_t>(k)];
        double t = (cumsum - total) / (k + 1);
        if (u[static_cast<std::size_t>(k)] - t > 0.0) {
            rho = k + 1;
            tau = t;
        }
    }
    (void)rho;
    for (Eigen::Index i = 0; i < n; ++i) x[i] = std::max(0.0, x[i] - tau);
    return x;
}

/// Projection onto the scaled simplex {d >= d_min, sum d = dim}.
inline Vec project_scaled_simplex(const Vec& d, double d_min) {
    const auto n = d.size();
    double free_mass = static_cast<double>(n) * (1.0 - d_min);
    Vec e = d.array() - d_min;
    e = project_unit_simplex(std::move(e), free_mass);
    return e.array() + d_min;
}

/// max over the scaled simplex of h . d (closed form: floor mass everywhere,
/// free mass on the largest coordinate).
inline double max_linear_on_simplex(const Vec& h, double d_min) {
    const auto n = h.size();
    double free_mass = static_cast<double>(n) * (1.0 - d_min);
    return d_min * h.sum() + free_mass * h.maxCoeff();
}

} // namespace detail

/// Maximize f(d) = min over pieces, f concave, over {d >= d_min, sum d = dim}.
///
/// Primal: projected supergradient ascent with Polyak-style steps sized by the
/// current certified upper bound. Dual: every evaluation linearizes all pieces
/// into cuts (each over-estimates f by concavity); the cut model's LP bound is
/// certified through its simplex-dual, where any dual point gives a valid
/// bound, so a projected subgradient descent on the dual closes the gap
/// without an external LP solver.
inline MaxMinResult maximize_concave_on_simplex(int dim, const PieceEvaluator& pieces,
                                                const MaxMinOptions& opt = {}) {
    MaxMinResult res;
    const double inf = std::numeric_limits<double>::infinity();

    struct Cut {
        double c;      // intercept: value - gradient . point
        Vec g;         // gradient
        double gsum;   // cached sum of gradient entries
    };
    std::deque<Cut> cuts;
    double single_cut_ub = inf;

    auto add_cuts = [&](const Vec& d, const std::vector<PieceValue>& pv) {
        for (const auto& p : pv) {
            Cut cut{p.value - p.gradient.dot(d), p.gradient, p.gradient.sum()};
            single_cut_ub = std::min(
                single_cut_ub, cut.c + detail::max_linear_on_simplex(cut.g, opt.d_min));
            cuts.push_back(std::move(cut));
            if (static_cast<int>(cuts.size()) > opt.max_cuts) cuts.pop_front();
        }
    };

    // Certified bound from the cut model's dual; any simplex point is valid.
    auto dual_bound = [&]() -> double {
        const int K = static_cast<int>(cuts.size());
        if (K == 0) return inf;
        const double free_mass = static_cast<double>(dim) * (1.0 - opt.d_min);
        Vec lambda = Vec::Constant(K, 1.0 / K);
        double best = inf;
        Vec h(dim), q(K);
        for (int t = 1; t <= opt.dual_steps; ++t) {
            h.setZero();
            double cterm = 0.0;
            for (int k = 0; k < K; ++k) {
                h += lambda[k] * cuts[static_cast<std::size_t>(k)].g;
                cterm += lambda[k] * cuts[static_cast<std::size_t>(k)].c;
            }
            Eigen::Index istar = 0;
            h.maxCoeff(&istar);
            double phi = cterm + opt.d_min * h.sum() + free_mass * h[istar];
            best = std::min(best, phi);
            for (int k = 0; k < K; ++k) {
                const Cut& cut = cuts[static_cast<std::size_t>(k)];
                q[k] = cut.c + opt.d_min * cut.gsum + free_mass * cut.g[istar];
            }
            double qn = q.norm();
            if (qn < 1e-300) break;
            lambda = detail::project_unit_simplex(lambda - (1.4 / (qn * std::sqrt(t))) * q, 1.0);
        }
        return best;
    };

    auto evaluate = [&](const Vec& d) -> std::pair<double, Vec> {
        auto pv = pieces(d);
        ++res.evaluations;
        double fmin = inf;
        Vec grad;
        for (const auto& p : pv) {
            if (p.value < fmin) {
                fmin = p.value;
                grad = p.gradient;
            }
        }
        add_cuts(d, pv);
        if (fmin > res.best_value) {
            res.best_value = fmin;
            res.best_d = d;
        }
        return {fmin, std::move(grad)};
    };

    Vec d = Vec::Ones(dim);
    if (dim == 1) {
        evaluate(d);
        res.upper_bound = res.best_value;
        return res;
    }

    auto [f, g] = evaluate(d);
    res.upper_bound = single_cut_ub;

    KeyedRng rng(opt.seed, {0x51u});
    long stagnant = 0;
    double last_best = res.best_value;
    int perturb_round = 0;

    for (long it = 1; res.evaluations < opt.budget; ++it) {
        if (it % opt.dual_refresh == 0 || res.upper_bound == inf) {
            res.upper_bound = std::min(res.upper_bound, std::min(single_cut_ub, dual_bound()));
            if (res.upper_bound <= opt.stop_below) break;
            if (res.best_value > opt.stop_below &&
                res.upper_bound - res.best_value <= opt.gap_tol)
                break;
        }
        res.upper_bound = std::min(res.upper_bound, single_cut_ub);

        double gn2 = g.squaredNorm();
        if (gn2 < 1e-300) break; // flat piece: current point is optimal for it
        double ub = std::min(res.upper_bound, single_cut_ub);
        double alpha = (ub - f + 1e-12) / gn2;
        double cap = (std::sqrt(2.0) * dim) / std::sqrt(gn2);
        alpha = std::clamp(alpha, 0.0, cap);
        if (alpha <= 0.0) alpha = cap / std::sqrt(static_cast<double>(it));

        d = detail::project_scaled_simplex(d + alpha * g, opt.d_min);
        std::tie(f, g) = evaluate(d);

        if (res.best_value > last_best + 1e-15) {
            last_best = res.best_value;
            stagnant = 0;
        } else if (++stagnant >= 60) {
            // restart near the incumbent with a shrinking seeded perturbation
            double sigma = 0.25 * std::pow(0.5, perturb_round++);
            Vec noise(dim);
            for (int i = 0; i < dim; ++i) noise[i] = rng.uniform(-sigma, sigma);
            d = detail::project_scaled_simplex(res.best_d + noise, opt.d_min);
            std::tie(f, g) = evaluate(d);
            stagnant = 0;
        }
    }

    res.upper_bound = std::min(res.upper_bound, std::min(single_cut_ub, dual_bound()));
    return res;
}

} // namespace nsqstab
