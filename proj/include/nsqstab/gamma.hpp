#pragma once

#include <string>
#include <utility>
#include <vector>

#include "nsqstab/block.hpp"

namespace nsqstab {

/// Desired payoff ratios of the card game: kappa(i, j) > 0 is the ratio of
/// member j of group i to the group's first member, so kappa(i, 0) = 1.
class RatioTable {
public:
    RatioTable(BlockStructure s, std::vector<std::vector<double>> kappa)
        : structure_(std::move(s)), kappa_(std::move(kappa)) {
        if (static_cast<int>(kappa_.size()) != structure_.group_count())
            throw dimension_error("RatioTable: one ratio row per group required");
        for (int i = 0; i < structure_.group_count(); ++i) {
            const auto& row = kappa_[static_cast<std::size_t>(i)];
            if (static_cast<int>(row.size()) != structure_.group_size(i))
                throw dimension_error("RatioTable: group " + std::to_string(i) +
                                      " expects " + std::to_string(structure_.group_size(i)) +
                                      " ratios");
            if (row[0] != 1.0)
                throw precondition_error("RatioTable: kappa(i,1) must equal 1 exactly");
            for (double v : row)
                if (!(v > 0.0) || !std::isfinite(v))
                    throw precondition_error("RatioTable: ratios must be positive and finite");
        }
    }

    const BlockStructure& structure() const { return structure_; }
    double kappa(int i, int j) const {
        structure_.col_index(i, j); // bounds check
        return kappa_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }

private:
    BlockStructure structure_;
    std::vector<std::vector<double>> kappa_;
};

/// Coefficients gamma(zeta_1..zeta_m) over all full selections, stored in
/// lexicographic enumeration order. Entries are nonnegative; tensors built
/// from a RatioTable are strictly positive, zeros arise only from
/// out-of-service members in the aggregation-identity path.
class GammaTensor {
public:
    GammaTensor(BlockStructure s, std::vector<double> values,
                long long cap = kDefaultEnumerationCap)
        : structure_(std::move(s)), values_(std::move(values)) {
        long long n = structure_.full_selection_count(cap);
        if (n > cap) throw cap_error("GammaTensor: selection count exceeds cap");
        if (static_cast<long long>(values_.size()) != n)
            throw dimension_error("GammaTensor: expected " + std::to_string(n) + " entries");
        for (double v : values_)
            if (!(v >= 0.0) || !std::isfinite(v))
                throw precondition_error("GammaTensor: entries must be nonnegative and finite");
    }

    const BlockStructure& structure() const { return structure_; }
    const std::vector<double>& values() const { return values_; }

    /// Flat index of a full choice vector (0-based members, group 0 most
    /// significant — the lexicographic enumeration order).
    std::size_t index_of(const std::vector<int>& choice) const {
        if (static_cast<int>(choice.size()) != structure_.group_count())
            throw index_error("GammaTensor: choice vector must cover every group");
        std::size_t idx = 0;
        for (int i = 0; i < structure_.group_count(); ++i) {
            structure_.col_index(i, choice[static_cast<std::size_t>(i)]); // bounds check
            idx = idx * static_cast<std::size_t>(structure_.group_size(i)) +
                  static_cast<std::size_t>(choice[static_cast<std::size_t>(i)]);
        }
        return idx;
    }

    double at(const std::vector<int>& choice) const { return values_[index_of(choice)]; }

private:
    BlockStructure structure_;
    std::vector<double> values_;
};

namespace detail {

/// Product tensor gamma(zeta) = prod_i w(i, zeta_i) for arbitrary
/// nonnegative weight rows (no positivity requirement).
inline GammaTensor product_tensor(const BlockStructure& s,
                                  const std::vector<std::vector<double>>& w,
                                  long long cap = kDefaultEnumerationCap) {
    long long n = s.full_selection_count(cap);
    if (n > cap) throw cap_error("product_tensor: selection count exceeds cap");
    std::vector<double> values(static_cast<std::size_t>(n));
    const int m = s.group_count();
    std::vector<int> choice(static_cast<std::size_t>(m), 0);
    for (std::size_t t = 0;; ++t) {
        double prod = 1.0;
        for (int i = 0; i < m; ++i)
            prod *= w[static_cast<std::size_t>(i)][static_cast<std::size_t>(
                choice[static_cast<std::size_t>(i)])];
        values[t] = prod;
        int i = m - 1;
        while (i >= 0 && choice[static_cast<std::size_t>(i)] == s.group_size(i) - 1) {
            choice[static_cast<std::size_t>(i)] = 0;
            --i;
        }
        if (i < 0) break;
        ++choice[static_cast<std::size_t>(i)];
    }
    return GammaTensor(s, std::move(values), cap);
}

template <typename Fn>
inline void for_each_full_choice(const BlockStructure& s, Fn&& fn) {
    const int m = s.group_count();
    std::vector<int> choice(static_cast<std::size_t>(m), 0);
    std::size_t flat = 0;
    while (true) {
        fn(choice, flat);
        ++flat;
        int i = m - 1;
        while (i >= 0 && choice[static_cast<std::size_t>(i)] == s.group_size(i) - 1) {
            choice[static_cast<std::size_t>(i)] = 0;
            --i;
        }
        if (i < 0) return;
        ++choice[static_cast<std::size_t>(i)];
    }
}

} // namespace detail

/// The unique tensor satisfying gamma(1,..,1) = 1 and the ratio recursion:
/// the product form gamma(zeta) = prod_i kappa(i, zeta_i).
inline GammaTensor build_gamma(const RatioTable& ratios,
                               long long cap = kDefaultEnumerationCap) {
    const auto& s = ratios.structure();
    std::vector<std::vector<double>> w(static_cast<std::size_t>(s.group_count()));
    for (int i = 0; i < s.group_count(); ++i)
        for (int j = 0; j < s.group_size(i); ++j)
            w[static_cast<std::size_t>(i)].push_back(ratios.kappa(i, j));
    return detail::product_tensor(s, w, cap);
}

/// payoff(k, j) = (1/m) * sum of gamma over all full selections with
/// zeta_k = j; one list per group.
inline std::vector<std::vector<double>> card_payoffs(const GammaTensor& gamma) {
    const auto& s = gamma.structure();
    const int m = s.group_count();
    std::vector<std::vector<double>> payoff(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
        payoff[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(s.group_size(i)),
                                                   0.0);
    detail::for_each_full_choice(s, [&](const std::vector<int>& choice, std::size_t flat) {
        double g = gamma.values()[flat];
        for (int k = 0; k < m; ++k)
            payoff[static_cast<std::size_t>(k)]
                  [static_cast<std::size_t>(choice[static_cast<std::size_t>(k)])] += g;
    });
    for (auto& row : payoff)
        for (double& v : row) v /= static_cast<double>(m);
    return payoff;
}

/// Check that the tensor realizes the card-game contract: normalization,
/// the ratio recursion, and the payoff ratio law payoff(k,j)/payoff(k,1) =
/// kappa(k,j), all to relative tolerance.
inline bool verify_ratio_property(const GammaTensor& gamma, double rel_tol = 1e-12) {
    const auto& s = gamma.structure();
    const int m = s.group_count();
    auto close = [rel_tol](double x, double y) {
        return std::abs(x - y) <= rel_tol * std::max({std::abs(x), std::abs(y), 1e-300});
    };

    for (double v : gamma.values())
        if (!(v > 0.0)) return false;

    std::vector<int> base(static_cast<std::size_t>(m), 0);
    double g0 = gamma.at(base);
    if (!close(g0, 1.0)) return false;

    // implied ratios from the basis selections
    std::vector<std::vector<double>> kappa(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        kappa[static_cast<std::size_t>(k)].resize(static_cast<std::size_t>(s.group_size(k)));
        for (int j = 0; j < s.group_size(k); ++j) {
            std::vector<int> sel = base;
            sel[static_cast<std::size_t>(k)] = j;
            kappa[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] =
                gamma.at(sel) / g0;
        }
    }

    // ratio recursion at every selection and coordinate
    bool ok = true;
    detail::for_each_full_choice(s, [&](const std::vector<int>& choice, std::size_t flat) {
        if (!ok) return;
        double g = gamma.values()[flat];
        for (int k = 0; k < m && ok; ++k) {
            std::vector<int> anchored = choice;
            anchored[static_cast<std::size_t>(k)] = 0;
            double expected =
                gamma.at(anchored) * kappa[static_cast<std::size_t>(k)][static_cast<std::size_t>(
                                         choice[static_cast<std::size_t>(k)])];
            if (!close(g, expected)) ok = false;
        }
    });
    if (!ok) return false;

    auto payoff = card_payoffs(gamma);
    for (int k = 0; k < m; ++k)
        for (int j = 0; j < s.group_size(k); ++j) {
            double ratio = payoff[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] /
                           payoff[static_cast<std::size_t>(k)][0];
            if (!close(ratio, kappa[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)]))
                return false;
        }
    return true;
}

/// The bracketed-coefficient form of the aggregation: column i of the m x m
/// result is d_i * sum_j c_ij a(i,j) with c_ij the sum of gamma over all
/// selections choosing member j in group i.
inline Mat aggregation_weights(const PlantMatrix& A, const GammaTensor& gamma, const Vec& d) {
    if (!(A.structure == gamma.structure()))
        throw dimension_error("aggregation_weights: structures do not match");
    const int m = A.structure.group_count();
    if (d.size() != m) throw dimension_error("aggregation_weights: d must have length m");

    std::vector<std::vector<double>> c(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
        c[static_cast<std::size_t>(i)].assign(
            static_cast<std::size_t>(A.structure.group_size(i)), 0.0);
    detail::for_each_full_choice(A.structure,
                                 [&](const std::vector<int>& choice, std::size_t flat) {
                                     double g = gamma.values()[flat];
                                     for (int i = 0; i < m; ++i)
                                         c[static_cast<std::size_t>(i)][static_cast<std::size_t>(
                                             choice[static_cast<std::size_t>(i)])] += g;
                                 });

    Mat out = Mat::Zero(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < A.structure.group_size(i); ++j)
            out.col(i) +=
                d[i] * c[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * A.a(i, j);
    return out;
}

/// Result of checking the aggregation identity against AEK. The identity is
/// exact with d_i = ktilde(i, anchor_i) / C_i, where C_i = prod_{k != i} S_k
/// and S_k sums the anchored ratios of group k; C documents the per-column
/// normalization that the plain d_i = ktilde_{i1} choice leaves behind.
struct AggregationCheck {
    double residual = 0.0;
    Vec d_used;
    Vec column_scaling;
    bool ok = false;
};

inline AggregationCheck verify_aggregation_identity(const PlantMatrix& A, const Detuning& E,
                                                    const GainMatrix& K, double tol = 1e-10,
                                                    long long cap = kDefaultEnumerationCap) {
    EffectiveGains eg = effective_gains(E, K);
    const int m = A.structure.group_count();
    if (!(A.structure == eg.structure))
        throw dimension_error("verify_aggregation_identity: structures do not match");
    for (int i = 0; i < m; ++i)
        if (!eg.in_service[static_cast<std::size_t>(i)])
            throw precondition_error(
                "verify_aggregation_identity: group " + std::to_string(i + 1) +
                " is entirely out of service; analyze the reduced structure instead");

    // anchored ratios: first in-service member of each group gets ratio 1
    std::vector<std::vector<double>> kappa(static_cast<std::size_t>(m));
    Vec anchor_gain(m);
    for (int i = 0; i < m; ++i) {
        const auto& kt = eg.ktilde[static_cast<std::size_t>(i)];
        int anchor = 0;
        while (kt[static_cast<std::size_t>(anchor)] <= 0.0) ++anchor;
        anchor_gain[i] = kt[static_cast<std::size_t>(anchor)];
        auto& row = kappa[static_cast<std::size_t>(i)];
        row.resize(kt.size());
        for (std::size_t j = 0; j < kt.size(); ++j) row[j] = kt[j] / anchor_gain[i];
        row[static_cast<std::size_t>(anchor)] = 1.0;
    }

    GammaTensor gamma = detail::product_tensor(A.structure, kappa, cap);

    Vec scaling(m);
    for (int i = 0; i < m; ++i) {
        double prod = 1.0;
        for (int k = 0; k < m; ++k) {
            if (k == i) continue;
            double sk = 0.0;
            for (double v : kappa[static_cast<std::size_t>(k)]) sk += v;
            prod *= sk;
        }
        scaling[i] = prod;
    }

    Vec d = anchor_gain.cwiseQuotient(scaling);
    Mat lhs = aggregation_weights(A, gamma, d);
    Mat rhs = assemble_AEK(A, E, K);

    AggregationCheck check;
    check.residual = max_abs(lhs - rhs);
    check.d_used = d;
    check.column_scaling = scaling;
    check.ok = check.residual <= tol;
    return check;
}

} // namespace nsqstab
