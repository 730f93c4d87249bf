#pragma once

#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "nsqstab/matrix.hpp"

namespace nsqstab {

/// Default cap on the number of enumerated selections; overridable per call
/// (the CLI reads NSQSTAB_CAP).
inline constexpr long long kDefaultEnumerationCap = 1'000'000;

/// Partition of the n inputs into m groups of sizes p_0..p_{m-1}, each group
/// paired with one output channel.
class BlockStructure {
public:
    BlockStructure() = default;

    explicit BlockStructure(std::vector<int> group_sizes) : p_(std::move(group_sizes)) {
        if (p_.empty()) throw dimension_error("BlockStructure: need at least one group");
        offsets_.resize(p_.size() + 1, 0);
        for (std::size_t i = 0; i < p_.size(); ++i) {
            if (p_[i] < 1)
                throw dimension_error("BlockStructure: group size must be >= 1, got " +
                                      std::to_string(p_[i]));
            offsets_[i + 1] = offsets_[i] + p_[i];
        }
    }

    int group_count() const { return static_cast<int>(p_.size()); }
    int group_size(int i) const { return p_.at(static_cast<std::size_t>(i)); }
    int total_cols() const { return offsets_.back(); }
    /// Column index of member j of group i in the flat layout.
    int col_index(int i, int j) const {
        if (i < 0 || i >= group_count() || j < 0 || j >= group_size(i))
            throw index_error("BlockStructure: member (" + std::to_string(i) + "," +
                              std::to_string(j) + ") out of range");
        return offsets_[static_cast<std::size_t>(i)] + j;
    }
    const std::vector<int>& sizes() const { return p_; }

    bool operator==(const BlockStructure& other) const { return p_ == other.p_; }

    /// prod p_i, saturating at cap+1 so overflow checks stay cheap.
    long long full_selection_count(long long cap = kDefaultEnumerationCap) const {
        long long n = 1;
        for (int pi : p_) {
            n *= pi;
            if (n > cap) return cap + 1;
        }
        return n;
    }

private:
    std::vector<int> p_;
    std::vector<int> offsets_;
};

/// Real m x n matrix with group-indexed columns a(i, j).
struct PlantMatrix {
    BlockStructure structure;
    Mat data;

    PlantMatrix() = default;
    PlantMatrix(BlockStructure s, Mat d) : structure(std::move(s)), data(std::move(d)) {
        if (data.rows() != structure.group_count() || data.cols() != structure.total_cols())
            throw dimension_error("PlantMatrix: data must be m x n = " +
                                  std::to_string(structure.group_count()) + " x " +
                                  std::to_string(structure.total_cols()));
        require_finite(data, "PlantMatrix");
    }

    Vec a(int group, int member) const { return data.col(structure.col_index(group, member)); }
};

namespace detail {

inline std::vector<std::vector<double>> validated_block_entries(
    const BlockStructure& s, std::vector<std::vector<double>> entries, const char* who) {
    if (static_cast<int>(entries.size()) != s.group_count())
        throw dimension_error(std::string(who) + ": expected " +
                              std::to_string(s.group_count()) + " groups");
    for (int i = 0; i < s.group_count(); ++i) {
        if (static_cast<int>(entries[static_cast<std::size_t>(i)].size()) != s.group_size(i))
            throw dimension_error(std::string(who) + ": group " + std::to_string(i) +
                                  " expects " + std::to_string(s.group_size(i)) + " entries");
        for (double v : entries[static_cast<std::size_t>(i)])
            if (!(v >= 0.0) || !std::isfinite(v))
                throw precondition_error(std::string(who) +
                                         ": entries must be nonnegative and finite");
    }
    return entries;
}

inline std::vector<std::vector<double>> uniform_block_entries(const BlockStructure& s,
                                                              double value) {
    std::vector<std::vector<double>> e(static_cast<std::size_t>(s.group_count()));
    for (int i = 0; i < s.group_count(); ++i)
        e[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(s.group_size(i)), value);
    return e;
}

} // namespace detail

/// Block-diagonal gain matrix K, stored compactly as per-group member weights
/// k(i, j) >= 0. The dense n x m form exists only for cross-checks.
struct GainMatrix {
    BlockStructure structure;
    std::vector<std::vector<double>> k;

    GainMatrix() = default;
    GainMatrix(BlockStructure s, std::vector<std::vector<double>> entries)
        : structure(std::move(s)),
          k(detail::validated_block_entries(structure, std::move(entries), "GainMatrix")) {}

    static GainMatrix all_ones(const BlockStructure& s) {
        return GainMatrix(s, detail::uniform_block_entries(s, 1.0));
    }

    double operator()(int i, int j) const {
        structure.col_index(i, j); // bounds check
        return k[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
};

/// Nonnegative diagonal detuning E, stored as per-group member entries
/// eps(i, j) >= 0 in the same compact layout as GainMatrix.
struct Detuning {
    BlockStructure structure;
    std::vector<std::vector<double>> eps;

    Detuning() = default;
    Detuning(BlockStructure s, std::vector<std::vector<double>> entries)
        : structure(std::move(s)),
          eps(detail::validated_block_entries(structure, std::move(entries), "Detuning")) {}

    static Detuning all_ones(const BlockStructure& s) {
        return Detuning(s, detail::uniform_block_entries(s, 1.0));
    }
    static Detuning all_zero(const BlockStructure& s) {
        return Detuning(s, detail::uniform_block_entries(s, 0.0));
    }

    double operator()(int i, int j) const {
        structure.col_index(i, j); // bounds check
        return eps[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
};

/// Dense n x m reconstruction of K (test oracle; the library never needs it).
inline Mat dense_gain(const GainMatrix& K) {
    const auto& s = K.structure;
    Mat out = Mat::Zero(s.total_cols(), s.group_count());
    for (int i = 0; i < s.group_count(); ++i)
        for (int j = 0; j < s.group_size(i); ++j) out(s.col_index(i, j), i) = K(i, j);
    return out;
}

/// Dense n x n diagonal reconstruction of E (test oracle).
inline Mat dense_detuning(const Detuning& E) {
    const auto& s = E.structure;
    Mat out = Mat::Zero(s.total_cols(), s.total_cols());
    for (int i = 0; i < s.group_count(); ++i)
        for (int j = 0; j < s.group_size(i); ++j) {
            int c = s.col_index(i, j);
            out(c, c) = E(i, j);
        }
    return out;
}

/// One chosen member per active group; identifies a squared matrix.
/// active is a strictly increasing subset of group indices, choice[t] the
/// member picked inside group active[t] (all indices 0-based).
struct SquaredSelection {
    std::vector<int> active;
    std::vector<int> choice;
};

inline void validate_selection(const BlockStructure& s, const SquaredSelection& sel) {
    if (sel.active.empty()) throw index_error("SquaredSelection: active set is empty");
    if (sel.active.size() != sel.choice.size())
        throw index_error("SquaredSelection: active/choice size mismatch");
    for (std::size_t t = 0; t < sel.active.size(); ++t) {
        if (t > 0 && sel.active[t] <= sel.active[t - 1])
            throw index_error("SquaredSelection: active set must be strictly increasing");
        s.col_index(sel.active[t], sel.choice[t]); // bounds check
    }
}

/// AEK per the column-aggregation form: column i of the m x m result is
/// sum_j eps(i,j) * k(i,j) * a(i,j).
inline Mat assemble_AEK(const PlantMatrix& A, const Detuning& E, const GainMatrix& K) {
    if (!(A.structure == E.structure) || !(A.structure == K.structure))
        throw dimension_error("assemble_AEK: block structures do not match");
    const int m = A.structure.group_count();
    Mat out = Mat::Zero(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < A.structure.group_size(i); ++j)
            out.col(i) += E(i, j) * K(i, j) * A.a(i, j);
    return out;
}

/// Effective gains ktilde(i,j) = eps(i,j) * k(i,j), with per-group
/// in-service flags (a group is out of service when all its ktilde vanish).
struct EffectiveGains {
    BlockStructure structure;
    std::vector<std::vector<double>> ktilde;
    std::vector<bool> in_service;

    std::vector<int> in_service_indices() const {
        std::vector<int> idx;
        for (int i = 0; i < structure.group_count(); ++i)
            if (in_service[static_cast<std::size_t>(i)]) idx.push_back(i);
        return idx;
    }
    bool all_in_service() const {
        return static_cast<int>(in_service_indices().size()) == structure.group_count();
    }
};

inline EffectiveGains effective_gains(const Detuning& E, const GainMatrix& K) {
    if (!(E.structure == K.structure))
        throw dimension_error("effective_gains: block structures do not match");
    EffectiveGains eg;
    eg.structure = E.structure;
    eg.ktilde.resize(static_cast<std::size_t>(E.structure.group_count()));
    eg.in_service.resize(static_cast<std::size_t>(E.structure.group_count()), false);
    for (int i = 0; i < E.structure.group_count(); ++i) {
        auto& row = eg.ktilde[static_cast<std::size_t>(i)];
        row.resize(static_cast<std::size_t>(E.structure.group_size(i)));
        for (int j = 0; j < E.structure.group_size(i); ++j) {
            row[static_cast<std::size_t>(j)] = E(i, j) * K(i, j);
            if (row[static_cast<std::size_t>(j)] > 0.0)
                eg.in_service[static_cast<std::size_t>(i)] = true;
        }
    }
    return eg;
}

/// All prod(p_i) full selections (every group active), in lexicographic
/// order of the member choices with group 0 most significant.
inline std::vector<SquaredSelection> enumerate_full_selections(
    const BlockStructure& s, long long cap = kDefaultEnumerationCap) {
    long long n = s.full_selection_count(cap);
    if (n > cap)
        throw cap_error("enumerate_full_selections: selection count exceeds cap " +
                        std::to_string(cap));
    std::vector<SquaredSelection> out;
    out.reserve(static_cast<std::size_t>(n));
    const int m = s.group_count();
    std::vector<int> all(static_cast<std::size_t>(m));
    std::iota(all.begin(), all.end(), 0);
    std::vector<int> choice(static_cast<std::size_t>(m), 0);
    while (true) {
        out.push_back({all, choice});
        int i = m - 1;
        while (i >= 0 && choice[static_cast<std::size_t>(i)] == s.group_size(i) - 1) {
            choice[static_cast<std::size_t>(i)] = 0;
            --i;
        }
        if (i < 0) break;
        ++choice[static_cast<std::size_t>(i)];
    }
    return out;
}

/// All selections with exactly k active groups: active subsets in
/// lexicographic combination order, member choices lexicographic within.
inline std::vector<SquaredSelection> enumerate_reduced_selections(
    const BlockStructure& s, int k, long long cap = kDefaultEnumerationCap) {
    const int m = s.group_count();
    if (k < 1 || k > m)
        throw index_error("enumerate_reduced_selections: k must be in 1.." + std::to_string(m));
    std::vector<SquaredSelection> out;
    std::vector<int> subset(static_cast<std::size_t>(k));
    std::iota(subset.begin(), subset.end(), 0);
    while (true) {
        std::vector<int> choice(static_cast<std::size_t>(k), 0);
        while (true) {
            if (static_cast<long long>(out.size()) >= cap)
                throw cap_error("enumerate_reduced_selections: selection count exceeds cap " +
                                std::to_string(cap));
            out.push_back({subset, choice});
            int t = k - 1;
            while (t >= 0 &&
                   choice[static_cast<std::size_t>(t)] ==
                       s.group_size(subset[static_cast<std::size_t>(t)]) - 1) {
                choice[static_cast<std::size_t>(t)] = 0;
                --t;
            }
            if (t < 0) break;
            ++choice[static_cast<std::size_t>(t)];
        }
        // next k-combination of {0..m-1}
        int t = k - 1;
        while (t >= 0 && subset[static_cast<std::size_t>(t)] == m - k + t) --t;
        if (t < 0) break;
        ++subset[static_cast<std::size_t>(t)];
        for (int u = t + 1; u < k; ++u)
            subset[static_cast<std::size_t>(u)] = subset[static_cast<std::size_t>(u - 1)] + 1;
    }
    return out;
}

/// The squared matrix of a selection: rows restricted to the active groups
/// (output row i pairs with input group i), columns the chosen member of
/// each active group, both in increasing group order.
inline Mat extract_squared(const PlantMatrix& A, const SquaredSelection& sel) {
    validate_selection(A.structure, sel);
    const auto k = static_cast<Eigen::Index>(sel.active.size());
    Mat out(k, k);
    for (Eigen::Index c = 0; c < k; ++c) {
        Vec col = A.a(sel.active[static_cast<std::size_t>(c)],
                      sel.choice[static_cast<std::size_t>(c)]);
        for (Eigen::Index r = 0; r < k; ++r)
            out(r, c) = col(sel.active[static_cast<std::size_t>(r)]);
    }
    return out;
}

/// All full squared matrices of A, in enumeration order.
inline std::vector<Mat> full_squared_matrices(const PlantMatrix& A,
                                              long long cap = kDefaultEnumerationCap) {
    std::vector<Mat> mats;
    for (const auto& sel : enumerate_full_selections(A.structure, cap))
        mats.push_back(extract_squared(A, sel));
    return mats;
}

} // namespace nsqstab
