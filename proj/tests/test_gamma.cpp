#include <catch2/catch_amalgamated.hpp>

#include "nsqstab/gamma.hpp"
#include "nsqstab/rng.hpp"

using namespace nsqstab;
using Catch::Approx;

namespace {

PlantMatrix random_plant(KeyedRng& rng, const BlockStructure& s, double a = 1.0) {
    Mat data(s.group_count(), s.total_cols());
    for (int i = 0; i < s.group_count(); ++i)
        for (int j = 0; j < s.total_cols(); ++j) data(i, j) = rng.uniform(-a, a);
    return PlantMatrix(s, data);
}

/// brute-force evaluation of (sum_s gamma_s [A]_s) D by explicit enumeration
Mat aggregation_oracle(const PlantMatrix& A, const GammaTensor& gamma, const Vec& d) {
    const int m = A.structure.group_count();
    Mat sum = Mat::Zero(m, m);
    auto sels = enumerate_full_selections(A.structure);
    for (std::size_t t = 0; t < sels.size(); ++t)
        sum += gamma.values()[t] * extract_squared(A, sels[t]);
    return sum * d.asDiagonal();
}

} // namespace

TEST_CASE("RatioTable validation") {
    BlockStructure s({2, 2});
    CHECK_NOTHROW(RatioTable(s, {{1, 2}, {1, 3}}));
    CHECK_THROWS_AS(RatioTable(s, {{2, 2}, {1, 3}}), precondition_error); // kappa(i,1) != 1
    CHECK_THROWS_AS(RatioTable(s, {{1, 0}, {1, 3}}), precondition_error); // nonpositive
    CHECK_THROWS_AS(RatioTable(s, {{1, 2}}), dimension_error);
}

TEST_CASE("build_gamma product form") {
    SECTION("unit ratios give the all-ones tensor") {
        auto g = build_gamma(RatioTable(BlockStructure({2, 3}), {{1, 1}, {1, 1, 1}}));
        for (double v : g.values()) CHECK(v == 1.0);
    }
    SECTION("p=(2,1) with kappa(1,2)=2") {
        auto g = build_gamma(RatioTable(BlockStructure({2, 1}), {{1, 2}, {1}}));
        REQUIRE(g.values().size() == 2);
        CHECK(g.at({0, 0}) == 1.0);
        CHECK(g.at({1, 0}) == 2.0);
    }
    SECTION("p=(2,2) full table against exhaustive enumeration") {
        auto g = build_gamma(RatioTable(BlockStructure({2, 2}), {{1, 2}, {1, 3}}));
        CHECK(g.at({0, 0}) == 1.0);
        CHECK(g.at({0, 1}) == 3.0);
        CHECK(g.at({1, 0}) == 2.0);
        CHECK(g.at({1, 1}) == 6.0);
        // both conditions of the defining recursion, checked exhaustively
        CHECK(verify_ratio_property(g));
    }
}

TEST_CASE("card_payoffs") {
    SECTION("uniform tensor pays 1 per card") {
        auto g = build_gamma(RatioTable(BlockStructure({2, 2}), {{1, 1}, {1, 1}}));
        for (const auto& row : card_payoffs(g))
            for (double v : row) CHECK(v == Approx(1.0));
    }
    SECTION("p=(2,1) with kappa(1,2)=2") {
        auto g = build_gamma(RatioTable(BlockStructure({2, 1}), {{1, 2}, {1}}));
        auto payoff = card_payoffs(g);
        CHECK(payoff[0][0] == Approx(0.5));
        CHECK(payoff[0][1] == Approx(1.0));
        CHECK(payoff[0][1] / payoff[0][0] == Approx(2.0)); // the desired ratio
        CHECK(payoff[1][0] == Approx(1.5));
    }
    SECTION("single group pays the ratios themselves") {
        double a = 2.5, b = 0.4;
        auto g = build_gamma(RatioTable(BlockStructure({3}), {{1, a, b}}));
        auto payoff = card_payoffs(g);
        CHECK(payoff[0][0] == Approx(1.0));
        CHECK(payoff[0][1] == Approx(a));
        CHECK(payoff[0][2] == Approx(b));
    }
}

TEST_CASE("verify_ratio_property") {
    auto g = build_gamma(RatioTable(BlockStructure({2, 2}), {{1, 0.7}, {1, 4.2}}));
    CHECK(verify_ratio_property(g));
    SECTION("a perturbed entry breaks the recursion") {
        auto vals = g.values();
        vals[3] *= 1.0 + 1e-6;
        CHECK_FALSE(verify_ratio_property(GammaTensor(g.structure(), vals)));
    }
    SECTION("uniqueness at small scale: every perturbation is rejected") {
        for (std::size_t k = 0; k < g.values().size(); ++k) {
            for (double delta : {1e-8, -1e-8, 0.1, -0.1}) {
                auto vals = g.values();
                vals[k] += delta;
                if (vals[k] <= 0) continue;
                CHECK_FALSE(verify_ratio_property(GammaTensor(g.structure(), vals)));
            }
        }
    }
}

TEST_CASE("payoff ratio law on random tables") {
    KeyedRng rng(311);
    for (int trial = 0; trial < 200; ++trial) {
        int m = rng.uniform_int(1, 4);
        std::vector<int> p;
        for (int i = 0; i < m; ++i) p.push_back(rng.uniform_int(1, 3));
        BlockStructure s(p);
        std::vector<std::vector<double>> kappa;
        for (int i = 0; i < m; ++i) {
            std::vector<double> row(static_cast<std::size_t>(s.group_size(i)), 1.0);
            for (std::size_t j = 1; j < row.size(); ++j) row[j] = rng.log_uniform(0.05, 20.0);
            kappa.push_back(std::move(row));
        }
        CHECK(verify_ratio_property(build_gamma(RatioTable(s, kappa))));
    }
}

TEST_CASE("aggregation_weights closed forms") {
    KeyedRng rng(313);
    SECTION("all sizes one with unit gamma and d is the plant itself") {
        BlockStructure s({1, 1, 1});
        PlantMatrix A = random_plant(rng, s);
        GammaTensor g(s, {1.0});
        CHECK(aggregation_weights(A, g, Vec::Ones(3)) == A.data);
    }
    SECTION("p=(2,1), kappa(1,2)=2, d = ones") {
        BlockStructure s({2, 1});
        PlantMatrix A = random_plant(rng, s);
        auto g = build_gamma(RatioTable(s, {{1, 2}, {1}}));
        Mat w = aggregation_weights(A, g, Vec::Ones(2));
        CHECK(max_abs(w.col(0) - (A.a(0, 0) + 2.0 * A.a(0, 1))) < 1e-14);
        CHECK(max_abs(w.col(1) - 3.0 * A.a(1, 0)) < 1e-14);
    }
    SECTION("uniform gamma on p=(2,2) doubles the column sums") {
        BlockStructure s({2, 2});
        PlantMatrix A = random_plant(rng, s);
        auto g = build_gamma(RatioTable(s, {{1, 1}, {1, 1}}));
        Mat w = aggregation_weights(A, g, Vec::Ones(2));
        for (int i = 0; i < 2; ++i)
            CHECK(max_abs(w.col(i) - 2.0 * (A.a(i, 0) + A.a(i, 1))) < 1e-14);
    }
    SECTION("agrees with the brute-force squared-matrix sum") {
        for (int trial = 0; trial < 20; ++trial) {
            int m = rng.uniform_int(1, 3);
            std::vector<int> p;
            for (int i = 0; i < m; ++i) p.push_back(rng.uniform_int(1, 3));
            BlockStructure s(p);
            PlantMatrix A = random_plant(rng, s);
            std::vector<std::vector<double>> kappa;
            for (int i = 0; i < m; ++i) {
                std::vector<double> row(static_cast<std::size_t>(s.group_size(i)), 1.0);
                for (std::size_t j = 1; j < row.size(); ++j)
                    row[j] = rng.log_uniform(0.1, 10.0);
                kappa.push_back(std::move(row));
            }
            auto g = build_gamma(RatioTable(s, kappa));
            Vec d(m);
            for (int i = 0; i < m; ++i) d[i] = rng.log_uniform(0.1, 10.0);
            CHECK(max_abs(aggregation_weights(A, g, d) - aggregation_oracle(A, g, d)) <
                  1e-12);
        }
    }
}

TEST_CASE("verify_aggregation_identity") {
    KeyedRng rng(317);
    SECTION("square structure is exact") {
        BlockStructure s({1, 1});
        PlantMatrix A = random_plant(rng, s);
        Detuning E(s, {{0.7}, {1.3}});
        GainMatrix K(s, {{2.0}, {0.5}});
        auto check = verify_aggregation_identity(A, E, K);
        CHECK(check.residual == 0.0);
        CHECK(check.ok);
    }
    SECTION("worked 2x3 example with ktilde = (1,2;1)") {
        Mat data(2, 3);
        data << 1, 2, 3, 4, 5, 6;
        PlantMatrix A(BlockStructure({2, 1}), data);
        Detuning E(A.structure, {{1, 1}, {1}});
        GainMatrix K(A.structure, {{1, 2}, {1}});
        auto check = verify_aggregation_identity(A, E, K);
        CHECK(check.residual <= 1e-12);
        // hand expansion: AEK = [[5,3],[14,6]] columns (5,14) and (3,6)
        Mat aek = assemble_AEK(A, E, K);
        CHECK(aek(0, 0) == 5.0);
        CHECK(aek(1, 0) == 14.0);
        CHECK(aek(0, 1) == 3.0);
        CHECK(aek(1, 1) == 6.0);
        // the repaired normalization reports the column factors
        CHECK(check.column_scaling[0] == Approx(1.0));
        CHECK(check.column_scaling[1] == Approx(3.0));
        CHECK(check.d_used[0] == Approx(1.0));
        CHECK(check.d_used[1] == Approx(1.0 / 3.0));
    }
    SECTION("random in-service instances") {
        for (int trial = 0; trial < 60; ++trial) {
            int m = rng.uniform_int(1, 4);
            std::vector<int> p;
            for (int i = 0; i < m; ++i) p.push_back(rng.uniform_int(1, 3));
            BlockStructure s(p);
            PlantMatrix A = random_plant(rng, s);
            auto eents = detail::uniform_block_entries(s, 0.0);
            auto kents = detail::uniform_block_entries(s, 0.0);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < s.group_size(i); ++j) {
                    bool off = rng.next_unit() < 0.2 && j > 0; // keep member 0 in service
                    eents[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                        off ? 0.0 : rng.log_uniform(0.1, 10.0);
                    kents[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                        rng.log_uniform(0.1, 10.0);
                }
            auto check = verify_aggregation_identity(A, Detuning(s, eents),
                                                     GainMatrix(s, kents));
            CHECK(check.residual <= 1e-10);
        }
    }
    SECTION("anchor moves to the first in-service member") {
        BlockStructure s({3, 1});
        PlantMatrix A = random_plant(rng, s);
        Detuning E(s, {{0, 0, 2.0}, {1}});
        GainMatrix K(s, {{5, 5, 0.25}, {1}});
        auto check = verify_aggregation_identity(A, E, K);
        CHECK(check.residual <= 1e-13);
    }
    SECTION("an out-of-service group is a precondition error") {
        BlockStructure s({2, 1});
        PlantMatrix A = random_plant(rng, s);
        Detuning E(s, {{0, 0}, {1}});
        CHECK_THROWS_AS(verify_aggregation_identity(A, E, GainMatrix::all_ones(s)),
                        precondition_error);
    }
}
