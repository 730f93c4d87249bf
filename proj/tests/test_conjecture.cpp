#include <catch2/catch_amalgamated.hpp>

#include "nsqstab/archive.hpp"
#include "nsqstab/conjecture.hpp"

using namespace nsqstab;
using Catch::Approx;

TEST_CASE("random_instance determinism and rejection") {
    InstanceSpec spec;
    spec.structure = BlockStructure({1, 1});
    spec.dist = EntryDistribution::kSymmetric;
    spec.seed = 99;
    SECTION("same spec and index give bit-identical matrices") {
        PlantMatrix a = random_instance(spec, 3);
        PlantMatrix b = random_instance(spec, 3);
        CHECK(a.data == b.data);
        PlantMatrix c = random_instance(spec, 4);
        CHECK(a.data != c.data);
    }
    SECTION("rejection delivers a VL-stable square instance") {
        PlantMatrix a = random_instance(spec, 0);
        auto v = find_common_D(full_squared_matrices(a));
        CHECK(v.status == Feasibility::FEASIBLE);
    }
    SECTION("retry exhaustion is an explicit error") {
        InstanceSpec dead = spec;
        dead.dist = EntryDistribution::kUniform;
        dead.amplitude = 0.0; // every draw is the zero matrix: never feasible
        dead.max_retries = 3;
        CHECK_THROWS_AS(random_instance(dead, 0), numerical_error);
    }
}

TEST_CASE("search_conjecture1") {
    InstanceSpec spec;
    spec.structure = BlockStructure({1, 1});
    spec.dist = EntryDistribution::kUniform;
    spec.amplitude = 1.5;
    spec.seed = 2024;
    SearchOptions opt;
    opt.solve.budget = 300;
    opt.falsify_budget = 120;

    SECTION("budget zero yields the empty list") {
        opt.budget = 0;
        CHECK(search_conjecture1(spec, opt).empty());
    }
    SECTION("square structures provably yield no candidates") {
        opt.budget = 50;
        CHECK(search_conjecture1(spec, opt).empty());
    }
    SECTION("redundant structure: deterministic and expected-empty") {
        InstanceSpec red = spec;
        red.structure = BlockStructure({2, 1});
        red.seed = 7;
        opt.budget = 25;
        auto r1 = search_conjecture1(red, opt);
        auto r2 = search_conjecture1(red, opt);
        REQUIRE(r1.size() == r2.size());
        for (std::size_t i = 0; i < r1.size(); ++i)
            CHECK(candidate_to_line(r1[i]) == candidate_to_line(r2[i]));
        for (const auto& cand : r1) CHECK(reverify_candidate(cand, opt.solve, opt.tol));
    }
    SECTION("worker count does not change the result") {
        InstanceSpec red = spec;
        red.structure = BlockStructure({2, 1});
        opt.budget = 16;
        auto r1 = search_conjecture1(red, opt);
        SearchOptions par = opt;
        par.jobs = 4;
        auto r2 = search_conjecture1(red, par);
        REQUIRE(r1.size() == r2.size());
        for (std::size_t i = 0; i < r1.size(); ++i)
            CHECK(candidate_to_line(r1[i]) == candidate_to_line(r2[i]));
    }
}

TEST_CASE("reverify_candidate rejects fabricated violations") {
    Mat data(2, 3);
    data << 1, 1, 0, 0, 0, 1; // identity columns: condition actually holds
    PlantMatrix A(BlockStructure({2, 1}), data);
    CounterexampleCandidate fake;
    fake.A = A;
    auto verdicts = find_individual_Ds(full_squared_matrices(A));
    for (const auto& v : verdicts) fake.individual_certs.push_back(*v.certificate);
    fake.witness_K = GainMatrix::all_ones(A.structure);
    fake.witness_E = Detuning::all_ones(A.structure);
    fake.witness_subset = {0};
    fake.violation_margin = -0.5; // claimed, but the margin is really +1
    fake.matrix_hash = plant_hash(A);
    CHECK_FALSE(reverify_candidate(fake));
}

TEST_CASE("special_case_one_redundant_channel") {
    SECTION("redundancy in one channel with feasible certificates") {
        InstanceSpec spec;
        spec.structure = BlockStructure({2, 1});
        spec.dist = EntryDistribution::kSymmetric;
        spec.seed = 5;
        PlantMatrix A = random_instance(spec, 1);
        auto r = special_case_one_redundant_channel(A);
        CHECK(r.individually_feasible);
        CHECK(r.dus.verdict == DusVerdict::HOLDS_ON_SAMPLES);
        CHECK(r.claim_holds);
    }
    SECTION("structure preconditions") {
        Mat d22 = Mat::Zero(2, 4);
        CHECK_THROWS_AS(
            special_case_one_redundant_channel(PlantMatrix(BlockStructure({2, 2}), d22)),
            precondition_error);
        Mat d11 = Mat::Zero(2, 2);
        CHECK_THROWS_AS(
            special_case_one_redundant_channel(PlantMatrix(BlockStructure({1, 1}), d11)),
            precondition_error);
    }
}

TEST_CASE("candidate archive lines round-trip") {
    Mat data(2, 3);
    data << 0.5, -1.25, 2.0, 0.125, 3.5, -0.75;
    PlantMatrix A(BlockStructure({2, 1}), data);
    CounterexampleCandidate cand;
    cand.A = A;
    DiagonalCertificate cert;
    cert.d = Vec::Ones(2);
    cert.margin = 0.25;
    cand.individual_certs = {cert, cert};
    cand.witness_K = GainMatrix(A.structure, {{1.0, 0.5}, {2.0}});
    cand.witness_E = Detuning(A.structure, {{0.0, 4.0}, {1.0}});
    cand.witness_subset = {0, 1};
    cand.violation_margin = -0.125;
    cand.matrix_hash = plant_hash(A);

    std::string line = candidate_to_line(cand);
    CounterexampleCandidate back = candidate_from_line(line);
    CHECK(back.A.data == cand.A.data);
    CHECK(back.witness_K.k == cand.witness_K.k);
    CHECK(back.witness_E.eps == cand.witness_E.eps);
    CHECK(back.witness_subset == cand.witness_subset);
    CHECK(back.violation_margin == cand.violation_margin);
    CHECK(back.matrix_hash == cand.matrix_hash);
    CHECK(candidate_to_line(back) == line);
}
