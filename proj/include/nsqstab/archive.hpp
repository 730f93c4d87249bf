#pragma once

#include <string>

#include "json.hpp"
#include "nsqstab/conjecture.hpp"
#include "nsqstab/io.hpp"

namespace nsqstab {

/// One archive line per candidate: a self-contained JSON document from which
/// the candidate can be re-verified without the producing process.
inline std::string candidate_to_line(const CounterexampleCandidate& cand) {
    JsonWriter w;
    w.begin_object();
    w.key("matrix_hash").value(hex64(cand.matrix_hash));
    w.key("p").begin_array();
    for (int pi : cand.A.structure.sizes()) w.value(pi);
    w.end_array();
    w.key("A");
    json_matrix(w, cand.A.data);
    w.key("individual_certs").begin_array();
    for (const auto& cert : cand.individual_certs) {
        w.begin_object();
        w.key("d").value(cert.d);
        w.key("margin").value(cert.margin);
        w.end_object();
    }
    w.end_array();
    w.key("witness_K");
    json_block_entries(w, cand.witness_K.k);
    w.key("witness_E");
    json_block_entries(w, cand.witness_E.eps);
    w.key("witness_subset").value_indices(cand.witness_subset);
    w.key("violation_margin").value(cand.violation_margin);
    w.end_object();
    return w.str();
}

inline CounterexampleCandidate candidate_from_line(const std::string& line) {
    nlohmann::json j = nlohmann::json::parse(line);
    BlockStructure structure(j.at("p").get<std::vector<int>>());
    auto rows = j.at("A").get<std::vector<std::vector<double>>>();
    Mat data(static_cast<Eigen::Index>(rows.size()),
             static_cast<Eigen::Index>(rows.empty() ? 0 : rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];

    CounterexampleCandidate cand;
    cand.A = PlantMatrix(structure, data);
    for (const auto& cert : j.at("individual_certs")) {
        auto dv = cert.at("d").get<std::vector<double>>();
        DiagonalCertificate c;
        c.d = Eigen::Map<const Vec>(dv.data(), static_cast<Eigen::Index>(dv.size()));
        c.margin = cert.at("margin").get<double>();
        cand.individual_certs.push_back(std::move(c));
    }
    cand.witness_K =
        GainMatrix(structure, j.at("witness_K").get<std::vector<std::vector<double>>>());
    cand.witness_E =
        Detuning(structure, j.at("witness_E").get<std::vector<std::vector<double>>>());
    for (int v : j.at("witness_subset").get<std::vector<int>>())
        cand.witness_subset.push_back(v - 1);
    cand.violation_margin = j.at("violation_margin").get<double>();
    cand.matrix_hash = plant_hash(cand.A);
    return cand;
}

} // namespace nsqstab
