#pragma once

// CSV and JSON emitters shared by the CLI and the figure tables.

#include "spintel/analysis.hpp"
#include "spintel/entangle_prep.hpp"
#include "spintel/teleport.hpp"

#include <json.hpp>

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace spintel::io {

inline constexpr int schema_version = 1;

inline constexpr const char* outcome_header =
    "protocol,N,idx1,idx2,idx3,prob,sx_raw,sy_raw,sz_raw,sx_tel,sy_tel,sz_tel,theta_tel,phi_tel,phi_defined";

//! Shortest-safe round-trip text: 17 significant digits.
inline std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_outcome_row(std::ostream& os, const OutcomeRecord& r) {
    os << to_string(r.protocol) << ',' << r.n_atoms << ',' << r.indices[0] << ',' << r.indices[1] << ',';
    if (r.protocol == Protocol::I) os << r.indices[2];
    os << ',' << num(r.probability) << ',' << num(r.raw_spin.sx) << ',' << num(r.raw_spin.sy) << ','
       << num(r.raw_spin.sz) << ',' << num(r.tel_spin.sx) << ',' << num(r.tel_spin.sy) << ',' << num(r.tel_spin.sz)
       << ',' << num(r.tel_angles.theta) << ',' << num(r.tel_angles.phi) << ',' << (r.phi_defined ? 1 : 0) << '\n';
}

inline void write_outcomes_csv(std::ostream& os, const std::vector<OutcomeRecord>& recs) {
    os << outcome_header << '\n';
    for (const auto& r : recs) write_outcome_row(os, r);
}

inline nlohmann::json spin_json(SpinVector s) { return {{"sx", s.sx}, {"sy", s.sy}, {"sz", s.sz}}; }

inline nlohmann::json stats_json(const TeleportStats& st) {
    return {{"avg_spin", spin_json(st.avg_spin)},
            {"avg_angles", {{"theta", st.avg_angles.theta}, {"phi", st.avg_angles.phi}}},
            {"eps_tel", st.eps_tel},
            {"dtheta", st.dtheta},
            {"dphi", st.dphi},
            {"total_probability", st.total_probability}};
}

inline nlohmann::json trace_json(const PrepResult& res, int n_atoms, unsigned long long seed, int max_rounds,
                                 int sequence_cap) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : res.trace.steps)
        steps.push_back({{"round", s.round},
                         {"basis", s.basis == Basis::Z ? "Z" : "X"},
                         {"delta", s.delta},
                         {"unitary_angle", s.unitary_angle},
                         {"fidelity", s.fidelity}});
    return {{"schema_version", schema_version},
            {"N", n_atoms},
            {"seed", seed},
            {"max_rounds", max_rounds},
            {"sequence_cap", sequence_cap},
            {"converged", res.converged},
            {"final_fidelity", res.trace.final_fidelity},
            {"steps", steps}};
}

//! Plain numeric table with a header row.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> columns) : cols_(std::move(columns)) {}

    void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

    void write(std::ostream& os) const {
        for (std::size_t i = 0; i < cols_.size(); ++i) os << (i ? "," : "") << cols_[i];
        os << '\n';
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
            os << '\n';
        }
    }

    std::size_t size() const { return rows_.size(); }

private:
    std::vector<std::string> cols_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace spintel::io
