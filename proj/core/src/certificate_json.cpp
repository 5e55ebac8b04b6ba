#include <json.hpp>

#include "corp/regulator.hpp"

namespace corp {

namespace {

using nlohmann::ordered_json;

ordered_json mat_json(const Mat& m) {
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

ordered_json check_json(const AssumptionCheck& c) { return {{"pass", c.pass}, {"diagnostic", c.diagnostic}}; }

ordered_json certificate_object(const Certificate& c) {
    ordered_json j;
    j["verdict"] = c.verdict ? "pass" : "fail";
    j["rho_agent"] = c.rho_agent;
    j["rho_eta"] = c.rho_eta;
    j["residuals"] = c.residuals;
    j["assumptions"] = {{"A1", check_json(c.assumptions.a1)},
                        {"A2", check_json(c.assumptions.a2)},
                        {"A3", check_json(c.assumptions.a3)},
                        {"A4", check_json(c.assumptions.a4)}};
    j["mu"] = c.mu;
    j["mu_paper_bound"] = c.mu_paper_bound;
    j["mu_exact_bound"] = c.mu_exact_bound;
    j["h"] = c.h;
    j["notes"] = c.notes;
    return j;
}

}  // namespace

std::string certificate_to_json(const Certificate& c, int indent) { return certificate_object(c).dump(indent); }

std::string design_to_json(const CompensatorDesign& d, const Certificate& c, int indent) {
    ordered_json j;
    j["h"] = d.h;
    j["mu"] = d.mu;
    ordered_json agents = ordered_json::array();
    for (std::size_t i = 0; i < d.agents(); ++i) {
        ordered_json a;
        a["agent"] = i + 1;
        a["K1"] = mat_json(d.k1[i]);
        a["K2"] = mat_json(d.k2[i]);
        a["Pi"] = mat_json(d.pi[i]);
        if (i < d.holds.size()) {
            a["hold"] = {{"C_H", mat_json(d.holds[i].c_h)}, {"A_H", mat_json(d.holds[i].a_h)}};
        }
        agents.push_back(std::move(a));
    }
    j["agents"] = std::move(agents);
    j["certificate"] = certificate_object(c);
    return j.dump(indent);
}

}  // namespace corp
