#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <json.hpp>

#include "corp/errors.hpp"
#include "corp/linalg.hpp"
#include "corp/regulator.hpp"
#include "corp/scenarios.hpp"
#include "oracles.hpp"
#include "random_scenarios.hpp"

using namespace corp;
using oracle::max_abs_diff;

namespace {

LeaderGraph single_agent_graph() {
    Mat adj(2, 2);
    adj(1, 0) = 1.0;
    return LeaderGraph(adj);
}

Exosystem harmonic(double omega) { return Exosystem{Mat{{0, -omega}, {omega, 0}}, Vec{1, 0}}; }

std::vector<HoldBlocks> zoh_blocks(const TrackingScenario& s, const CompensatorDesign& d) {
    std::vector<HoldBlocks> out;
    for (std::size_t i = 0; i < s.plants.size(); ++i)
        out.push_back(hold_blocks(s.plants[i], d.holds[i], d.k1[i], d.k2[i]));
    return out;
}

CompensatorDesign example_design() {
    const auto s = example_4_1();
    return build_zoh_design(s.plants, s.exo, s.graph, s.h, {s.mu, s.k1});
}

}  // namespace

TEST_SUITE("assumptions") {
    TEST_CASE("example data pass all four") {
        const auto s = example_4_1();
        const auto r = check_assumptions(s.plants, s.exo, s.graph, s.h);
        CHECK(r.a1.pass);
        CHECK(r.a2.pass);
        CHECK(r.a3.pass);
        CHECK(r.a4.pass);
        CHECK(r.all_pass());
    }

    TEST_CASE("stable exosystem fails A1") {
        const auto s = example_4_1();
        const Exosystem exo{-1.0 * Mat::identity(2), Vec{1, 0}};
        const auto r = check_assumptions(s.plants, exo, s.graph, s.h);
        CHECK_FALSE(r.a1.pass);
        CHECK_FALSE(r.all_pass());
    }

    TEST_CASE("unrooted graph fails A2") {
        auto s = example_4_1();
        Mat adj = s.graph.adjacency();
        adj(1, 0) = adj(2, 0) = 0.0;
        const auto r = check_assumptions(s.plants, s.exo, LeaderGraph(adj), s.h);
        CHECK_FALSE(r.a2.pass);
    }

    TEST_CASE("eigenvalue gap of 2 pi / h is pathological") {
        const double h = 0.1;
        const double w = std::numbers::pi / h;
        Plant p{Mat{{0, w}, {-w, 0}}, Mat{{0}, {1}}, Mat{{1, 0}}, Mat(2, 2), Mat(1, 2)};
        const std::vector<Plant> plants{p};
        const auto r = check_assumptions(plants, harmonic(1.0), single_agent_graph(), h);
        CHECK_FALSE(r.a3.pass);
        CHECK(r.a3.diagnostic.find("agent 1") != std::string::npos);
        CHECK(check_assumptions(plants, harmonic(1.0), single_agent_graph(), 0.9 * h).a3.pass);
    }

    TEST_CASE("uncontrollable pair fails A3") {
        Plant p{Mat{{1, 0}, {0, 2}}, Mat{{1}, {0}}, Mat{{1, 1}}, Mat(2, 2), Mat(1, 2)};
        const std::vector<Plant> plants{p};
        CHECK_FALSE(check_assumptions(plants, harmonic(1.0), single_agent_graph(), 0.1).a3.pass);
    }

    TEST_CASE("zero output map fails A4") {
        Plant p{Mat{{0, 1}, {0, 0}}, Mat{{0}, {1}}, Mat(1, 2), Mat(2, 2), Mat(1, 2)};
        const std::vector<Plant> plants{p};
        CHECK_FALSE(check_assumptions(plants, harmonic(1.0), single_agent_graph(), 0.1).a4.pass);
    }

    TEST_CASE("agent count must match the graph") {
        const auto s = example_4_1();
        const std::vector<Plant> three(s.plants.begin(), s.plants.begin() + 3);
        CHECK_THROWS_AS(check_assumptions(three, s.exo, s.graph, s.h), DimensionError);
    }
}

TEST_SUITE("regulator equations") {
    TEST_CASE("example solution") {
        const auto s = example_4_1();
        const Mat pi = solve_regulator_pair(s.plants[0], s.exo);
        const Mat exact = (1.0 / 313.0) * Mat{{12, 13}, {26, -24}, {-48, -52}};
        CHECK(max_abs_diff(pi, exact) <= 1e-12);
    }

    TEST_CASE("no disturbance gives zero") {
        Plant p{Mat{{0, 1}, {-2, -3}}, Mat{{0}, {1}}, Mat{{1, 0}}, Mat(2, 2), Mat(1, 2)};
        CHECK(solve_regulator_pair(p, harmonic(1.0)).max_abs() == 0.0);
    }

    TEST_CASE("constructive oracle on random plants") {
        std::mt19937 rng(31);
        for (int trial = 0; trial < 30; ++trial) {
            const auto net = testkit::random_network(rng);
            for (const auto& p : net.plants) {
                const Mat star = solve_sylvester(p.a, net.exo.s, p.p);
                const Mat pi = solve_regulator_pair(p, net.exo);
                CHECK(max_abs_diff(pi, star) <= 1e-10 * (1.0 + star.max_abs()));
                CHECK((pi * net.exo.s - p.a * pi - p.p).norm_inf() <= 1e-10);
                CHECK((p.c * pi + p.q).norm_inf() <= 1e-10);
            }
        }
    }

    TEST_CASE("wrong Q is infeasible") {
        auto p = example_4_1().plants[0];
        p.q = Mat{{1, 0}};
        CHECK_THROWS_AS(solve_regulator_pair(p, example_4_1().exo), RegulationInfeasible);
    }

    TEST_CASE("plant validation") {
        Plant p{Mat(2, 3), Mat(2, 1), Mat(1, 3), Mat(2, 2), Mat(1, 2)};
        CHECK_THROWS_AS(p.validate(2), DimensionError);
        Plant ok = example_4_1().plants[0];
        CHECK_NOTHROW(ok.validate(2));
        CHECK_THROWS_AS(ok.validate(3), DimensionError);
    }
}

TEST_SUITE("discretize") {
    TEST_CASE("A = 0") {
        Plant p{Mat(2, 2), Mat{{1}, {2}}, Mat{{1, 0}}, Mat(2, 2), Mat(1, 2)};
        const auto d = discretize(p, harmonic(1.0), 0.3);
        CHECK(d.a_d == Mat::identity(2));
        CHECK(max_abs_diff(d.b_d, 0.3 * p.b) <= 1e-15);
    }

    TEST_CASE("example plant against quadrature") {
        const auto s = example_4_1();
        const auto& p = s.plants[0];
        const auto d = discretize(p, s.exo, 0.1);
        CHECK(max_abs_diff(d.a_d, oracle::taylor_expm(p.a, 0.1)) <= 1e-13);
        CHECK(max_abs_diff(d.b_d, oracle::simpson_convolution(p.a, p.b, Mat(1, 1), 0.1)) <= 1e-8);
        CHECK(max_abs_diff(d.p_d, oracle::simpson_convolution(p.a, p.p, s.exo.s, 0.1)) <= 1e-8);
    }

    TEST_CASE("S = 0 follows the input-matrix path") {
        const auto p0 = example_4_1().plants[0];
        const Exosystem still{Mat(2, 2), Vec{1, 0}};
        const auto d = discretize(p0, still, 0.2);
        const Mat via_b = exp_convolution(p0.a, p0.p, Mat(2, 2), 0.2);
        CHECK(max_abs_diff(d.p_d, via_b) == 0.0);
        Plant shifted = p0;
        shifted.b = p0.p;
        CHECK(max_abs_diff(discretize(shifted, still, 0.2).b_d, d.p_d) <= 1e-15);
    }

    TEST_CASE("non-positive h") { CHECK_THROWS_AS(discretize(example_4_1().plants[0], harmonic(1), 0.0), InvalidArgument); }
}

TEST_SUITE("gain synthesis") {
    TEST_CASE("already stable scalar with no input") {
        const Mat k = synthesize_k1(Mat{{0.5}}, Mat{{0.0}});
        CHECK(k == Mat{{0.0}});
        CHECK(spectral_radius(Mat{{0.5}} + Mat{{0.0}} * k) == doctest::Approx(0.5));
    }

    TEST_CASE("printed gain stabilizes the example") {
        const auto s = example_4_1();
        const auto d = discretize(s.plants[0], s.exo, s.h);
        CHECK(spectral_radius(d.a_d + d.b_d * example_4_1_k1()) < 1.0);
    }

    TEST_CASE("random controllable pairs") {
        std::mt19937 rng(32);
        int tested = 0;
        while (tested < 30) {
            const Mat a = oracle::random_matrix(rng, 3, 3, -1.5, 1.5);
            const Mat b = oracle::random_matrix(rng, 3, 1);
            if (!controllable(a, b)) continue;
            const Mat k = synthesize_k1(a, b);
            CHECK(spectral_radius(a + b * k) < 1.0 - 1e-6);
            CHECK(oracle::power_radius(a + b * k) < 1.0);
            ++tested;
        }
    }

    TEST_CASE("unstabilizable pair") {
        CHECK_THROWS_AS(synthesize_k1(Mat{{2, 0}, {0, 0.5}}, Mat{{0}, {1}}), SynthesisError);
    }

    TEST_CASE("controllability test") {
        CHECK(controllable(Mat{{0, 1}, {0, 0}}, Mat{{0}, {1}}));
        CHECK_FALSE(controllable(Mat{{1, 0}, {0, 1}}, Mat{{1}, {1}}));
    }
}

TEST_SUITE("certificates") {
    TEST_CASE("example design passes with rho_eta = 0.9") {
        const auto s = example_4_1();
        const auto r = design_zoh(s.plants, s.exo, s.graph, s.h, {s.mu, s.k1});
        CHECK(r.certificate.verdict);
        CHECK(r.certificate.rho_eta == doctest::Approx(0.9).epsilon(1e-7));
        CHECK(r.certificate.mu_exact_bound == doctest::Approx(2.0 / 3.0));
        for (double rho : r.certificate.rho_agent) CHECK(rho < 1.0);
        for (double res : r.certificate.residuals) CHECK(res <= kResidualTolerance);
        for (std::size_t i = 0; i < r.design.agents(); ++i) {
            CHECK((r.design.k2[i] + r.design.k1[i] * r.design.pi[i]).max_abs() == 0.0);
        }
    }

    TEST_CASE("synthesized gains also pass") {
        const auto s = example_4_1();
        const auto r = design_zoh(s.plants, s.exo, s.graph, s.h);
        CHECK(r.certificate.verdict);
        CHECK(r.design.mu == doctest::Approx(1.0 / 3.0));
    }

    TEST_CASE("mu = 1 is rejected with rho_eta = 2") {
        const auto s = example_4_1();
        try {
            (void)design_zoh(s.plants, s.exo, s.graph, s.h, {1.0, s.k1});
            FAIL("expected rejection");
        } catch (const CertificateRejected& e) {
            CHECK_FALSE(e.certificate().verdict);
            CHECK(e.certificate().rho_eta == doctest::Approx(2.0).epsilon(1e-7));
        }
    }

    TEST_CASE("mu either side of the exact bound") {
        const auto s = example_4_1();
        auto d = example_design();
        d.mu = 0.999 * 2.0 / 3.0;
        CHECK(certify_zoh(d, s.plants, s.exo, s.graph).rho_eta < 1.0);
        d.mu = 1.001 * 2.0 / 3.0;
        const auto c = certify_zoh(d, s.plants, s.exo, s.graph);
        CHECK(c.rho_eta >= 1.0);
        CHECK_FALSE(c.verdict);
    }

    TEST_CASE("zero gain on an unstable plant fails") {
        const auto s = example_4_1();
        auto d = example_design();
        for (auto& k : d.k1) k = Mat(1, 3);
        const auto c = certify_zoh(d, s.plants, s.exo, s.graph);
        CHECK_FALSE(c.verdict);
        CHECK(c.rho_agent[0] >= 1.0);
    }

    TEST_CASE("single agent passes for any mu in (0, 2)") {
        Plant p{Mat{{0, 1}, {0, 0}}, Mat{{0}, {1}}, Mat{{1, 0}}, Mat(2, 2), Mat(1, 2)};
        p.p = Mat{{0, 0}, {1, 0}};
        p.q = -(p.c * solve_sylvester(p.a, harmonic(1).s, p.p));
        const std::vector<Plant> plants{p};
        for (double mu : {0.1, 1.0, 1.9}) {
            const auto r = design_zoh(plants, harmonic(1), single_agent_graph(), 0.1, {mu, {}});
            CHECK(r.certificate.rho_eta == doctest::Approx(std::abs(1.0 - mu)).epsilon(1e-9));
        }
    }

    TEST_CASE("uncontrollable agent is named") {
        auto s = example_4_1();
        s.plants[2].b = Mat(3, 1);
        try {
            (void)build_zoh_design(s.plants, s.exo, s.graph, s.h);
            FAIL("expected an agent error");
        } catch (const AgentError& e) {
            CHECK(e.agent() == 2);
            CHECK(std::string(e.what()).find("agent 3") == 0);
        }
    }

    TEST_CASE("JSON fields") {
        const auto s = example_4_1();
        const auto r = design_zoh(s.plants, s.exo, s.graph, s.h, {s.mu, s.k1});
        const auto j = nlohmann::json::parse(certificate_to_json(r.certificate));
        for (const char* key : {"verdict", "rho_agent", "rho_eta", "residuals", "assumptions", "mu", "mu_paper_bound",
                                "mu_exact_bound", "h"})
            CHECK(j.contains(key));
        CHECK(j["verdict"] == "pass");
        CHECK(j["rho_agent"].size() == 4);
        for (const char* a : {"A1", "A2", "A3", "A4"}) CHECK(j["assumptions"].contains(a));
        const auto dj = nlohmann::json::parse(design_to_json(r.design, r.certificate));
        CHECK(dj.is_object());
    }
}

TEST_SUITE("general hold") {
    TEST_CASE("zero-order blocks reproduce the ZOH verdict") {
        const auto s = example_4_1();
        const auto d = example_design();
        const auto zoh = certify_zoh(d, s.plants, s.exo, s.graph);
        const auto blocks = zoh_blocks(s, d);
        const auto gh = certify_general_hold(blocks, s.exo, s.graph, s.h, s.mu);
        CHECK(gh.certificate.verdict == zoh.verdict);
        CHECK(gh.certificate.rho_eta == doctest::Approx(zoh.rho_eta));
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(gh.certificate.rho_agent[i] == doctest::Approx(zoh.rho_agent[i]).epsilon(1e-9));
            CHECK(gh.output_residual[i] <= 1e-6);
            CHECK(gh.separation[i] > 0.0);
        }
        CHECK_FALSE(gh.certificate.notes.empty());
    }

    TEST_CASE("post-jump manifold is the ZOH one in the plant block") {
        const auto s = example_4_1();
        const auto d = example_design();
        const auto gh = certify_general_hold(zoh_blocks(s, d), s.exo, s.graph, s.h, s.mu);
        const Mat pi_x = gh.pi_plus[0].block(0, 0, 3, 2);
        CHECK(max_abs_diff(pi_x, d.pi[0]) <= 1e-8);
    }

    TEST_CASE("M = 0 gives radius zero") {
        HoldBlocks b;
        b.f = Mat{{0, 1}, {0, 0}};
        b.g = Mat(2, 2);
        b.m = Mat(2, 2);
        b.gamma = Mat(2, 2);
        b.c_hat = Mat(1, 2);
        b.q = Mat(1, 2);
        b.states = 1;
        const std::vector<HoldBlocks> blocks{b};
        const auto gh = certify_general_hold(blocks, harmonic(1), single_agent_graph(), 0.1, 0.5);
        CHECK(gh.certificate.rho_agent[0] == 0.0);
        CHECK(gh.separation[0] == doctest::Approx(1.0));
    }

    TEST_CASE("separation violation") {
        HoldBlocks b;
        b.f = Mat{{0, -1}, {1, 0}};
        b.g = Mat(2, 2);
        b.m = Mat::identity(2);
        b.gamma = Mat(2, 2);
        b.c_hat = Mat(1, 2);
        b.q = Mat(1, 2);
        b.states = 2;
        const std::vector<HoldBlocks> blocks{b};
        CHECK_THROWS_AS(certify_general_hold(blocks, harmonic(1), single_agent_graph(), 0.1, 0.5), SeparationError);
    }

    TEST_CASE("first-order hold blocks") {
        const auto s = example_4_1();
        const HoldSpec foh{Mat{{1, 0}}, Mat{{0, 1}, {0, 0}}};
        const auto& p = s.plants[0];
        const Mat k1 = Mat{{-8.0, -9.0, -10.0}, {0, 0, 0}};
        const auto pi = solve_regulator_pair(p, s.exo);
        const auto b = hold_blocks(p, foh, k1, -(k1 * pi));
        CHECK(b.f.rows() == 5);
        CHECK(b.f.block(0, 3, 3, 2) == p.b * foh.c_h);
        CHECK(b.m.block(3, 0, 2, 3) == k1);
        CHECK_THROWS_AS(hold_blocks(p, foh, Mat(1, 3), Mat(1, 2)), DimensionError);
    }
}
