#include <doctest.h>

#include <sstream>

#include "corp/errors.hpp"
#include "corp/graph.hpp"
#include "corp/regulator.hpp"
#include "corp/scenarios.hpp"

using namespace corp;

namespace {

ScenarioConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_scenario_config(in);
}

std::size_t error_line(const std::string& text) {
    try {
        (void)parse(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    FAIL("expected a ConfigError");
    return 0;
}

const char* kTracking = R"(# four followers, shared plant
[graph]
laplacian = 1,-1,0,0; 0,0,0,0; 0,-1,1,0; -1,-1,-1,3
leader = 1,1,0,0

[plant]
a = 0,1,0; 0,0,1; -1,2,3
b = 0;0;1
c = 1,1,1
p = 0,0; 0,0; 0,1
q = auto
k1 = -8.9637,-10.3322,-10.7802

[exosystem]
s = 0,-2; 2,0
w0 = 1, 0

[design]
h = 0.1
mu = 0.1
horizon = 12
seed = 99
)";

}  // namespace

TEST_CASE("tracking config reproduces the built-in example") {
    const auto cfg = parse(kTracking);
    REQUIRE(cfg.tracking.has_value());
    CHECK_FALSE(cfg.microgrid.has_value());
    const auto ref = example_4_1();
    const auto& t = *cfg.tracking;
    REQUIRE(t.plants.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(t.plants[i].a == ref.plants[i].a);
        CHECK(t.plants[i].q == ref.plants[i].q);
        CHECK(t.k1[i] == ref.k1[i]);
    }
    CHECK(decompose(t.graph).h == decompose(ref.graph).h);
    CHECK(t.exo.s == ref.exo.s);
    CHECK(t.exo.w0 == ref.exo.w0);
    CHECK(t.holds.empty());
    CHECK(*cfg.horizon == 12.0);
    CHECK(*cfg.seed == 99);
    CHECK_FALSE(cfg.k1_source.has_value());
}

TEST_CASE("per-agent sections override the shared plant") {
    std::string text = kTracking;
    text += "[plant.3]\nb = 0;1;1\n";
    const auto cfg = parse(text);
    CHECK(cfg.tracking->plants[2].b == Mat{{0}, {1}, {1}});
    CHECK(cfg.tracking->plants[1].b == Mat{{0}, {0}, {1}});
}

TEST_CASE("adjacency form and explicit hold") {
    const auto cfg = parse(R"(
[graph]
adjacency = 0,0; 1,0
topology = undirected
[plant.1]
a = 0
b = 1
c = 1
p = 1, 0
k1 = -1
c_h = 1, 0
a_h = 0, 1; 0, 0
[exosystem]
s = 0, -1; 1, 0
[design]
k1 = synthesize
)");
    const auto& t = *cfg.tracking;
    CHECK(t.graph.topology() == Topology::Undirected);
    REQUIRE(t.holds.size() == 1);
    CHECK(t.holds[0].a_h == Mat{{0, 1}, {0, 0}});
    CHECK(*cfg.k1_source == "synthesize");
    CHECK((t.plants[0].c * solve_regulator_pair(t.plants[0], t.exo) + t.plants[0].q).max_abs() <= 1e-12);
}

TEST_CASE("microgrid section") {
    const auto cfg = parse(R"(
[microgrid]
k_p = 0.1
demand = 0:650, 1.5:700, 3:900
mu = literal
dispatch_h = 0.02
)");
    REQUIRE(cfg.microgrid.has_value());
    const auto& p = *cfg.microgrid;
    CHECK(p.k_p == Vec(5, 0.1));
    CHECK(p.demand.size() == 3);
    CHECK(p.demand_at(2.0) == 700.0);
    CHECK(p.mu == p.literal_step_sizes());
    CHECK(p.dispatch_h == 0.02);
    CHECK_FALSE(cfg.tracking.has_value());
}

TEST_CASE("line-numbered diagnostics") {
    CHECK(error_line("[graph]\nadjacency = 0,0; 1,0\nweird line\n") == 3);
    CHECK(error_line("[graph]\nadjacency = 0,0;1,0\n[graph]\n") == 3);
    CHECK(error_line("[microgrid]\nk1 = fast\n") == 2);
    CHECK(error_line("[microgrid]\nbogus = 1\n") == 2);
    CHECK(error_line("[nonsense]\n") == 1);
    CHECK(error_line("key = 1\n") == 1);
    CHECK(error_line("[design]\nk1 = lucky\n") == 2);
    CHECK(error_line("[microgrid]\nalpha = 1,2\nbeta = 1,2,3\n") == 3);
    CHECK(error_line("[microgrid]\nk1 = 1\nk1 = 2\n") == 3);
    CHECK(error_line("[microgrid]\ndemand = 0:650, 2.3\n") == 2);
}

TEST_CASE("non-square A names the agent") {
    std::string text = kTracking;
    text += "[plant.2]\na = 0,1; 0,0; 1,1\n";
    try {
        (void)parse(text);
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line() > 20);
        CHECK(std::string(e.what()).find("agent 2") != std::string::npos);
    }
}

TEST_CASE("structural errors") {
    CHECK_THROWS_AS(parse(""), ConfigError);
    CHECK_THROWS_AS(parse("[exosystem]\ns = 0\n"), ConfigError);
    std::string extra = kTracking;
    extra += "[plant.9]\na = 1\n";
    CHECK_THROWS_AS(parse(extra), ConfigError);
    CHECK_THROWS_AS(load_scenario_config("/nonexistent/corp.ini"), ConfigError);
}

#ifdef CORP_SOURCE_DIR
TEST_CASE("shipped configs match the built-in scenarios") {
    const auto tracking = load_scenario_config(std::string(CORP_SOURCE_DIR) + "/configs/example41.ini");
    const auto ref = example_4_1();
    REQUIRE(tracking.tracking.has_value());
    for (std::size_t i = 0; i < 4; ++i) CHECK(tracking.tracking->plants[i].q == ref.plants[i].q);
    CHECK(*tracking.horizon == 30.0);

    const auto grid = load_scenario_config(std::string(CORP_SOURCE_DIR) + "/configs/microgrid.ini");
    REQUIRE(grid.microgrid.has_value());
    const MicrogridParams defaults;
    CHECK(grid.microgrid->alpha == defaults.alpha);
    CHECK(grid.microgrid->l_c == defaults.l_c);
    CHECK(grid.microgrid->step_sizes() == defaults.step_sizes());
    CHECK(grid.microgrid->demand.size() == 2);
}
#endif
