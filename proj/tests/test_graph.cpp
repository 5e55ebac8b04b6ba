#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "corp/errors.hpp"
#include "corp/graph.hpp"
#include "corp/linalg.hpp"
#include "oracles.hpp"
#include "random_scenarios.hpp"

using namespace corp;

namespace {

LeaderGraph example_graph() {
    const Mat l_bar{{1, -1, 0, 0}, {0, 0, 0, 0}, {0, -1, 1, 0}, {-1, -1, -1, 3}};
    const Vec gains{1, 1, 0, 0};
    return LeaderGraph::from_laplacian(l_bar, gains);
}

double max_modulus_step(const Mat& h, double mu) {
    double worst = 0.0;
    for (auto z : eigenvalues(h).complex_values()) worst = std::max(worst, std::abs(1.0 - mu * z));
    return worst;
}

}  // namespace

TEST_CASE("decompose the example graph") {
    const auto d = decompose(example_graph());
    CHECK(d.l_bar == Mat{{1, -1, 0, 0}, {0, 0, 0, 0}, {0, -1, 1, 0}, {-1, -1, -1, 3}});
    CHECK(d.delta == Mat::diagonal(Vec{1, 1, 0, 0}));
    CHECK(d.h == d.l_bar + d.delta);
    CHECK(oracle::multiset_distance(eigenvalues(d.h).complex_values(), {{1, 0}, {1, 0}, {2, 0}, {3, 0}}) <= 1e-6);
}

TEST_CASE("isolated followers with leader access give H = I") {
    Mat adj(3, 3);
    adj(1, 0) = adj(2, 0) = 1.0;
    const auto d = decompose(LeaderGraph(adj));
    CHECK(d.h == Mat::identity(2));
    CHECK(paper_mu_bound(d) == doctest::Approx(4.0));
    CHECK(exact_mu_bound(d) == doctest::Approx(2.0));
}

TEST_CASE("diagonal H bounds") {
    Mat adj(3, 3);
    adj(1, 0) = 1.0;
    adj(2, 0) = 2.0;
    const auto d = decompose(LeaderGraph(adj));
    CHECK(d.h == Mat::diagonal(Vec{1, 2}));
    CHECK(paper_mu_bound(d) == doctest::Approx(1.0));
    CHECK(exact_mu_bound(d) == doctest::Approx(1.0));
}

TEST_CASE("example bounds") {
    const auto d = decompose(example_graph());
    CHECK(exact_mu_bound(d) == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
    CHECK(paper_mu_bound(d) == doctest::Approx(4.0 / std::pow(sigma_max(d.h), 2)).epsilon(1e-12));
    CHECK(consensus_contraction(d, 0.1) == doctest::Approx(0.9).epsilon(1e-9));
    CHECK(consensus_contraction(d, 1.0) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("reachability") {
    CHECK(root_reachable(example_graph()));
    CHECK_FALSE(root_reachable(LeaderGraph(Mat(4, 4))));
    Mat chain(4, 4);
    chain(1, 0) = 1.0;
    chain(2, 1) = 1.0;
    chain(3, 2) = 1.0;
    CHECK(root_reachable(LeaderGraph(chain)));
    Mat backwards(4, 4);
    backwards(1, 0) = 1.0;
    backwards(1, 2) = 1.0;
    backwards(2, 3) = 1.0;
    CHECK_FALSE(root_reachable(LeaderGraph(backwards)));
}

TEST_CASE("undirected follower block must be symmetric") {
    Mat adj(3, 3);
    adj(1, 0) = 1.0;
    adj(1, 2) = 1.0;
    CHECK_THROWS_AS(LeaderGraph(adj, Topology::Undirected), InvalidArgument);
    adj(2, 1) = 1.0;
    const LeaderGraph g(adj, Topology::Undirected);
    CHECK(root_reachable(g));
    const auto d = decompose(g);
    CHECK(d.l_bar == Mat{{1, -1}, {-1, 1}});
}

TEST_CASE("invalid adjacency") {
    Mat adj(3, 3);
    adj(1, 0) = -1.0;
    CHECK_THROWS_AS(LeaderGraph{adj}, InvalidArgument);
    Mat loop(3, 3);
    loop(1, 1) = 1.0;
    CHECK_THROWS_AS(LeaderGraph{loop}, InvalidArgument);
    CHECK_THROWS_AS(LeaderGraph(Mat(2, 3)), DimensionError);
}

TEST_CASE("bounds need the root condition") {
    Mat adj(3, 3);
    adj(1, 0) = 1.0;
    const auto d = decompose(LeaderGraph(adj));
    CHECK_THROWS_AS(paper_mu_bound(d), RootConditionError);
    CHECK_THROWS_AS(exact_mu_bound(d), RootConditionError);
}

TEST_CASE("random rooted graphs") {
    std::mt19937 rng(21);
    std::uniform_int_distribution<std::size_t> size(1, 8);
    std::uniform_real_distribution<double> frac(0.01, 0.99);
    for (int trial = 0; trial < 200; ++trial) {
        const LeaderGraph g(testkit::random_rooted_adjacency(rng, size(rng)));
        REQUIRE(root_reachable(g));
        const auto d = decompose(g);
        const Vec ones(g.followers(), 1.0);
        const Vec h1 = d.h * std::span<const double>(ones);
        const Vec d1 = d.delta * std::span<const double>(ones);
        const Vec l1 = d.l_bar * std::span<const double>(ones);
        for (std::size_t i = 0; i < ones.size(); ++i) {
            CHECK(std::abs(l1[i]) <= 1e-12);
            CHECK(std::abs(h1[i] - d1[i]) <= 1e-12);
        }
        CHECK(eigenvalues(d.h).min_real() > 1e-10);
        const double bound = exact_mu_bound(d);
        CHECK(max_modulus_step(d.h, frac(rng) * bound) < 1.0);
        CHECK(max_modulus_step(d.h, 1.01 * bound) >= 1.0 - 1e-9);
        CHECK(consensus_contraction(d, 0.5 * bound) == doctest::Approx(max_modulus_step(d.h, 0.5 * bound)));
    }
}
