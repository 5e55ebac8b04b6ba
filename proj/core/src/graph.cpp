#include "corp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "corp/errors.hpp"
#include "corp/linalg.hpp"

namespace corp {

namespace {

constexpr double kRootMargin = 1e-10;

Spectrum rooted_spectrum(const GraphDecomposition& d) {
    auto spec = eigenvalues(d.h);
    if (spec.size() == 0 || spec.min_real() <= kRootMargin) {
        throw RootConditionError("H has an eigenvalue with non-positive real part; node 0 does not root a spanning tree");
    }
    return spec;
}

}  // namespace

LeaderGraph::LeaderGraph(Mat adjacency, Topology topology)
    : adjacency_(std::move(adjacency)), topology_(topology) {
    if (!adjacency_.is_square() || adjacency_.rows() < 2) {
        throw DimensionError("adjacency must be (N+1)x(N+1) with N >= 1");
    }
    const std::size_t n = adjacency_.rows();
    for (std::size_t i = 0; i < n; ++i) {
        if (adjacency_(i, i) != 0.0) throw InvalidArgument("adjacency diagonal must be zero");
        for (std::size_t j = 0; j < n; ++j) {
            if (adjacency_(i, j) < 0.0) throw InvalidArgument("adjacency weights must be nonnegative");
        }
    }
    if (topology_ == Topology::Undirected) {
        for (std::size_t i = 1; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (adjacency_(i, j) != adjacency_(j, i)) {
                    throw InvalidArgument("undirected graph requires a symmetric follower block");
                }
    }
}

LeaderGraph LeaderGraph::from_laplacian(const Mat& follower_laplacian, std::span<const double> leader_gains,
                                        Topology topology) {
    const std::size_t n = follower_laplacian.rows();
    if (!follower_laplacian.is_square() || leader_gains.size() != n) {
        throw DimensionError("from_laplacian: Laplacian must be N x N with N leader gains");
    }
    Mat adj(n + 1, n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        adj(i + 1, 0) = leader_gains[i];
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) adj(i + 1, j + 1) = -follower_laplacian(i, j);
    }
    return LeaderGraph(std::move(adj), topology);
}

GraphDecomposition decompose(const LeaderGraph& g) {
    const std::size_t n = g.followers();
    GraphDecomposition d{Mat(n, n), Mat(n, n), Mat(n, n)};
    for (std::size_t i = 0; i < n; ++i) {
        double degree = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double a = g.weight(i + 1, j + 1);
            d.l_bar(i, j) = -a;
            degree += a;
        }
        d.l_bar(i, i) = degree;
        d.delta(i, i) = g.weight(i + 1, 0);
    }
    d.h = d.l_bar + d.delta;
    return d;
}

bool root_reachable(const LeaderGraph& g) {
    const std::size_t nodes = g.followers() + 1;
    const bool undirected = g.topology() == Topology::Undirected;
    std::vector<bool> seen(nodes, false);
    std::deque<std::size_t> frontier{0};
    seen[0] = true;
    while (!frontier.empty()) {
        const std::size_t from = frontier.front();
        frontier.pop_front();
        for (std::size_t to = 1; to < nodes; ++to) {
            if (seen[to]) continue;
            // leader edges are always 0 -> i; follower edges run both ways when undirected
            const bool edge = g.weight(to, from) > 0.0 || (undirected && from != 0 && g.weight(from, to) > 0.0);
            if (edge) {
                seen[to] = true;
                frontier.push_back(to);
            }
        }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool s) { return s; });
}

double paper_mu_bound(const GraphDecomposition& d) {
    const auto spec = rooted_spectrum(d);
    const double s = sigma_max(d.h);
    return 4.0 * spec.min_real() / (s * s);
}

double exact_mu_bound(const GraphDecomposition& d) {
    const auto spec = rooted_spectrum(d);
    double best = HUGE_VAL;
    for (const auto& e : spec.values) {
        best = std::min(best, 2.0 * e.value.real() / std::norm(e.value));
    }
    return best;
}

double consensus_contraction(const GraphDecomposition& d, double mu) {
    double worst = 0.0;
    for (const auto& e : eigenvalues(d.h).values) worst = std::max(worst, std::abs(1.0 - mu * e.value));
    return worst;
}

}  // namespace corp
