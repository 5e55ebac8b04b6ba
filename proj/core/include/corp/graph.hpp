#pragma once

#include <cstddef>

#include "corp/mat.hpp"

namespace corp {

/// How follower-to-follower weights are read.
enum class Topology {
    Directed,    ///< a_ij > 0 means follower i listens to node j
    Undirected,  ///< follower block must be symmetric
};

/// Weighted leader-follower graph over nodes {0..N}; node 0 is the exosystem.
/// Row i of the adjacency lists the weights node i receives from its neighbours,
/// so column 0 holds the leader gains a_i0.
class LeaderGraph {
public:
    LeaderGraph(Mat adjacency, Topology topology = Topology::Directed);

    /// Build from a follower Laplacian and the leader-access diagonal.
    static LeaderGraph from_laplacian(const Mat& follower_laplacian, std::span<const double> leader_gains,
                                      Topology topology = Topology::Directed);

    [[nodiscard]] std::size_t followers() const noexcept { return adjacency_.rows() - 1; }
    [[nodiscard]] const Mat& adjacency() const noexcept { return adjacency_; }
    [[nodiscard]] Topology topology() const noexcept { return topology_; }
    [[nodiscard]] double weight(std::size_t i, std::size_t j) const noexcept { return adjacency_(i, j); }

private:
    Mat adjacency_;
    Topology topology_;
};

struct GraphDecomposition {
    Mat l_bar;  ///< follower Laplacian
    Mat delta;  ///< diag(a_10 .. a_N0)
    Mat h;      ///< l_bar + delta
};

GraphDecomposition decompose(const LeaderGraph& g);

/// True iff every follower is reachable from node 0 along positive-weight edges.
bool root_reachable(const LeaderGraph& g);

/// 4 min Re(lambda(H)) / sigma_max(H)^2. Throws RootConditionError.
double paper_mu_bound(const GraphDecomposition& d);

/// min 2 Re(lambda) / |lambda|^2 over the spectrum of H: the supremum of step
/// sizes for which max |1 - mu lambda(H)| < 1. Throws RootConditionError.
double exact_mu_bound(const GraphDecomposition& d);

/// max_i |1 - mu lambda_i(H)|.
double consensus_contraction(const GraphDecomposition& d, double mu);

}  // namespace corp
