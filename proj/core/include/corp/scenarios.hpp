#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "corp/graph.hpp"
#include "corp/regulator.hpp"

namespace corp {

/// A tracking network: plants, exosystem, graph and design inputs.
struct TrackingScenario {
    std::vector<Plant> plants;
    Exosystem exo;
    LeaderGraph graph;
    double h = 0.1;
    double mu = 0.1;
    std::vector<Mat> k1;          ///< printed/configured gains; empty when none are given
    std::vector<HoldSpec> holds;  ///< empty: zero-order hold for every agent
};

/// Harmonic-oscillator tracking network with four followers.
TrackingScenario example_4_1();

/// The printed gain [-8.9637, -10.3322, -10.7802].
Mat example_4_1_k1();

struct InitialState {
    std::vector<Vec> x0;
    std::vector<Vec> eta0;
    Vec w0;
};

/// x0 and eta0 uniform in [-1, 1] from a seeded mt19937; w0 from the exosystem.
InitialState random_initial_state(const TrackingScenario& s, std::uint64_t seed);

struct DemandStep {
    double t;
    double value;
};

struct MicrogridParams {
    Vec alpha{561, 310, 78, 561, 78};
    Vec beta{7.92, 7.85, 7.8, 7.92, 7.8};
    Vec p_r0{200, 150, 100, 100, 100};
    Vec a0{0.0005, 0, 0, 0, 0};
    Vec tau_p = Vec(5, 0.1);
    Vec tau_v = Vec(5, 0.1);
    Vec k_p = Vec(5, 0.05);
    Vec k_q = Vec(5, 0.05);
    double k1 = 5.0;
    double k2 = 5.0;
    double omega_d = 50.0;
    double v_d = 1.0;
    Mat l_c{{4, -1, -1, -1, -1}, {-1, 1, 0, 0, 0}, {-1, 0, 1, 0, 0}, {-1, 0, 0, 1, 0}, {-1, 0, 0, 0, 1}};
    std::vector<DemandStep> demand{{0.0, 650.0}, {2.3, 850.0}};
    Vec mu;  ///< empty: 1 / sum_j |l_ij|
    double dispatch_h = 0.01;

    [[nodiscard]] std::size_t grids() const noexcept { return alpha.size(); }
    /// Throws InvalidArgument on inconsistent sizes or non-positive constants.
    void validate() const;
    [[nodiscard]] Vec step_sizes() const;
    /// Demand in force at time t (piecewise constant, right-continuous).
    [[nodiscard]] double demand_at(double t) const;
    /// Step sizes mu_i = sum_j |l_ij| as literally stated for the dispatch law.
    [[nodiscard]] Vec literal_step_sizes() const;
};

struct DispatchState {
    Vec lambda;
    Vec p_r;
};

/// Incremental costs alpha_i P_r0_i + beta_i with P_r = P_r0.
DispatchState initial_dispatch(const MicrogridParams& params);

/// One incremental-cost consensus update followed by the dispatch map.
DispatchState ic_consensus_step(const DispatchState& s, const MicrogridParams& params, double p_main);

/// Affine update Lambda+ = U Lambda + c; returns U.
Mat dispatch_update_matrix(const MicrogridParams& params);

/// Per-grid state [delta, d_omega, d_V, P, Q].
using GridState = Vec;

/// 5x5 flow matrix and input column of grid i.
std::pair<Mat, Mat> microgrid_model(const MicrogridParams& params, std::size_t i);

GridState microgrid_flow(const GridState& state, const MicrogridParams& params, std::size_t i, double p_r_held,
                         double dt);

/// Equilibrium of grid i for held setpoint p_r.
GridState microgrid_equilibrium(double p_r);

struct MicrogridRecord {
    double t = 0.0;
    double p_main = 0.0;
    Vec lambda;
    Vec p_r;
    std::vector<GridState> grids;
};

struct MicrogridTrace {
    std::vector<MicrogridRecord> records;
    DispatchState final_dispatch;
    std::vector<GridState> final_grids;
    double t_final = 0.0;
};

class MicrogridDivergenceError : public Error {
public:
    explicit MicrogridDivergenceError(MicrogridTrace partial)
        : Error("micro-grid state exceeded the divergence bound"), partial_(std::move(partial)) {}
    [[nodiscard]] const MicrogridTrace& partial_trace() const noexcept { return partial_; }

private:
    MicrogridTrace partial_;
};

/// Dispatch at every multiple of dispatch_h, exact grid flow in between.
/// Keeps every `stride`-th dispatch instant plus the final state.
MicrogridTrace run_microgrid(const MicrogridParams& params, double horizon, std::size_t stride = 1);

/// Equal-incremental-cost optimum (P_main + sum beta/alpha) / sum 1/alpha.
double optimal_lambda(const MicrogridParams& params, double p_main);

/// Scenario text file: [graph], [plant.i], [exosystem], [design], [microgrid].
struct ScenarioConfig {
    std::optional<TrackingScenario> tracking;
    std::optional<MicrogridParams> microgrid;
    std::optional<double> horizon;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> k1_source;  ///< "paper" or "synthesize"
};

/// Throws ConfigError carrying the offending line.
ScenarioConfig parse_scenario_config(std::istream& in);
ScenarioConfig load_scenario_config(const std::string& path);

}  // namespace corp
