#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "corp/errors.hpp"
#include "corp/graph.hpp"
#include "corp/regulator.hpp"

namespace corp {

struct AgentState {
    Vec x;    ///< plant state
    Vec xi;   ///< hold state
    Vec eta;  ///< local exosystem estimate
};

struct NetworkState {
    std::vector<AgentState> agents;
    Vec w;
    double t = 0.0;
};

enum class Phase { Flow, PreJump, PostJump };

const char* phase_name(Phase p) noexcept;

struct TraceRecord {
    double t = 0.0;
    Phase phase = Phase::Flow;
    NetworkState state;
    std::vector<Vec> errors;  ///< e_i = C_i x_i + Q_i w
};

struct HybridTrace {
    double h = 0.0;
    std::vector<TraceRecord> records;

    /// Indices of the pre-jump records, in time order.
    [[nodiscard]] std::vector<std::size_t> pre_jump_indices() const;
};

/// Stacked closed loop between samples: per agent [x; xi; eta], then w.
class NetworkModel {
public:
    NetworkModel(std::vector<Plant> plants, Exosystem exo, std::vector<HoldSpec> holds);

    [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
    [[nodiscard]] std::size_t agents() const noexcept { return plants_.size(); }
    [[nodiscard]] const Mat& generator() const noexcept { return generator_; }
    [[nodiscard]] Mat propagator(double dt) const;

    [[nodiscard]] Vec pack(const NetworkState& s) const;
    [[nodiscard]] NetworkState unpack(std::span<const double> v, double t) const;
    [[nodiscard]] std::vector<Vec> errors(const NetworkState& s) const;
    [[nodiscard]] const std::vector<Plant>& plants() const noexcept { return plants_; }
    [[nodiscard]] const Exosystem& exosystem() const noexcept { return exo_; }
    [[nodiscard]] const std::vector<HoldSpec>& holds() const noexcept { return holds_; }

private:
    std::vector<Plant> plants_;
    Exosystem exo_;
    std::vector<HoldSpec> holds_;
    std::vector<std::size_t> offsets_;
    std::size_t dimension_ = 0;
    Mat generator_;
};

/// Propagate the flow exactly over dt (one matrix exponential).
NetworkState flow(const NetworkState& state, std::span<const Plant> plants, const Exosystem& exo,
                  std::span<const HoldSpec> holds, double dt);

/// Sample-instant reset: xi+ = K1 x + K2 eta, eta+ = (I - mu H) eta + mu Delta (1 (x) w).
NetworkState jump(const NetworkState& state, const CompensatorDesign& design, const LeaderGraph& g);

/// ||eta - 1 (x) w||_2.
double disagreement(const NetworkState& s);

struct SimulationOptions {
    std::size_t substeps = 10;
    bool force = false;  ///< run even when the certificate fails
    double divergence_bound = 1e12;
};

class DivergenceError : public Error {
public:
    DivergenceError(HybridTrace partial, NetworkState last)
        : Error("state norm exceeded the divergence bound"), partial_(std::move(partial)), last_(std::move(last)) {}
    [[nodiscard]] const HybridTrace& partial_trace() const noexcept { return partial_; }
    [[nodiscard]] const NetworkState& last_state() const noexcept { return last_; }

private:
    HybridTrace partial_;
    NetworkState last_;
};

/// Alternate jumps at t_k = k h (starting at t_0 = 0) with exact flows up to T.
/// Throws CertificateRejected unless the design certifies or options.force is set.
HybridTrace simulate(std::span<const Plant> plants, const Exosystem& exo, const CompensatorDesign& design,
                     const LeaderGraph& g, std::span<const Vec> x0, std::span<const Vec> eta0, const Vec& w0,
                     double horizon, const SimulationOptions& options = {});

struct AgentSettling {
    double tail_max_error = 0.0;         ///< max |e_i| over the last 20% of the horizon
    std::optional<double> settling_time;  ///< empty: never settles
};

struct SettlingReport {
    std::vector<AgentSettling> agents;
    std::optional<double> contraction;  ///< per-jump ratio of ||eta - 1 (x) w||
    std::vector<double> disagreement;   ///< at each pre-jump record
};

SettlingReport error_metrics(const HybridTrace& trace, double threshold);

/// Pre-jump to pre-jump map on [x; xi; eta] with w = 0.
Mat jump_to_jump_matrix(std::span<const Plant> plants, const Exosystem& exo, const CompensatorDesign& design,
                        const LeaderGraph& g);

/// CSV with header t,phase,agent,component,value. w rows use agent 0.
void write_trace_csv(const HybridTrace& trace, std::ostream& out);

}  // namespace corp
