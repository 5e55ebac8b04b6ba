#include "corp/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "corp/linalg.hpp"

namespace corp {

namespace {

constexpr double kHalfSqrt2 = 0.70710678118654752440;
constexpr double kDivergenceBound = 1e12;

void require_size(const Vec& v, std::size_t n, const char* name) {
    if (v.size() != n) {
        throw InvalidArgument(std::string("microgrid: ") + name + " needs " + std::to_string(n) + " entries");
    }
}

void require_positive(const Vec& v, const char* name) {
    for (double x : v)
        if (!(x > 0.0)) throw InvalidArgument(std::string("microgrid: ") + name + " must be positive");
}

}  // namespace

Mat example_4_1_k1() { return Mat{{-8.9637, -10.3322, -10.7802}}; }

TrackingScenario example_4_1() {
    const Mat a{{0, 1, 0}, {0, 0, 1}, {-1, 2, 3}};
    const Mat b{{0}, {0}, {1}};
    const Mat c{{1, 1, 1}};
    const Mat p{{0, 0}, {0, 0}, {0, 1}};
    Exosystem exo{Mat{{0, -2}, {2, 0}}, Vec{1.0, 0.0}};

    const Mat l_bar{{1, -1, 0, 0}, {0, 0, 0, 0}, {0, -1, 1, 0}, {-1, -1, -1, 3}};
    const Vec leader{1, 1, 0, 0};

    Plant plant{a, b, c, p, Mat(1, 2)};
    plant.q = -(c * solve_sylvester(a, exo.s, p));

    TrackingScenario s{std::vector<Plant>(4, plant), exo, LeaderGraph::from_laplacian(l_bar, leader), 0.1, 0.1,
                       std::vector<Mat>(4, example_4_1_k1()), {}};
    return s;
}

InitialState random_initial_state(const TrackingScenario& s, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    InitialState out;
    for (const auto& p : s.plants) {
        Vec x(p.states());
        for (auto& v : x) v = u(rng);
        out.x0.push_back(std::move(x));
    }
    for (std::size_t i = 0; i < s.plants.size(); ++i) {
        Vec eta(s.exo.order());
        for (auto& v : eta) v = u(rng);
        out.eta0.push_back(std::move(eta));
    }
    out.w0 = s.exo.w0;
    if (out.w0.empty()) {
        out.w0.assign(s.exo.order(), 0.0);
        if (!out.w0.empty()) out.w0[0] = 1.0;
    }
    return out;
}

void MicrogridParams::validate() const {
    const std::size_t n = grids();
    if (n == 0) throw InvalidArgument("microgrid: at least one grid required");
    require_size(beta, n, "beta");
    require_size(p_r0, n, "p_r0");
    require_size(a0, n, "a0");
    require_size(tau_p, n, "tau_p");
    require_size(tau_v, n, "tau_v");
    require_size(k_p, n, "k_p");
    require_size(k_q, n, "k_q");
    if (!mu.empty()) require_size(mu, n, "mu");
    require_positive(alpha, "alpha");
    require_positive(tau_p, "tau_p");
    require_positive(tau_v, "tau_v");
    if (!(k1 > 0.0) || !(k2 > 0.0)) throw InvalidArgument("microgrid: k1 and k2 must be positive");
    if (!(dispatch_h > 0.0)) throw InvalidArgument("microgrid: dispatch_h must be positive");
    if (l_c.rows() != n || l_c.cols() != n) throw InvalidArgument("microgrid: L_c must be N x N");
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) sum += l_c(i, j);
        if (std::abs(sum) > 1e-12 * (1.0 + l_c.max_abs())) {
            throw InvalidArgument("microgrid: L_c row " + std::to_string(i + 1) + " does not sum to zero");
        }
    }
    if (demand.empty()) throw InvalidArgument("microgrid: demand schedule is empty");
    for (std::size_t k = 1; k < demand.size(); ++k) {
        if (!(demand[k].t > demand[k - 1].t)) throw InvalidArgument("microgrid: demand times must increase");
    }
}

Vec MicrogridParams::literal_step_sizes() const {
    Vec out(grids(), 0.0);
    for (std::size_t i = 0; i < grids(); ++i)
        for (std::size_t j = 0; j < grids(); ++j) out[i] += std::abs(l_c(i, j));
    return out;
}

Vec MicrogridParams::step_sizes() const {
    if (!mu.empty()) return mu;
    Vec out = literal_step_sizes();
    for (auto& v : out) v = v > 0.0 ? 1.0 / v : 0.0;
    return out;
}

double MicrogridParams::demand_at(double t) const {
    const double slack = 1e-9 * dispatch_h;
    double value = demand.front().value;
    for (const auto& step : demand)
        if (step.t <= t + slack) value = step.value;
    return value;
}

DispatchState initial_dispatch(const MicrogridParams& params) {
    params.validate();
    DispatchState s{Vec(params.grids()), params.p_r0};
    for (std::size_t i = 0; i < params.grids(); ++i) s.lambda[i] = params.alpha[i] * params.p_r0[i] + params.beta[i];
    return s;
}

DispatchState ic_consensus_step(const DispatchState& s, const MicrogridParams& params, double p_main) {
    const std::size_t n = params.grids();
    if (s.lambda.size() != n || s.p_r.size() != n) throw DimensionError("ic_consensus_step: state size mismatch");
    const Vec mu = params.step_sizes();
    double total = 0.0;
    for (double p : s.p_r) total += p;
    const double mismatch = total - p_main;

    DispatchState next{Vec(n), Vec(n)};
    for (std::size_t i = 0; i < n; ++i) {
        double consensus = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double a_ij = -params.l_c(i, j);
            if (a_ij != 0.0) consensus += a_ij * (s.lambda[i] - s.lambda[j]);
        }
        next.lambda[i] = s.lambda[i] - (mu[i] * consensus + params.a0[i] * mismatch);
        next.p_r[i] = (next.lambda[i] - params.beta[i]) / params.alpha[i];
    }
    return next;
}

Mat dispatch_update_matrix(const MicrogridParams& params) {
    params.validate();
    const std::size_t n = params.grids();
    const Vec mu = params.step_sizes();
    Mat u = Mat::identity(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) u(i, j) -= mu[i] * params.l_c(i, j) + params.a0[i] / params.alpha[j];
    return u;
}

double optimal_lambda(const MicrogridParams& params, double p_main) {
    double num = p_main;
    double den = 0.0;
    for (std::size_t i = 0; i < params.grids(); ++i) {
        num += params.beta[i] / params.alpha[i];
        den += 1.0 / params.alpha[i];
    }
    return num / den;
}

std::pair<Mat, Mat> microgrid_model(const MicrogridParams& params, std::size_t i) {
    const double tp = params.tau_p[i];
    const double tv = params.tau_v[i];
    const double kp = params.k_p[i];
    const double kq = params.k_q[i];
    Mat f{{0, 1, 0, 0, 0},
          {0, -1.0 / tp, 0, -kp / tp, 0},
          {0, 0, -1.0 / tv, 0, -kq / tv},
          {0, 0, 0, -params.k1, 0},
          {0, 0, 0, 0, -params.k2}};
    Mat g{{0}, {kHalfSqrt2 * kp / tp}, {kHalfSqrt2 * kq / tv}, {kHalfSqrt2 * params.k1}, {kHalfSqrt2 * params.k2}};
    return {std::move(f), std::move(g)};
}

GridState microgrid_flow(const GridState& state, const MicrogridParams& params, std::size_t i, double p_r_held,
                         double dt) {
    if (state.size() != 5) throw DimensionError("microgrid_flow: grid state has 5 entries");
    if (!(dt > 0.0)) throw InvalidArgument("microgrid_flow: dt must be positive");
    const auto [f, g] = microgrid_model(params, i);
    Vec out = mat_exp(f, dt) * std::span<const double>(state);
    const Mat gamma = exp_convolution(f, g, Mat(1, 1), dt);
    for (std::size_t k = 0; k < 5; ++k) out[k] += gamma(k, 0) * p_r_held;
    return out;
}

GridState microgrid_equilibrium(double p_r) { return {0.0, 0.0, 0.0, kHalfSqrt2 * p_r, kHalfSqrt2 * p_r}; }

MicrogridTrace run_microgrid(const MicrogridParams& params, double horizon, std::size_t stride) {
    params.validate();
    if (!(horizon > 0.0)) throw InvalidArgument("run_microgrid: horizon must be positive");
    if (stride == 0) throw InvalidArgument("run_microgrid: stride must be >= 1");
    const std::size_t n = params.grids();
    const double dh = params.dispatch_h;
    const auto steps = static_cast<std::size_t>(std::floor(horizon / dh + 1e-9));
    const double remainder = horizon - static_cast<double>(steps) * dh;

    std::vector<Mat> phi;
    std::vector<Mat> gamma;
    for (std::size_t i = 0; i < n; ++i) {
        const auto [f, g] = microgrid_model(params, i);
        phi.push_back(mat_exp(f, dh));
        gamma.push_back(exp_convolution(f, g, Mat(1, 1), dh));
    }

    MicrogridTrace trace;
    DispatchState dispatch = initial_dispatch(params);
    std::vector<GridState> grids;
    for (std::size_t i = 0; i < n; ++i) grids.push_back(microgrid_equilibrium(params.p_r0[i]));

    auto diverged = [&]() {
        if (!(norm_inf(dispatch.lambda) <= kDivergenceBound)) return true;
        return std::any_of(grids.begin(), grids.end(),
                           [](const GridState& g) { return !(norm_inf(g) <= kDivergenceBound); });
    };

    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dh;
        const double p_main = params.demand_at(t);
        dispatch = ic_consensus_step(dispatch, params, p_main);
        if (diverged()) throw MicrogridDivergenceError(std::move(trace));
        if (k % stride == 0) trace.records.push_back({t, p_main, dispatch.lambda, dispatch.p_r, grids});
        for (std::size_t i = 0; i < n; ++i) {
            Vec next = phi[i] * std::span<const double>(grids[i]);
            for (std::size_t c = 0; c < 5; ++c) next[c] += gamma[i](c, 0) * dispatch.p_r[i];
            grids[i] = std::move(next);
        }
        if (diverged()) throw MicrogridDivergenceError(std::move(trace));
    }
    if (remainder > 1e-12 * dh) {
        for (std::size_t i = 0; i < n; ++i) grids[i] = microgrid_flow(grids[i], params, i, dispatch.p_r[i], remainder);
    }
    trace.records.push_back({horizon, params.demand_at(horizon), dispatch.lambda, dispatch.p_r, grids});
    trace.final_dispatch = dispatch;
    trace.final_grids = grids;
    trace.t_final = horizon;
    return trace;
}

}  // namespace corp
