#include "corp/hybrid_sim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "corp/linalg.hpp"

namespace corp {

namespace {

double state_max_abs(std::span<const double> v) { return norm_inf(v); }

bool all_zero_order(std::span<const HoldSpec> holds) {
    return std::all_of(holds.begin(), holds.end(), [](const HoldSpec& h) { return h.is_zero_order(); });
}

Certificate gate_certificate(std::span<const Plant> plants, const Exosystem& exo, const CompensatorDesign& design,
                             const LeaderGraph& g) {
    if (all_zero_order(design.holds)) return certify_zoh(design, plants, exo, g);
    std::vector<HoldBlocks> blocks;
    for (std::size_t i = 0; i < plants.size(); ++i) {
        blocks.push_back(hold_blocks(plants[i], design.holds[i], design.k1[i], design.k2[i]));
    }
    return certify_general_hold(blocks, exo, g, design.h, design.mu).certificate;
}

}  // namespace

const char* phase_name(Phase p) noexcept {
    switch (p) {
        case Phase::Flow: return "flow";
        case Phase::PreJump: return "pre_jump";
        case Phase::PostJump: return "post_jump";
    }
    return "flow";
}

std::vector<std::size_t> HybridTrace::pre_jump_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < records.size(); ++i)
        if (records[i].phase == Phase::PreJump) out.push_back(i);
    return out;
}

NetworkModel::NetworkModel(std::vector<Plant> plants, Exosystem exo, std::vector<HoldSpec> holds)
    : plants_(std::move(plants)), exo_(std::move(exo)), holds_(std::move(holds)) {
    if (holds_.size() != plants_.size()) throw DimensionError("one hold per agent required");
    const std::size_t q = exo_.order();
    for (std::size_t i = 0; i < plants_.size(); ++i) {
        plants_[i].validate(q);
        if (holds_[i].c_h.rows() != plants_[i].inputs() || holds_[i].c_h.cols() != holds_[i].order()) {
            throw DimensionError("hold of agent " + std::to_string(i + 1) + " does not match its inputs");
        }
        offsets_.push_back(dimension_);
        dimension_ += plants_[i].states() + holds_[i].order() + q;
    }
    const std::size_t w_off = dimension_;
    dimension_ += q;
    generator_ = Mat(dimension_, dimension_);
    for (std::size_t i = 0; i < plants_.size(); ++i) {
        const auto& p = plants_[i];
        const std::size_t o = offsets_[i];
        const std::size_t n = p.states();
        const std::size_t r = holds_[i].order();
        generator_.set_block(o, o, p.a);
        generator_.set_block(o, o + n, p.b * holds_[i].c_h);
        generator_.set_block(o, w_off, p.p);
        generator_.set_block(o + n, o + n, holds_[i].a_h);
        generator_.set_block(o + n + r, o + n + r, exo_.s);
    }
    generator_.set_block(w_off, w_off, exo_.s);
}

Mat NetworkModel::propagator(double dt) const { return mat_exp(generator_, dt); }

Vec NetworkModel::pack(const NetworkState& s) const {
    if (s.agents.size() != plants_.size()) throw DimensionError("state has wrong number of agents");
    Vec v;
    v.reserve(dimension_);
    for (std::size_t i = 0; i < plants_.size(); ++i) {
        const auto& a = s.agents[i];
        if (a.x.size() != plants_[i].states() || a.xi.size() != holds_[i].order() || a.eta.size() != exo_.order()) {
            throw DimensionError("state of agent " + std::to_string(i + 1) + " has wrong dimensions");
        }
        v.insert(v.end(), a.x.begin(), a.x.end());
        v.insert(v.end(), a.xi.begin(), a.xi.end());
        v.insert(v.end(), a.eta.begin(), a.eta.end());
    }
    if (s.w.size() != exo_.order()) throw DimensionError("exosystem state has wrong dimension");
    v.insert(v.end(), s.w.begin(), s.w.end());
    return v;
}

NetworkState NetworkModel::unpack(std::span<const double> v, double t) const {
    NetworkState s;
    s.t = t;
    auto it = v.begin();
    auto take = [&](std::size_t k) {
        Vec out(it, it + static_cast<std::ptrdiff_t>(k));
        it += static_cast<std::ptrdiff_t>(k);
        return out;
    };
    for (std::size_t i = 0; i < plants_.size(); ++i) {
        AgentState a;
        a.x = take(plants_[i].states());
        a.xi = take(holds_[i].order());
        a.eta = take(exo_.order());
        s.agents.push_back(std::move(a));
    }
    s.w = take(exo_.order());
    return s;
}

std::vector<Vec> NetworkModel::errors(const NetworkState& s) const {
    std::vector<Vec> out;
    out.reserve(plants_.size());
    for (std::size_t i = 0; i < plants_.size(); ++i) {
        Vec e = plants_[i].c * std::span<const double>(s.agents[i].x);
        const Vec qw = plants_[i].q * std::span<const double>(s.w);
        for (std::size_t k = 0; k < e.size(); ++k) e[k] += qw[k];
        out.push_back(std::move(e));
    }
    return out;
}

NetworkState flow(const NetworkState& state, std::span<const Plant> plants, const Exosystem& exo,
                  std::span<const HoldSpec> holds, double dt) {
    const NetworkModel model({plants.begin(), plants.end()}, exo, {holds.begin(), holds.end()});
    const Vec v = model.propagator(dt) * std::span<const double>(model.pack(state));
    return model.unpack(v, state.t + dt);
}

NetworkState jump(const NetworkState& state, const CompensatorDesign& design, const LeaderGraph& g) {
    const std::size_t n_agents = state.agents.size();
    if (design.agents() != n_agents || g.followers() != n_agents) throw DimensionError("jump: agent count mismatch");
    const auto d = decompose(g);
    NetworkState next = state;
    for (std::size_t i = 0; i < n_agents; ++i) {
        const auto& a = state.agents[i];
        Vec xi = design.k1[i] * std::span<const double>(a.x);
        const Vec k2eta = design.k2[i] * std::span<const double>(a.eta);
        for (std::size_t k = 0; k < xi.size(); ++k) xi[k] += k2eta[k];
        next.agents[i].xi = std::move(xi);

        Vec eta = a.eta;
        for (std::size_t j = 0; j < n_agents; ++j) {
            const double hij = d.h(i, j);
            if (hij == 0.0) continue;
            for (std::size_t k = 0; k < eta.size(); ++k) eta[k] -= design.mu * hij * state.agents[j].eta[k];
        }
        const double leader = design.mu * d.delta(i, i);
        for (std::size_t k = 0; k < eta.size(); ++k) eta[k] += leader * state.w[k];
        next.agents[i].eta = std::move(eta);
    }
    return next;
}

double disagreement(const NetworkState& s) {
    double sum = 0.0;
    for (const auto& a : s.agents)
        for (std::size_t k = 0; k < a.eta.size(); ++k) {
            const double d = a.eta[k] - s.w[k];
            sum += d * d;
        }
    return std::sqrt(sum);
}

HybridTrace simulate(std::span<const Plant> plants, const Exosystem& exo, const CompensatorDesign& design,
                     const LeaderGraph& g, std::span<const Vec> x0, std::span<const Vec> eta0, const Vec& w0,
                     double horizon, const SimulationOptions& options) {
    if (!(horizon > 0.0)) throw InvalidArgument("simulate: horizon must be positive");
    if (options.substeps < 1) throw InvalidArgument("simulate: substeps must be >= 1");
    if (x0.size() != plants.size() || eta0.size() != plants.size()) {
        throw DimensionError("simulate: one initial x and eta per agent required");
    }
    if (!options.force) {
        auto cert = gate_certificate(plants, exo, design, g);
        if (!cert.verdict) throw CertificateRejected(std::move(cert));
    }

    const NetworkModel model({plants.begin(), plants.end()}, exo, design.holds);
    const double h = design.h;
    const auto jumps = static_cast<std::size_t>(std::floor(horizon / h + 1e-9));
    const double remainder = horizon - static_cast<double>(jumps) * h;

    const Mat full = model.propagator(h);
    std::vector<Mat> partial;
    for (std::size_t j = 1; j < options.substeps; ++j) {
        partial.push_back(model.propagator(h * static_cast<double>(j) / static_cast<double>(options.substeps)));
    }

    HybridTrace trace;
    trace.h = h;
    auto record = [&](const NetworkState& s, Phase phase) {
        trace.records.push_back({s.t, phase, s, model.errors(s)});
    };
    auto guard = [&](const Vec& v, double t) {
        if (!(state_max_abs(v) <= options.divergence_bound)) {
            // keep the last finite state when the bound trips on overflow
            NetworkState last = trace.records.empty() ? model.unpack(v, t) : trace.records.back().state;
            throw DivergenceError(std::move(trace), std::move(last));
        }
    };

    NetworkState state;
    state.t = 0.0;
    state.w = w0;
    for (std::size_t i = 0; i < plants.size(); ++i) {
        state.agents.push_back({x0[i], Vec(design.holds[i].order(), 0.0), eta0[i]});
    }
    guard(model.pack(state), 0.0);

    for (std::size_t k = 0;; ++k) {
        const double t_k = static_cast<double>(k) * h;
        state.t = t_k;
        record(state, Phase::PreJump);
        state = jump(state, design, g);
        const Vec post = model.pack(state);
        guard(post, t_k);
        record(state, Phase::PostJump);
        if (k == jumps) {
            if (remainder > 1e-12 * h) {
                for (std::size_t j = 1; j <= options.substeps; ++j) {
                    const double dt = remainder * static_cast<double>(j) / static_cast<double>(options.substeps);
                    const Vec v = model.propagator(dt) * std::span<const double>(post);
                    guard(v, t_k + dt);
                    record(model.unpack(v, t_k + dt), Phase::Flow);
                }
            }
            break;
        }
        for (std::size_t j = 0; j < partial.size(); ++j) {
            const double t = t_k + h * static_cast<double>(j + 1) / static_cast<double>(options.substeps);
            const Vec v = partial[j] * std::span<const double>(post);
            guard(v, t);
            record(model.unpack(v, t), Phase::Flow);
        }
        const Vec next = full * std::span<const double>(post);
        guard(next, static_cast<double>(k + 1) * h);
        state = model.unpack(next, static_cast<double>(k + 1) * h);
    }
    return trace;
}

SettlingReport error_metrics(const HybridTrace& trace, double threshold) {
    SettlingReport report;
    if (trace.records.empty()) throw InvalidArgument("error_metrics: empty trace");
    const std::size_t n_agents = trace.records.front().errors.size();
    const double t0 = trace.records.front().t;
    const double t1 = trace.records.back().t;
    const double tail_start = t1 - 0.2 * (t1 - t0);

    for (std::size_t i = 0; i < n_agents; ++i) {
        AgentSettling s;
        std::optional<std::size_t> last_above;
        for (std::size_t r = 0; r < trace.records.size(); ++r) {
            const double e = norm_inf(trace.records[r].errors[i]);
            if (trace.records[r].t >= tail_start) s.tail_max_error = std::max(s.tail_max_error, e);
            if (e > threshold) last_above = r;
        }
        if (!last_above) {
            s.settling_time = t0;
        } else if (*last_above + 1 < trace.records.size()) {
            s.settling_time = trace.records[*last_above + 1].t;
        }
        report.agents.push_back(s);
    }

    for (std::size_t idx : trace.pre_jump_indices()) report.disagreement.push_back(disagreement(trace.records[idx].state));
    const auto& d = report.disagreement;
    if (!d.empty()) {
        const double peak = *std::max_element(d.begin(), d.end());
        std::optional<std::size_t> last_valid;
        for (std::size_t k = 0; k < d.size(); ++k)
            if (d[k] > 1e-9 * peak && d[k] > 0.0) last_valid = k;
        if (last_valid && *last_valid >= 2) {
            const std::size_t b = *last_valid;
            const std::size_t a = b / 2;
            if (d[a] > 0.0) report.contraction = std::pow(d[b] / d[a], 1.0 / static_cast<double>(b - a));
        }
    }
    return report;
}

Mat jump_to_jump_matrix(std::span<const Plant> plants, const Exosystem& exo, const CompensatorDesign& design,
                        const LeaderGraph& g) {
    const NetworkModel model({plants.begin(), plants.end()}, exo, design.holds);
    const std::size_t q = exo.order();
    const std::size_t dim = model.dimension() - q;
    const Mat flow_h = mat_exp(model.generator().block(0, 0, dim, dim), design.h);

    const auto d = decompose(g);
    std::vector<std::size_t> offsets;
    std::size_t off = 0;
    for (std::size_t i = 0; i < plants.size(); ++i) {
        offsets.push_back(off);
        off += plants[i].states() + design.holds[i].order() + q;
    }
    Mat reset(dim, dim);
    for (std::size_t i = 0; i < plants.size(); ++i) {
        const std::size_t o = offsets[i];
        const std::size_t n = plants[i].states();
        const std::size_t r = design.holds[i].order();
        reset.set_block(o, o, Mat::identity(n));
        reset.set_block(o + n, o, design.k1[i]);
        reset.set_block(o + n, o + n + r, design.k2[i]);
        for (std::size_t j = 0; j < plants.size(); ++j) {
            const double coeff = (i == j ? 1.0 : 0.0) - design.mu * d.h(i, j);
            if (coeff == 0.0) continue;
            const std::size_t oj = offsets[j] + plants[j].states() + design.holds[j].order();
            reset.set_block(o + n + r, oj, coeff * Mat::identity(q));
        }
    }
    return flow_h * reset;
}

void write_trace_csv(const HybridTrace& trace, std::ostream& out) {
    out << "t,phase,agent,component,value\n";
    for (const auto& rec : trace.records) {
        const std::string t = format_double(rec.t);
        const char* phase = phase_name(rec.phase);
        auto row = [&](std::size_t agent, const char* comp, std::size_t k, double v) {
            out << t << ',' << phase << ',' << agent << ',' << comp << k + 1 << ',' << format_double(v) << '\n';
        };
        for (std::size_t i = 0; i < rec.state.agents.size(); ++i) {
            const auto& a = rec.state.agents[i];
            for (std::size_t k = 0; k < a.x.size(); ++k) row(i + 1, "x", k, a.x[k]);
            for (std::size_t k = 0; k < a.xi.size(); ++k) row(i + 1, "xi", k, a.xi[k]);
            for (std::size_t k = 0; k < a.eta.size(); ++k) row(i + 1, "eta", k, a.eta[k]);
            for (std::size_t k = 0; k < rec.errors[i].size(); ++k) row(i + 1, "e", k, rec.errors[i][k]);
        }
        for (std::size_t k = 0; k < rec.state.w.size(); ++k) row(0, "w", k, rec.state.w[k]);
    }
}

}  // namespace corp
