#include "corp/regulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "corp/errors.hpp"
#include "corp/linalg.hpp"

namespace corp {

namespace {

constexpr double kRankTolerance = 1e-9;
constexpr double kPathologicalTolerance = 1e-8;
constexpr double kExoRealTolerance = 1e-10;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

std::string fmt(std::complex<double> z) {
    std::ostringstream os;
    os.precision(6);
    os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
    return os.str();
}

void require_agents(std::size_t plants, const LeaderGraph& g) {
    if (plants != g.followers()) {
        throw DimensionError(std::to_string(plants) + " plants for a graph with " + std::to_string(g.followers()) +
                             " followers");
    }
}

// Rank of [[A - lambda I, B], [C, 0]] for complex lambda. The plant has no
// feedthrough, so the lower-right block is p x m zeros.
std::size_t regulator_rank(const Plant& p, std::complex<double> lambda) {
    const std::size_t n = p.states();
    Mat re = assemble({{p.a - lambda.real() * Mat::identity(n), p.b}, {p.c, Mat(p.outputs(), p.inputs())}});
    Mat im(re.rows(), re.cols());
    for (std::size_t i = 0; i < n; ++i) im(i, i) = -lambda.imag();
    return complex_rank(re, im, kRankTolerance);
}

bool stabilizable(const Mat& a, const Mat& b) {
    const std::size_t n = a.rows();
    for (const auto& e : eigenvalues(a).values) {
        if (e.modulus < 1.0 - 1e-9) continue;
        Mat re = assemble({{a - e.value.real() * Mat::identity(n), b}});
        Mat im(n, n + b.cols());
        for (std::size_t i = 0; i < n; ++i) im(i, i) = -e.value.imag();
        if (complex_rank(re, im, kRankTolerance) < n) return false;
    }
    return true;
}

Certificate base_certificate(double h, double mu, const LeaderGraph& g, const Exosystem& exo) {
    Certificate c;
    c.h = h;
    c.mu = mu;
    const auto d = decompose(g);
    try {
        c.mu_paper_bound = paper_mu_bound(d);
        c.mu_exact_bound = exact_mu_bound(d);
    } catch (const RootConditionError&) {
        c.notes.emplace_back("step-size bounds undefined: root condition fails");
    }
    c.rho_eta = spectral_radius(kron(Mat::identity(g.followers()) - mu * d.h, mat_exp(exo.s, h)));
    if (c.mu_paper_bound > c.mu_exact_bound * (1.0 + 1e-12)) {
        c.notes.emplace_back("mu_paper_bound exceeds the exact admissibility supremum; rho_eta is authoritative");
    }
    return c;
}

bool finish_verdict(Certificate& c) {
    const double worst_agent = c.rho_agent.empty() ? 0.0 : *std::max_element(c.rho_agent.begin(), c.rho_agent.end());
    const double worst_residual =
        c.residuals.empty() ? 0.0 : *std::max_element(c.residuals.begin(), c.residuals.end());
    c.verdict = c.assumptions.all_pass() && worst_agent < 1.0 && c.rho_eta < 1.0 && worst_residual <= kResidualTolerance;
    return c.verdict;
}

}  // namespace

void Plant::validate(std::size_t exo_order) const {
    const std::size_t n = a.rows();
    if (!a.is_square() || n == 0) throw DimensionError("plant A must be square and non-empty");
    if (b.rows() != n || b.cols() == 0) throw DimensionError("plant B must have n rows");
    if (c.cols() != n || c.rows() == 0) throw DimensionError("plant C must have n columns");
    if (p.rows() != n || p.cols() != exo_order) throw DimensionError("plant P must be n x q");
    if (q.rows() != c.rows() || q.cols() != exo_order) throw DimensionError("plant Q must be p x q");
}

HoldSpec HoldSpec::zero_order(std::size_t inputs) { return {Mat::identity(inputs), Mat(inputs, inputs)}; }

bool HoldSpec::is_zero_order() const {
    return c_h.is_square() && c_h == Mat::identity(c_h.rows()) && a_h.max_abs() == 0.0;
}

bool controllable(const Mat& a, const Mat& b, double rel_tol) {
    const std::size_t n = a.rows();
    Mat kalman(n, n * b.cols());
    Mat power = b;
    for (std::size_t k = 0; k < n; ++k) {
        kalman.set_block(0, k * b.cols(), power);
        power = a * power;
    }
    return rank(kalman, rel_tol) == n;
}

AssumptionReport check_assumptions(std::span<const Plant> plants, const Exosystem& exo, const LeaderGraph& g,
                                   double h) {
    require_agents(plants.size(), g);
    if (!(h > 0.0)) throw InvalidArgument("sampling period must be positive");
    for (const auto& p : plants) p.validate(exo.order());

    AssumptionReport report;
    const auto exo_spec = eigenvalues(exo.s);

    const double min_re = exo_spec.min_real();
    report.a1.pass = min_re >= -kExoRealTolerance;
    report.a1.diagnostic = "min Re(lambda(S)) = " + fmt(min_re);

    report.a2.pass = root_reachable(g);
    report.a2.diagnostic = report.a2.pass ? "every follower reachable from node 0" : "some follower unreachable from node 0";

    report.a3.pass = true;
    const double alias = 2.0 * std::numbers::pi / h;
    for (std::size_t i = 0; i < plants.size() && report.a3.pass; ++i) {
        if (!controllable(plants[i].a, plants[i].b)) {
            report.a3.pass = false;
            report.a3.diagnostic = "agent " + std::to_string(i + 1) + ": (A, B) not controllable";
            break;
        }
        auto joint = eigenvalues(plants[i].a).complex_values();
        const auto exo_values = exo_spec.complex_values();
        joint.insert(joint.end(), exo_values.begin(), exo_values.end());
        for (std::size_t u = 0; u < joint.size() && report.a3.pass; ++u) {
            for (std::size_t v = u + 1; v < joint.size(); ++v) {
                if (std::abs(joint[u].real() - joint[v].real()) > kPathologicalTolerance) continue;
                const double gap = std::abs(joint[u].imag() - joint[v].imag());
                const double multiple = std::round(gap / alias);
                if (multiple >= 1.0 && std::abs(gap - multiple * alias) <= kPathologicalTolerance) {
                    report.a3.pass = false;
                    report.a3.diagnostic = "agent " + std::to_string(i + 1) + ": eigenvalues " + fmt(joint[u]) +
                                           " and " + fmt(joint[v]) + " make h = " + fmt(h) + " pathological";
                    break;
                }
            }
        }
    }
    if (report.a3.pass) report.a3.diagnostic = "controllable, non-pathological sampling";

    report.a4.pass = true;
    report.a4.diagnostic = "full rank at every exosystem eigenvalue";
    for (std::size_t i = 0; i < plants.size() && report.a4.pass; ++i) {
        const std::size_t needed = plants[i].states() + plants[i].outputs();
        for (const auto& e : exo_spec.values) {
            const std::size_t r = regulator_rank(plants[i], e.value);
            if (r != needed) {
                report.a4.pass = false;
                report.a4.diagnostic = "agent " + std::to_string(i + 1) + ": rank " + std::to_string(r) + " < " +
                                       std::to_string(needed) + " at lambda = " + fmt(e.value);
                break;
            }
        }
    }
    return report;
}

Mat solve_regulator_pair(const Plant& p, const Exosystem& exo) {
    p.validate(exo.order());
    Mat pi;
    try {
        pi = solve_sylvester(p.a, exo.s, p.p);
    } catch (const SingularEquation& e) {
        throw RegulationInfeasible(std::string("regulator equation has no unique solution: ") + e.what());
    }
    const double out = (p.c * pi + p.q).norm_inf();
    if (out > kResidualTolerance) {
        std::string a4 = "A4 holds";
        for (const auto& e : eigenvalues(exo.s).values) {
            if (regulator_rank(p, e.value) < p.states() + p.outputs()) {
                a4 = "A4 fails at lambda = " + fmt(e.value);
                break;
            }
        }
        throw RegulationInfeasible("output equation residual " + fmt(out) + " exceeds tolerance (" + a4 + ")");
    }
    return pi;
}

Discretization discretize(const Plant& p, const Exosystem& exo, double h) {
    if (!(h > 0.0)) throw InvalidArgument("discretize: h must be positive");
    const std::size_t m = p.inputs();
    return {mat_exp(p.a, h), exp_convolution(p.a, p.b, Mat(m, m), h), exp_convolution(p.a, p.p, exo.s, h)};
}

Mat synthesize_k1(const Mat& a_d, const Mat& b_d) {
    if (!a_d.is_square() || b_d.rows() != a_d.rows()) throw DimensionError("synthesize_k1: need A n x n, B n x m");
    if (!stabilizable(a_d, b_d)) throw SynthesisError("(A_D, B_D) has an uncontrollable mode on or outside the unit circle");
    const std::size_t n = a_d.rows();
    const std::size_t m = b_d.cols();
    const Mat q = Mat::identity(n);
    const Mat r = Mat::identity(m);
    const Mat at = a_d.transpose();
    const Mat bt = b_d.transpose();

    Mat p = q;
    bool converged = false;
    for (int it = 0; it < 100000; ++it) {
        const Mat gain = solve(r + bt * p * b_d, bt * p * a_d);
        Mat next = q + at * p * a_d - at * p * b_d * gain;
        next = 0.5 * (next + next.transpose());
        const double change = (next - p).max_abs();
        p = std::move(next);
        if (change <= 1e-12 * std::max(1.0, p.max_abs())) {
            converged = true;
            break;
        }
    }
    if (!converged) throw SynthesisError("Riccati iteration did not converge in 1e5 steps");
    Mat k1 = -solve(r + bt * p * b_d, bt * p * a_d);
    const double rho = spectral_radius(a_d + b_d * k1);
    if (!(rho < 1.0 - 1e-6)) throw SynthesisError("LQR gain leaves spectral radius " + fmt(rho));
    return k1;
}

CompensatorDesign build_zoh_design(std::span<const Plant> plants, const Exosystem& exo, const LeaderGraph& g,
                                   double h, const DesignOptions& options) {
    require_agents(plants.size(), g);
    if (!options.k1.empty() && options.k1.size() != plants.size()) {
        throw DimensionError("one K1 per agent required");
    }
    if (!(h > 0.0)) throw InvalidArgument("sampling period must be positive");
    CompensatorDesign d;
    d.h = h;
    d.mu = options.mu ? *options.mu : 0.5 * exact_mu_bound(decompose(g));
    if (!(d.mu > 0.0)) throw InvalidArgument("mu must be positive");
    for (std::size_t i = 0; i < plants.size(); ++i) {
        try {
            Mat pi = solve_regulator_pair(plants[i], exo);
            Mat k1;
            if (options.k1.empty()) {
                const auto disc = discretize(plants[i], exo, h);
                k1 = synthesize_k1(disc.a_d, disc.b_d);
            } else {
                k1 = options.k1[i];
                if (k1.rows() != plants[i].inputs() || k1.cols() != plants[i].states()) {
                    throw DimensionError("K1 must be m x n");
                }
            }
            d.k2.push_back(-(k1 * pi));
            d.k1.push_back(std::move(k1));
            d.pi.push_back(std::move(pi));
            d.holds.push_back(HoldSpec::zero_order(plants[i].inputs()));
        } catch (const AgentError&) {
            throw;
        } catch (const Error& e) {
            throw AgentError(i, e.what());
        }
    }
    return d;
}

DesignResult design_zoh(std::span<const Plant> plants, const Exosystem& exo, const LeaderGraph& g, double h,
                        const DesignOptions& options) {
    const auto report = check_assumptions(plants, exo, g, h);
    if (!report.all_pass()) {
        Certificate c;
        c.h = h;
        c.assumptions = report;
        c.notes.emplace_back("assumption check failed before design");
        throw CertificateRejected(std::move(c));
    }
    DesignResult out{build_zoh_design(plants, exo, g, h, options), {}};
    out.certificate = certify_zoh(out.design, plants, exo, g);
    if (!out.certificate.verdict) throw CertificateRejected(out.certificate);
    return out;
}

Certificate certify_zoh(const CompensatorDesign& design, std::span<const Plant> plants, const Exosystem& exo,
                        const LeaderGraph& g) {
    require_agents(plants.size(), g);
    if (design.agents() != plants.size() || design.k2.size() != plants.size() || design.pi.size() != plants.size()) {
        throw DimensionError("design does not match the number of agents");
    }
    Certificate c = base_certificate(design.h, design.mu, g, exo);
    c.assumptions = check_assumptions(plants, exo, g, design.h);
    for (std::size_t i = 0; i < plants.size(); ++i) {
        const auto& p = plants[i];
        const auto disc = discretize(p, exo, design.h);
        c.rho_agent.push_back(spectral_radius(disc.a_d + disc.b_d * design.k1[i]));
        const Mat& pi = design.pi[i];
        const double sylvester = (pi * exo.s - p.a * pi - p.p).norm_inf();
        const double output = (p.c * pi + p.q).norm_inf();
        const double gain = (design.k2[i] + design.k1[i] * pi).norm_inf();
        c.residuals.push_back(std::max({sylvester, output, gain}));
    }
    c.notes.emplace_back("zero-order hold: A_H = 0 is singular; accepted as the ZOH special case");
    finish_verdict(c);
    return c;
}

HoldBlocks hold_blocks(const Plant& p, const HoldSpec& hold, const Mat& k1, const Mat& k2) {
    const std::size_t n = p.states();
    const std::size_t r = hold.order();
    const std::size_t q = p.p.cols();
    if (hold.c_h.rows() != p.inputs() || hold.c_h.cols() != r || !hold.a_h.is_square()) {
        throw DimensionError("hold: C_H must be m x r and A_H r x r");
    }
    if (k1.rows() != r || k1.cols() != n || k2.rows() != r || k2.cols() != q) {
        throw DimensionError("hold gains: K1 must be r x n and K2 r x q");
    }
    HoldBlocks b;
    b.f = assemble({{p.a, p.b * hold.c_h}, {Mat(r, n), hold.a_h}});
    b.g = assemble({{p.p}, {Mat(r, q)}});
    b.m = assemble({{Mat::identity(n), Mat(n, r)}, {k1, Mat(r, r)}});
    b.gamma = assemble({{Mat(n, q)}, {k2}});
    b.c_hat = assemble({{p.c, Mat(p.outputs(), r)}});
    b.q = p.q;
    b.states = n;
    return b;
}

Mat hold_manifold_at(const HoldBlocks& b, const Mat& s, const Mat& pi_plus, double t) {
    return (mat_exp(b.f, t) * pi_plus + exp_convolution(b.f, b.g, s, t)) * mat_exp(s, -t);
}

GeneralHoldCertificate certify_general_hold(std::span<const HoldBlocks> blocks, const Exosystem& exo,
                                            const LeaderGraph& g, double h, double mu) {
    require_agents(blocks.size(), g);
    if (!(h > 0.0)) throw InvalidArgument("sampling period must be positive");
    GeneralHoldCertificate out;
    Certificate& c = out.certificate;
    c = base_certificate(h, mu, g, exo);

    const auto exo_spec = eigenvalues(exo.s);
    c.assumptions.a1.pass = exo_spec.min_real() >= -kExoRealTolerance;
    c.assumptions.a1.diagnostic = "min Re(lambda(S)) = " + fmt(exo_spec.min_real());
    c.assumptions.a2.pass = root_reachable(g);
    c.assumptions.a2.diagnostic = c.assumptions.a2.pass ? "every follower reachable from node 0"
                                                        : "some follower unreachable from node 0";
    c.assumptions.a3 = {true, "not required by the general-hold certificate"};
    c.assumptions.a4 = {true, "not required by the general-hold certificate"};

    const Mat jump_exo = mat_exp(exo.s, h);
    const auto jump_spec = eigenvalues(jump_exo);
    constexpr int kGrid = 32;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto& b = blocks[i];
        const Mat phi = b.m * mat_exp(b.f, h);
        const auto phi_spec = eigenvalues(phi);
        double sep = HUGE_VAL;
        for (const auto& x : phi_spec.values)
            for (const auto& y : jump_spec.values) sep = std::min(sep, std::abs(x.value - y.value));
        if (sep <= 1e-9 * std::max(1.0, phi.norm_inf())) {
            throw SeparationError("agent " + std::to_string(i + 1) +
                                  ": sigma(M exp(F h)) meets sigma(exp(S h)), distance " + fmt(sep));
        }
        out.separation.push_back(sep);
        c.rho_agent.push_back(phi_spec.max_modulus());

        const Mat l = exp_convolution(b.f, b.g, exo.s, h);
        const Mat rhs = b.gamma * jump_exo + b.m * l;
        Mat pi_plus = solve_discrete_sylvester(phi, jump_exo, rhs);

        double worst = 0.0;
        for (int k = 1; k <= kGrid; ++k) {
            const double t = h * k / kGrid;
            const Mat pi_t = hold_manifold_at(b, exo.s, pi_plus, t);
            worst = std::max(worst, (b.c_hat * pi_t + b.q).norm_inf());
        }
        out.output_residual.push_back(worst);
        c.residuals.push_back(worst);
        out.pi_plus.push_back(std::move(pi_plus));

    }
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto& b = blocks[i];
        const std::size_t r = b.f.rows() - b.states;
        if (r > 0 && rank(b.f.block(b.states, b.states, r, r)) < r) {
            c.notes.push_back("agent " + std::to_string(i + 1) + ": A_H is singular (zero-order hold style)");
        }
    }
    finish_verdict(c);
    return out;
}

}  // namespace corp
