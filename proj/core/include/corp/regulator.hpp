#pragma once

#include <optional>
#include <string>
#include <vector>

#include "corp/errors.hpp"
#include "corp/graph.hpp"
#include "corp/mat.hpp"

namespace corp {

/// One agent: x' = A x + B u + P w, e = C x + Q w.
struct Plant {
    Mat a, b, c, p, q;

    [[nodiscard]] std::size_t states() const noexcept { return a.rows(); }
    [[nodiscard]] std::size_t inputs() const noexcept { return b.cols(); }
    [[nodiscard]] std::size_t outputs() const noexcept { return c.rows(); }
    /// Throws DimensionError unless the five matrices conform with exosystem order q.
    void validate(std::size_t exo_order) const;
};

/// w' = S w.
struct Exosystem {
    Mat s;
    Vec w0;

    [[nodiscard]] std::size_t order() const noexcept { return s.rows(); }
};

/// Inter-sample hold u(t) = C_H exp(A_H (t - t_k)) xi(t_k+).
struct HoldSpec {
    Mat c_h;
    Mat a_h;

    static HoldSpec zero_order(std::size_t inputs);
    [[nodiscard]] bool is_zero_order() const;
    [[nodiscard]] std::size_t order() const noexcept { return a_h.rows(); }
};

struct CompensatorDesign {
    double h = 0.0;
    double mu = 0.0;
    std::vector<Mat> k1;
    std::vector<Mat> k2;
    std::vector<Mat> pi;
    std::vector<HoldSpec> holds;

    [[nodiscard]] std::size_t agents() const noexcept { return k1.size(); }
};

struct AssumptionCheck {
    bool pass = false;
    std::string diagnostic;
};

struct AssumptionReport {
    AssumptionCheck a1;  ///< exosystem spectrum in the closed right half plane
    AssumptionCheck a2;  ///< node 0 roots a spanning tree
    AssumptionCheck a3;  ///< controllable pairs, non-pathological sampling
    AssumptionCheck a4;  ///< regulator rank condition

    [[nodiscard]] bool all_pass() const noexcept { return a1.pass && a2.pass && a3.pass && a4.pass; }
};

struct Certificate {
    double h = 0.0;
    double mu = 0.0;
    std::vector<double> rho_agent;
    double rho_eta = 0.0;
    std::vector<double> residuals;
    AssumptionReport assumptions;
    double mu_paper_bound = 0.0;
    double mu_exact_bound = 0.0;
    std::vector<std::string> notes;
    bool verdict = false;
};

/// Discretized plant over one sampling period.
struct Discretization {
    Mat a_d;  ///< exp(A h)
    Mat b_d;  ///< int_0^h exp(A s) ds B
    Mat p_d;  ///< int_0^h exp(A (h - s)) P exp(S s) ds
};

inline constexpr double kResidualTolerance = 1e-8;

AssumptionReport check_assumptions(std::span<const Plant> plants, const Exosystem& exo, const LeaderGraph& g,
                                   double h);

/// Pi with Pi S = A Pi + P and C Pi + Q = 0. Throws RegulationInfeasible.
Mat solve_regulator_pair(const Plant& p, const Exosystem& exo);

Discretization discretize(const Plant& p, const Exosystem& exo, double h);

/// Unit-weight discrete LQR gain K1 (u = K1 x) by Riccati fixed-point iteration.
/// Throws SynthesisError for unstabilizable pairs or a stalled iteration.
Mat synthesize_k1(const Mat& a_d, const Mat& b_d);

/// Kalman rank test with the relative singular-value threshold.
bool controllable(const Mat& a, const Mat& b, double rel_tol = 1e-9);

struct DesignOptions {
    std::optional<double> mu;  ///< defaults to exact_mu_bound / 2
    std::vector<Mat> k1;       ///< empty: synthesize; else one gain per agent
};

/// Assemble a ZOH design without certifying it.
CompensatorDesign build_zoh_design(std::span<const Plant> plants, const Exosystem& exo, const LeaderGraph& g,
                                   double h, const DesignOptions& options = {});

struct DesignResult {
    CompensatorDesign design;
    Certificate certificate;
};

/// Raised when a design was assembled but its certificate does not pass.
class CertificateRejected : public Error {
public:
    explicit CertificateRejected(Certificate cert)
        : Error("design certificate failed"), certificate_(std::move(cert)) {}
    [[nodiscard]] const Certificate& certificate() const noexcept { return certificate_; }

private:
    Certificate certificate_;
};

/// build_zoh_design + certify_zoh; returns only passing designs.
DesignResult design_zoh(std::span<const Plant> plants, const Exosystem& exo, const LeaderGraph& g, double h,
                        const DesignOptions& options = {});

Certificate certify_zoh(const CompensatorDesign& design, std::span<const Plant> plants, const Exosystem& exo,
                        const LeaderGraph& g);

/// Per-agent blocks of the general-hold closed loop on z = [x; xi].
struct HoldBlocks {
    Mat f;       ///< [[A, B C_H], [0, A_H]]
    Mat g;       ///< [P; 0]
    Mat m;       ///< [[I, 0], [K1, 0]]
    Mat gamma;   ///< [0; K2]
    Mat c_hat;   ///< [C, 0]
    Mat q;
    std::size_t states = 0;  ///< plant order n
};

HoldBlocks hold_blocks(const Plant& p, const HoldSpec& hold, const Mat& k1, const Mat& k2);

struct GeneralHoldCertificate {
    Certificate certificate;
    std::vector<Mat> pi_plus;             ///< Pi_i(t_k+)
    std::vector<double> separation;       ///< min |sigma(M exp(F h)) - sigma(exp(S h))|
    std::vector<double> output_residual;  ///< max over the grid of |C_hat Pi(t) + Q|
};

/// Certificate for an arbitrary hold. Throws SeparationError when
/// sigma(M exp(F h)) meets sigma(exp(S h)).
GeneralHoldCertificate certify_general_hold(std::span<const HoldBlocks> blocks, const Exosystem& exo,
                                            const LeaderGraph& g, double h, double mu);

/// Pi_i(t) on (0, h] from its value right after a jump.
Mat hold_manifold_at(const HoldBlocks& b, const Mat& s, const Mat& pi_plus, double t);

/// JSON document with fields verdict, rho_agent, rho_eta, residuals,
/// assumptions{A1..A4}, mu, mu_paper_bound, mu_exact_bound, h, notes.
std::string certificate_to_json(const Certificate& c, int indent = 2);

/// Design gains plus attached certificate, as JSON.
std::string design_to_json(const CompensatorDesign& d, const Certificate& c, int indent = 2);

}  // namespace corp
