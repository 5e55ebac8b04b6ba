#include "corp_cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include "corp/hybrid_sim.hpp"
#include "corp/linalg.hpp"
#include "corp/scenarios.hpp"

namespace corp::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr double kSettlingThreshold = 1e-2;
constexpr std::size_t kMicrogridRecords = 5000;

struct RunConfig {
    std::string command;
    std::string scenario;
    std::string config;
    std::optional<double> horizon;
    std::size_t substeps = 10;
    std::optional<double> mu;
    std::optional<double> h;
    std::string k1;
    bool force = false;
    std::string out = "corp_out";
    std::optional<std::uint64_t> seed;
};

ScenarioConfig resolve(const RunConfig& rc) {
    if (!rc.scenario.empty() && !rc.config.empty()) throw ConfigError(0, "give either --scenario or --config, not both");
    if (rc.scenario.empty() && rc.config.empty()) throw ConfigError(0, "no scenario: use --scenario or --config");
    if (rc.scenario == "example41") {
        ScenarioConfig c;
        c.tracking = example_4_1();
        return c;
    }
    if (rc.scenario == "microgrid") {
        ScenarioConfig c;
        c.microgrid = MicrogridParams{};
        return c;
    }
    return load_scenario_config(rc.scenario.empty() ? rc.config : rc.scenario);
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InvalidArgument("cannot write " + path.string());
    f << text;
}

fs::path prepare_out(const RunConfig& rc) {
    fs::path dir(rc.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InvalidArgument("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

struct TrackingSetup {
    TrackingScenario scenario;
    DesignOptions options;
    double h = 0.1;
};

TrackingSetup tracking_setup(const RunConfig& rc, const ScenarioConfig& cfg) {
    TrackingSetup s{*cfg.tracking, {}, cfg.tracking->h};
    if (rc.h) s.h = *rc.h;
    s.options.mu = rc.mu ? *rc.mu : s.scenario.mu;
    std::string source = rc.k1;
    if (source.empty()) source = cfg.k1_source.value_or(s.scenario.k1.empty() ? "synthesize" : "paper");
    if (source == "paper") {
        if (s.scenario.k1.empty()) throw ConfigError(0, "scenario defines no K1 gains; use --k1 synthesize");
        s.options.k1 = s.scenario.k1;
    }
    return s;
}

bool uses_general_hold(const TrackingScenario& s) {
    return std::any_of(s.holds.begin(), s.holds.end(), [](const HoldSpec& h) { return !h.is_zero_order(); });
}

struct Certified {
    CompensatorDesign design;
    Certificate certificate;
};

Certified certify_tracking(const TrackingSetup& s) {
    const auto& sc = s.scenario;
    Certified out{build_zoh_design(sc.plants, sc.exo, sc.graph, s.h, s.options), {}};
    if (!uses_general_hold(sc)) {
        out.certificate = certify_zoh(out.design, sc.plants, sc.exo, sc.graph);
        return out;
    }
    out.design.holds = sc.holds;
    std::vector<HoldBlocks> blocks;
    for (std::size_t i = 0; i < sc.plants.size(); ++i) {
        blocks.push_back(hold_blocks(sc.plants[i], sc.holds[i], out.design.k1[i], out.design.k2[i]));
    }
    auto general = certify_general_hold(blocks, sc.exo, sc.graph, s.h, out.design.mu);
    out.design.pi = general.pi_plus;
    out.certificate = std::move(general.certificate);
    return out;
}

void summarize(const Certificate& c, std::ostream& out) {
    double rho_max = 0.0;
    for (double r : c.rho_agent) rho_max = std::max(rho_max, r);
    out << "verdict: " << (c.verdict ? "pass" : "fail") << "\n"
        << "rho_agent_max: " << format_double(rho_max) << "\n"
        << "rho_eta: " << format_double(c.rho_eta) << "\n"
        << "mu: " << format_double(c.mu) << " (paper bound " << format_double(c.mu_paper_bound) << ", exact bound "
        << format_double(c.mu_exact_bound) << ")\n";
}

void report_assumptions(const Certificate& c, std::ostream& err) {
    const std::pair<const char*, const AssumptionCheck*> checks[] = {
        {"A1", &c.assumptions.a1}, {"A2", &c.assumptions.a2}, {"A3", &c.assumptions.a3}, {"A4", &c.assumptions.a4}};
    for (const auto& [name, check] : checks) {
        if (!check->pass) err << name << " failed: " << check->diagnostic << "\n";
    }
}

double dispatch_radius(const MicrogridParams& p) { return spectral_radius(dispatch_update_matrix(p)); }

MicrogridParams microgrid_setup(const RunConfig& rc, const ScenarioConfig& cfg) {
    MicrogridParams p = *cfg.microgrid;
    if (rc.mu) p.mu.assign(p.grids(), *rc.mu);
    if (rc.h) p.dispatch_h = *rc.h;
    p.validate();
    return p;
}

int microgrid_certify(const RunConfig& rc, const ScenarioConfig& cfg, std::ostream& out) {
    const auto p = microgrid_setup(rc, cfg);
    const double rho = dispatch_radius(p);
    ordered_json j;
    j["verdict"] = rho < 1.0 ? "pass" : "fail";
    j["rho_dispatch"] = rho;
    j["mu"] = p.step_sizes();
    j["dispatch_h"] = p.dispatch_h;
    write_file(prepare_out(rc) / "certificate.json", j.dump(2) + "\n");
    out << "verdict: " << (rho < 1.0 ? "pass" : "fail") << "\nrho_dispatch: " << format_double(rho) << "\n";
    return rho < 1.0 ? kOk : kCertificateFailed;
}

int cmd_certify(const RunConfig& rc, const ScenarioConfig& cfg, std::ostream& out, std::ostream& err) {
    if (!cfg.tracking) return microgrid_certify(rc, cfg, out);
    const auto setup = tracking_setup(rc, cfg);
    const auto result = certify_tracking(setup);
    write_file(prepare_out(rc) / "certificate.json", certificate_to_json(result.certificate) + "\n");
    summarize(result.certificate, out);
    if (!result.certificate.verdict) {
        report_assumptions(result.certificate, err);
        return kCertificateFailed;
    }
    return kOk;
}

int cmd_design(const RunConfig& rc, const ScenarioConfig& cfg, std::ostream& out, std::ostream& err) {
    if (!cfg.tracking) {
        err << "design: the microgrid scenario has no compensator to design\n";
        return kInputError;
    }
    const auto setup = tracking_setup(rc, cfg);
    const auto& sc = setup.scenario;
    const auto report = check_assumptions(sc.plants, sc.exo, sc.graph, setup.h);
    const auto dir = prepare_out(rc);
    if (!report.all_pass()) {
        Certificate c;
        c.h = setup.h;
        c.assumptions = report;
        c.notes.emplace_back("assumption check failed before design");
        write_file(dir / "certificate.json", certificate_to_json(c) + "\n");
        report_assumptions(c, err);
        return kCertificateFailed;
    }
    const auto result = certify_tracking(setup);
    write_file(dir / "design.json", design_to_json(result.design, result.certificate) + "\n");
    summarize(result.certificate, out);
    for (std::size_t i = 0; i < result.design.agents(); ++i) {
        out << "agent " << i + 1 << " K1: " << format_mat(result.design.k1[i]) << "\n";
    }
    if (!result.certificate.verdict) {
        report_assumptions(result.certificate, err);
        return kCertificateFailed;
    }
    return kOk;
}

ordered_json optional_time(const std::optional<double>& t) {
    return t ? ordered_json(*t) : ordered_json("never");
}

void write_errors_csv(const HybridTrace& trace, const fs::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (trace.records.empty()) return;
    f << "t,phase";
    const auto& first = trace.records.front().errors;
    for (std::size_t i = 0; i < first.size(); ++i) {
        for (std::size_t k = 0; k < first[i].size(); ++k) {
            f << ",e" << i + 1;
            if (first[i].size() > 1) f << "_" << k + 1;
        }
    }
    f << "\n";
    for (const auto& r : trace.records) {
        f << format_double(r.t) << ',' << phase_name(r.phase);
        for (const auto& e : r.errors)
            for (double v : e) f << ',' << format_double(v);
        f << "\n";
    }
}

ordered_json tracking_metrics(const HybridTrace& trace, const CompensatorDesign& d, std::uint64_t seed, double horizon) {
    ordered_json j;
    j["horizon"] = horizon;
    j["h"] = d.h;
    j["mu"] = d.mu;
    j["seed"] = seed;
    if (trace.records.empty()) return j;
    const auto metrics = error_metrics(trace, kSettlingThreshold);
    double final_max = 0.0;
    for (const auto& e : trace.records.back().errors) final_max = std::max(final_max, norm_inf(e));
    j["final_max_error"] = final_max;
    j["settling_threshold"] = kSettlingThreshold;
    ordered_json agents = ordered_json::array();
    for (std::size_t i = 0; i < metrics.agents.size(); ++i) {
        agents.push_back({{"agent", i + 1},
                          {"tail_max_error", metrics.agents[i].tail_max_error},
                          {"settling_time", optional_time(metrics.agents[i].settling_time)}});
    }
    j["agents"] = std::move(agents);
    j["contraction"] = metrics.contraction ? ordered_json(*metrics.contraction) : ordered_json(nullptr);
    j["final_disagreement"] = metrics.disagreement.empty() ? 0.0 : metrics.disagreement.back();
    return j;
}

int simulate_tracking(const RunConfig& rc, const ScenarioConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto setup = tracking_setup(rc, cfg);
    const auto& sc = setup.scenario;
    const double horizon = rc.horizon ? *rc.horizon : cfg.horizon.value_or(30.0);
    const std::uint64_t seed = rc.seed ? *rc.seed : cfg.seed.value_or(1);
    const auto dir = prepare_out(rc);

    const auto certified = certify_tracking(setup);
    write_file(dir / "certificate.json", certificate_to_json(certified.certificate) + "\n");
    if (!certified.certificate.verdict && !rc.force) {
        summarize(certified.certificate, out);
        report_assumptions(certified.certificate, err);
        err << "simulate: certificate failed; pass --force to run anyway\n";
        return kCertificateFailed;
    }

    const auto init = random_initial_state(sc, seed);
    SimulationOptions options;
    options.substeps = rc.substeps;
    options.force = true;

    auto emit = [&](const HybridTrace& trace, ordered_json metrics) {
        std::ofstream csv(dir / "trace.csv", std::ios::binary);
        write_trace_csv(trace, csv);
        write_errors_csv(trace, dir / "errors.csv");
        write_file(dir / "metrics.json", metrics.dump(2) + "\n");
    };

    try {
        const auto trace = simulate(sc.plants, sc.exo, certified.design, sc.graph, init.x0, init.eta0, init.w0,
                                    horizon, options);
        auto metrics = tracking_metrics(trace, certified.design, seed, horizon);
        metrics["diverged"] = false;
        out << "final_max_error: " << format_double(metrics["final_max_error"].get<double>()) << "\n";
        emit(trace, std::move(metrics));
        return kOk;
    } catch (const DivergenceError& e) {
        auto metrics = tracking_metrics(e.partial_trace(), certified.design, seed, horizon);
        metrics["diverged"] = true;
        metrics["diverged_at"] = e.last_state().t;
        emit(e.partial_trace(), std::move(metrics));
        err << "simulate: " << e.what() << " at t = " << format_double(e.last_state().t) << "\n";
        return kDiverged;
    }
}

void write_microgrid_outputs(const MicrogridTrace& trace, const MicrogridParams& p, const fs::path& dir) {
    const std::size_t n = p.grids();
    std::ofstream dispatch(dir / "dispatch.csv", std::ios::binary);
    dispatch << "t,p_main";
    for (std::size_t i = 0; i < n; ++i) dispatch << ",lambda" << i + 1;
    for (std::size_t i = 0; i < n; ++i) dispatch << ",p_r" << i + 1;
    dispatch << ",sum_p_r\n";
    std::ofstream freq(dir / "frequency.csv", std::ios::binary);
    freq << "t";
    for (std::size_t i = 0; i < n; ++i) freq << ",omega" << i + 1;
    freq << "\n";
    std::ofstream csv(dir / "trace.csv", std::ios::binary);
    csv << "t,phase,agent,component,value\n";
    const char* names[] = {"delta", "omega", "dv", "p", "q"};
    for (const auto& r : trace.records) {
        const std::string t = format_double(r.t);
        double total = 0.0;
        dispatch << t << ',' << format_double(r.p_main);
        for (double l : r.lambda) dispatch << ',' << format_double(l);
        for (double v : r.p_r) {
            dispatch << ',' << format_double(v);
            total += v;
        }
        dispatch << ',' << format_double(total) << "\n";
        freq << t;
        for (const auto& g : r.grids) freq << ',' << format_double(p.omega_d + g[1]);
        freq << "\n";
        for (std::size_t i = 0; i < n; ++i) {
            csv << t << ",dispatch," << i + 1 << ",lambda," << format_double(r.lambda[i]) << "\n";
            csv << t << ",dispatch," << i + 1 << ",p_r," << format_double(r.p_r[i]) << "\n";
            for (std::size_t c = 0; c < 5; ++c) {
                const double v = c == 1 ? p.omega_d + r.grids[i][c] : r.grids[i][c];
                csv << t << ",flow," << i + 1 << ',' << names[c] << ',' << format_double(v) << "\n";
            }
        }
    }
}

ordered_json microgrid_metrics(const MicrogridTrace& trace, const MicrogridParams& p, double horizon) {
    const auto& lambda = trace.final_dispatch.lambda;
    const auto [lo, hi] = std::minmax_element(lambda.begin(), lambda.end());
    double total = 0.0;
    for (double v : trace.final_dispatch.p_r) total += v;
    double max_domega = 0.0;
    for (const auto& g : trace.final_grids) max_domega = std::max(max_domega, std::abs(g[1]));
    const double p_main = p.demand_at(horizon);
    const double star = optimal_lambda(p, p_main);
    double lambda_error = 0.0;
    for (double l : lambda) lambda_error = std::max(lambda_error, std::abs(l - star));
    ordered_json j;
    j["horizon"] = horizon;
    j["dispatch_h"] = p.dispatch_h;
    j["p_main"] = p_main;
    j["lambda"] = lambda;
    j["lambda_spread"] = *hi - *lo;
    j["lambda_star"] = star;
    j["lambda_error"] = lambda_error;
    j["sum_p_r"] = total;
    j["max_abs_delta_omega"] = max_domega;
    j["rho_dispatch"] = dispatch_radius(p);
    return j;
}

int simulate_microgrid(const RunConfig& rc, const ScenarioConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto p = microgrid_setup(rc, cfg);
    const double horizon = rc.horizon ? *rc.horizon : cfg.horizon.value_or(5.0);
    const auto steps = static_cast<std::size_t>(std::floor(horizon / p.dispatch_h + 1e-9));
    const std::size_t stride = std::max<std::size_t>(1, (steps + kMicrogridRecords - 1) / kMicrogridRecords);
    const auto dir = prepare_out(rc);
    try {
        const auto trace = run_microgrid(p, horizon, stride);
        write_microgrid_outputs(trace, p, dir);
        auto metrics = microgrid_metrics(trace, p, horizon);
        metrics["diverged"] = false;
        out << "lambda_spread: " << format_double(metrics["lambda_spread"].get<double>()) << "\n"
            << "lambda_error: " << format_double(metrics["lambda_error"].get<double>()) << "\n"
            << "sum_p_r: " << format_double(metrics["sum_p_r"].get<double>()) << "\n";
        write_file(dir / "metrics.json", metrics.dump(2) + "\n");
        return kOk;
    } catch (const MicrogridDivergenceError& e) {
        write_microgrid_outputs(e.partial_trace(), p, dir);
        ordered_json metrics{{"horizon", horizon}, {"diverged", true}};
        write_file(dir / "metrics.json", metrics.dump(2) + "\n");
        err << "simulate: " << e.what() << "\n";
        return kDiverged;
    }
}

int cmd_simulate(const RunConfig& rc, const ScenarioConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.tracking) return simulate_tracking(rc, cfg, out, err);
    return simulate_microgrid(rc, cfg, out, err);
}

void add_common(CLI::App* sub, RunConfig& rc) {
    sub->add_option("--scenario", rc.scenario, "Builtin scenario (example41, microgrid) or config path");
    sub->add_option("--config", rc.config, "Scenario config file");
    sub->add_option("-T,--horizon", rc.horizon, "Simulation horizon in seconds")->check(CLI::PositiveNumber);
    sub->add_option("--substeps", rc.substeps, "Dense-output samples per sampling interval")
        ->check(CLI::Range(std::size_t{1}, std::size_t{1000000}));
    sub->add_option("--mu", rc.mu, "Consensus step size override")->check(CLI::PositiveNumber);
    sub->add_option("--h", rc.h, "Sampling period override")->check(CLI::PositiveNumber);
    sub->add_option("--k1", rc.k1, "Source of K1 gains")->check(CLI::IsMember({"paper", "synthesize"}));
    sub->add_flag("--force", rc.force, "Simulate even when the certificate fails");
    sub->add_option("--out", rc.out, "Output directory");
    sub->add_option("--seed", rc.seed, "Seed for random initial states");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig rc;
    CLI::App app{"Cooperative output regulation with sampled-data compensators", "corp"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);
    for (const char* name : {"certify", "design", "simulate"}) {
        auto* sub = app.add_subcommand(name, std::string(name) + " a scenario");
        add_common(sub, rc);
        sub->callback([&rc, name] { rc.command = name; });
    }

    std::vector<std::string> reversed(args.begin() + (args.empty() ? 0 : 1), args.end());
    std::reverse(reversed.begin(), reversed.end());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }

    try {
        const auto cfg = resolve(rc);
        if (rc.command == "certify") return cmd_certify(rc, cfg, out, err);
        if (rc.command == "design") return cmd_design(rc, cfg, out, err);
        return cmd_simulate(rc, cfg, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kInputError;
    } catch (const CertificateRejected& e) {
        report_assumptions(e.certificate(), err);
        err << "error: " << e.what() << "\n";
        return kCertificateFailed;
    } catch (const AgentError& e) {
        err << "error: " << e.what() << "\n";
        return kCertificateFailed;
    } catch (const SynthesisError& e) {
        err << "error: " << e.what() << "\n";
        return kCertificateFailed;
    } catch (const SeparationError& e) {
        err << "error: " << e.what() << "\n";
        return kCertificateFailed;
    } catch (const RootConditionError& e) {
        err << "error: " << e.what() << "\n";
        return kCertificateFailed;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
}

}  // namespace corp::cli
