// Command-line harness: solve, run, sweep, stability, constants, reproduce.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tdtarget/tdtarget.hpp"

namespace {

using namespace tdtarget;

struct Common {
    std::string config;
    std::optional<std::size_t> seeds;
    std::optional<std::uint64_t> base_seed;
    std::string out;
    std::string metric;
};

void add_common(CLI::App* cmd, Common& c, bool need_config) {
    auto* opt = cmd->add_option("--config", c.config, "experiment config (JSON)");
    if (need_config) opt->required()->check(CLI::ExistingFile);
    else opt->check(CLI::ExistingFile);
    cmd->add_option("--seeds", c.seeds, "number of seeds")->check(CLI::PositiveNumber);
    cmd->add_option("--base-seed", c.base_seed, "first seed");
    cmd->add_option("--out", c.out, "output file prefix");
    cmd->add_option("--metric", c.metric, "summary metric")->check(CLI::IsMember({"l2", "dnorm", "both"}));
}

void apply_overrides(ExperimentConfig& cfg, const Common& c) {
    if (c.seeds) cfg.num_seeds = *c.seeds;
    if (c.base_seed) cfg.base_seed = *c.base_seed;
    if (!c.out.empty()) cfg.output = c.out;
    if (!c.metric.empty()) cfg.metric = parse_metric(c.metric);
}

ExperimentConfig base_config(const Common& c) {
    ExperimentConfig cfg;
    if (!c.config.empty()) {
        cfg = load_config(c.config);
    } else {
        cfg.algorithm = atd_config(1000.0, 0.9);
    }
    apply_overrides(cfg, c);
    return cfg;
}

std::string vec_str(const Vector& v) {
    std::string s = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt17(v(i));
    return s + "]";
}

std::string complex_str(const std::complex<double>& z) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g%+.6gi", z.real(), z.imag());
    return buf;
}

void print_summary_tail(const EnsembleSummary& s) {
    std::printf("%-28s seeds=%zu diverged=%zu", s.label.c_str(), s.seeds_used, s.diverged_seeds.size());
    if (!s.rows.empty()) {
        const SummaryRow& last = s.rows.back();
        const auto names = metric_names(s.metric);
        std::printf(" samples=%zu", last.samples);
        for (std::size_t i = 0; i < names.size(); ++i) {
            std::printf(" mean_%s=%.6g var_%s=%.6g", names[i].c_str(), last.mean[i], names[i].c_str(), last.var[i]);
        }
    }
    std::printf("\n");
}

int cmd_solve(const Common& c) {
    const ExperimentConfig cfg = base_config(c);
    const SolveReport rep = solve_and_report(cfg);
    std::printf("theta_star          = %s\n", vec_str(rep.theta_star).c_str());
    std::printf("value_function      = %s\n", vec_str(rep.value_function).c_str());
    std::printf("approximation_gap   = %.17g\n", rep.approximation_gap);
    std::printf("fixed_point_residual= %.3g\n", rep.fixed_point_residual);
    for (const auto& [name, s] : rep.stability) {
        std::printf("%-32s hurwitz=%s max_real=%.6g lyapunov=%.6g\n", name.c_str(), s.hurwitz ? "true" : "false",
                    s.max_real_part, s.lyapunov_residual.value_or(NAN));
    }
    if (rep.constants) {
        const BoundConstants& k = *rep.constants;
        std::printf("constants (beta=%.6g kappa=%.6g): mu=%.6g L=%.6g xi1=%.6g xi2=%.6g xi3=%.6g chi1=%.6g chi2=%.6g "
                    "chi3=%.6g rho1=%.6g rho2=%.6g omega1=%.6g omega2=%.6g\n",
                    k.beta, k.kappa, k.mu, k.lipschitz, k.xi1, k.xi2, k.xi3, k.chi1, k.chi2, k.chi3, k.rho1, k.rho2,
                    k.omega1, k.omega2);
    } else {
        std::printf("constants unavailable: %s\n", rep.constants_error.c_str());
    }
    if (!cfg.output.empty()) {
        const Problem p = build_problem(cfg.process, cfg.features);
        std::ostringstream theta;
        theta << "index,theta_star\n";
        for (Eigen::Index i = 0; i < rep.theta_star.size(); ++i) theta << i << ',' << fmt17(rep.theta_star(i)) << '\n';
        write_text(cfg.output + "_theta_star.csv", theta.str());
        std::ostringstream states;
        states << "state,d,reward,value,phi_theta_star\n";
        const Vector approx = p.model.phi() * rep.theta_star;
        for (Eigen::Index s = 0; s < approx.size(); ++s) {
            states << s + 1 << ',' << fmt17(p.model.d()(s)) << ',' << fmt17(p.model.rewards()(s)) << ','
                   << fmt17(rep.value_function(s)) << ',' << fmt17(approx(s)) << '\n';
        }
        write_text(cfg.output + "_states.csv", states.str());
        std::ostringstream proj;
        const Matrix& pi = p.model.projection();
        for (Eigen::Index i = 0; i < pi.rows(); ++i) {
            for (Eigen::Index j = 0; j < pi.cols(); ++j) proj << (j ? "," : "") << fmt17(pi(i, j));
            proj << '\n';
        }
        write_text(cfg.output + "_projection.csv", proj.str());
        std::printf("wrote %s_{theta_star,states,projection}.csv\n", cfg.output.c_str());
    }
    return 0;
}

int cmd_run(const Common& c) {
    const ExperimentConfig cfg = base_config(c);
    const ExperimentResult r = run_experiment(cfg);
    print_summary_tail(r.summary);
    for (const auto& f : r.files) std::printf("wrote %s\n", f.c_str());
    return r.summary.seeds_used > 0 ? 0 : 2;
}

int cmd_sweep(const Common& c, const std::string& param, const std::vector<double>& values) {
    const ExperimentConfig cfg = base_config(c);
    int status = 0;
    for (const SweepEntry& e : run_sweep(cfg, param, values)) {
        if (e.result) {
            print_summary_tail(e.result->summary);
        } else {
            std::printf("%s=%g failed: %s\n", param.c_str(), e.value, e.error.c_str());
            status = 2;
        }
    }
    return status;
}

int cmd_stability(const Common& c, std::vector<double> deltas, std::vector<double> nus) {
    const ExperimentConfig cfg = base_config(c);
    const Problem p = build_problem(cfg.process, cfg.features);
    if (deltas.empty()) deltas = {cfg.algorithm.delta.value_or(0.9)};
    if (nus.empty()) nus = {cfg.algorithm.nu.value_or(0.5)};
    std::ostringstream csv;
    csv << "system,delta,nu,hurwitz,max_real_part,lyapunov_residual,equilibrium_gap,eig_index,eig_real,eig_imag\n";
    const Vector star = p.model.fixed_point();
    const Vector stacked = (Vector(2 * star.size()) << star, star).finished();
    std::printf("%-12s %10s %6s %8s %14s %14s %12s %s\n", "system", "delta", "nu", "hurwitz", "max_real",
                "lyapunov", "eq_gap", "schur");
    auto emit = [&](const std::string& name, double delta, std::optional<double> nu, const OdeSystem& sys) {
        const StabilityReport rep = analyse(sys);
        const double gap = rep.equilibrium ? (*rep.equilibrium - stacked).cwiseAbs().maxCoeff() : NAN;
        std::string schur = "-";
        if (name == "a_td") {
            try {
                schur = schur_delta_condition(p.model, delta) ? "true" : "false";
            } catch (const Error& e) {
                schur = std::string("error: ") + e.what();
            }
        }
        std::printf("%-12s %10.4g %6s %8s %14.6g %14.6g %12.3g %s\n", name.c_str(), delta,
                    nu ? fmt_short(*nu).c_str() : "-", rep.hurwitz ? "true" : "false", rep.max_real_part,
                    rep.lyapunov_residual.value_or(NAN), gap, schur.c_str());
        for (std::size_t i = 0; i < rep.eigenvalues.size(); ++i) {
            csv << name << ',' << fmt17(delta) << ',' << (nu ? fmt17(*nu) : "") << ',' << (rep.hurwitz ? 1 : 0) << ','
                << fmt17(rep.max_real_part) << ',' << fmt17(rep.lyapunov_residual.value_or(NAN)) << ',' << fmt17(gap)
                << ',' << i << ',' << fmt17(rep.eigenvalues[i].real()) << ',' << fmt17(rep.eigenvalues[i].imag())
                << '\n';
        }
        std::printf("    eigenvalues:");
        for (const auto& z : rep.eigenvalues) std::printf(" %s", complex_str(z).c_str());
        std::printf("\n");
    };
    for (double d : deltas) {
        if (d > 0.0) emit("a_td", d, std::nullopt, atd_ode_system(p.model, d));
        emit("d_td", d, std::nullopt, dtd_ode_system(p.model, d));
        for (double nu : nus) emit("d_td_random", d, nu, randomized_dtd_ode_system(p.model, d, nu));
    }
    if (!cfg.output.empty()) {
        write_text(cfg.output + "_stability.csv", csv.str());
        std::printf("wrote %s_stability.csv\n", cfg.output.c_str());
    }
    return 0;
}

int cmd_constants(const Common& c, std::optional<double> beta, std::optional<double> kappa,
                  std::vector<double> epsilons) {
    const ExperimentConfig cfg = base_config(c);
    const Problem p = build_problem(cfg.process, cfg.features);
    const auto [beta0, kappa0] = default_bound_parameters(p.model);
    const double b = beta.value_or(beta0);
    const double k = kappa.value_or(kappa0);
    const BoundConstants bc = bound_constants(p.model, b, k, p.model.fixed_point());
    const auto row = [](const char* name, double v) { std::printf("%-14s %.17g\n", name, v); };
    row("beta", bc.beta);
    row("kappa", bc.kappa);
    row("mu", bc.mu);
    row("lipschitz", bc.lipschitz);
    row("phi_2", bc.phi_spectral);
    row("phi_D", bc.phi_d);
    row("xi1", bc.xi1);
    row("xi2", bc.xi2);
    row("xi3", bc.xi3);
    row("chi1", bc.chi1);
    row("chi2", bc.chi2);
    row("chi3", bc.chi3);
    row("rho1", bc.rho1);
    row("rho2", bc.rho2);
    row("omega1", bc.omega1);
    row("omega2", bc.omega2);
    if (epsilons.empty()) epsilons = {0.1, 0.01, 0.001};
    for (double e : epsilons) {
        std::printf("sample_complexity(eps=%g) %.17g\n", e,
                    sample_complexity(p.model, e, b, k, p.model.fixed_point(), 0.0));
    }
    for (double e : epsilons) {
        std::printf("ptd_error_bound(T=100, eps_k=%g, e0=1) %.17g\n", e,
                    ptd_error_bound(100, std::vector<double>(99, e), p.model, 1.0));
    }
    return 0;
}

int cmd_reproduce(const Common& c, const std::string& figure) {
    const std::string prefix = c.out.empty() ? "results/" + figure : c.out;
    int status = 0;
    for (ExperimentConfig cfg : preset(figure)) {
        Common o = c;
        o.out = prefix + "_" + cfg.label;
        apply_overrides(cfg, o);
        const ExperimentResult r = run_experiment(cfg);
        print_summary_tail(r.summary);
        if (r.summary.seeds_used == 0) status = 2;
    }
    std::printf("wrote %s_*.csv\n", prefix.c_str());
    return status;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Target-based TD learning: solver, stability checks and experiment runner"};
    app.require_subcommand(1);

    Common solve_opts, run_opts, sweep_opts, stab_opts, const_opts, repro_opts;
    auto* solve = app.add_subcommand("solve", "fixed point, value function, stability verdicts, constants");
    add_common(solve, solve_opts, false);

    auto* run = app.add_subcommand("run", "seed ensemble for one config");
    add_common(run, run_opts, true);

    auto* sweep = app.add_subcommand("sweep", "one ensemble per parameter value");
    add_common(sweep, sweep_opts, true);
    std::string param;
    std::vector<double> values;
    sweep->add_option("--param", param, "delta, nu, alpha, beta or inner_length")->required();
    sweep->add_option("--values", values, "parameter values")->delimiter(',');

    auto* stab = app.add_subcommand("stability", "ODE spectra and Lyapunov checks");
    add_common(stab, stab_opts, false);
    std::vector<double> deltas, nus;
    stab->add_option("--delta", deltas, "delta values")->delimiter(',');
    stab->add_option("--nu", nus, "nu values")->delimiter(',');

    auto* cons = app.add_subcommand("constants", "finite-sample constants and bounds");
    add_common(cons, const_opts, false);
    std::optional<double> beta, kappa;
    std::vector<double> eps;
    cons->add_option("--beta", beta, "inner step numerator (default 2/mu)");
    cons->add_option("--kappa", kappa, "inner step offset (default: smallest meeting the step cap)");
    cons->add_option("--epsilon", eps, "target accuracies")->delimiter(',');

    auto* repro = app.add_subcommand("reproduce", "run a figure preset");
    add_common(repro, repro_opts, false);
    std::string figure;
    repro->add_option("figure", figure, "fig1 .. fig6")->required()->check(CLI::IsMember(preset_names()));

    CLI11_PARSE(app, argc, argv);
    try {
        if (*solve) return cmd_solve(solve_opts);
        if (*run) return cmd_run(run_opts);
        if (*sweep) return cmd_sweep(sweep_opts, param, values);
        if (*stab) return cmd_stability(stab_opts, deltas, nus);
        if (*cons) return cmd_constants(const_opts, beta, kappa, eps);
        if (*repro) return cmd_reproduce(repro_opts, figure);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
