#pragma once

// Config-driven seed ensembles, CSV traces and summaries, parameter sweeps
// and the figure presets.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "tdtarget/bellman.hpp"
#include "tdtarget/errors.hpp"
#include "tdtarget/learners.hpp"
#include "tdtarget/mrp.hpp"
#include "tdtarget/sampling.hpp"
#include "tdtarget/schedule.hpp"
#include "tdtarget/stability.hpp"

namespace tdtarget {

using Json = nlohmann::json;

inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string fmt_short(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

enum class Metric { l2, dnorm, both };

inline Metric parse_metric(const std::string& s) {
    if (s == "l2") return Metric::l2;
    if (s == "dnorm") return Metric::dnorm;
    if (s == "both") return Metric::both;
    throw InvalidInput("metric must be one of l2, dnorm, both (got '" + s + "')");
}

inline std::vector<std::string> metric_names(Metric m) {
    switch (m) {
    case Metric::l2: return {"err_l2"};
    case Metric::dnorm: return {"err_dnorm"};
    case Metric::both: return {"err_l2", "err_dnorm"};
    }
    return {};
}

// -----------------------------------------------------------------------------
// Configuration
// -----------------------------------------------------------------------------

struct ProcessSpec {
    std::size_t num_states = 10;
    double gamma = 0.9;
    std::optional<Matrix> transition;     ///< nullopt: uniform
    std::optional<Vector> reward_means;   ///< nullopt: draw U[0, reward_high] per state
    double reward_high = 20.0;
    double reward_noise = 0.0;            ///< half-width of the bounded reward perturbation
    std::optional<double> sigma;          ///< default: reward_high, or the largest given mean
    std::uint64_t seed = 0;

    MarkovRewardProcess build() const {
        if (num_states < 1) {
            throw InvalidInput("num_states must be positive");
        }
        const auto n = static_cast<Eigen::Index>(num_states);
        Matrix p = transition ? *transition : Matrix::Constant(n, n, 1.0 / static_cast<double>(num_states));
        if (p.rows() != n) {
            throw InvalidInput("transition rows do not match num_states");
        }
        RewardLaw law;
        law.noise_halfwidth = reward_noise;
        if (reward_means) {
            law.mean = *reward_means;
        } else {
            CounterRng rng(seed);
            law.mean.resize(n);
            for (Eigen::Index s = 0; s < n; ++s) law.mean(s) = rng.uniform(0.0, reward_high);
        }
        double ceiling = reward_high;
        if (sigma) {
            ceiling = *sigma;
        } else if (reward_means) {
            ceiling = law.mean.size() ? std::max(0.0, law.mean.maxCoeff()) : 0.0;
        }
        return MarkovRewardProcess(std::move(p), std::move(law), gamma, ceiling);
    }
};

struct ExperimentConfig {
    std::string label = "run";
    ProcessSpec process;
    RbfFeatureSpec features{{0.0, 10.0}, 200.0, RbfForm::gaussian};
    AlgorithmConfig algorithm;
    std::size_t budget = 3000;  ///< SO calls
    std::size_t num_seeds = 20;
    std::uint64_t base_seed = 0;
    std::string output;         ///< file prefix; empty writes nothing
    Metric metric = Metric::both;
    bool zero_init = false;

    void validate() const {
        if (budget < 1) throw InvalidInput("budget must be >= 1");
        if (num_seeds < 1) throw InvalidInput("num_seeds must be >= 1");
        algorithm.validate();
    }
};

namespace detail {

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

inline Vector to_vector(const Json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Matrix to_matrix(const Json& j) {
    const auto rows = j.get<std::vector<std::vector<double>>>();
    if (rows.empty()) throw InvalidInput("transition matrix is empty");
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size()) throw InvalidInput("transition rows have different lengths");
        for (std::size_t j2 = 0; j2 < rows[i].size(); ++j2) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j2)) = rows[i][j2];
        }
    }
    return m;
}

inline Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open config file '" + path.string() + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw InvalidInput("malformed JSON in '" + path.string() + "': " + e.what());
    }
}

} // namespace detail

inline StepSizeSchedule parse_schedule(const Json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "polynomial") {
        return StepSizeSchedule::polynomial(j.at("numerator").get<double>(), j.at("offset").get<double>());
    }
    if (kind == "geometric") {
        return StepSizeSchedule::geometric(j.at("numerator").get<double>(), j.at("offset").get<double>(),
                                           j.at("decay").get<double>());
    }
    if (kind == "constant") {
        return StepSizeSchedule::constant(j.at("value").get<double>());
    }
    throw InvalidInput("unknown schedule kind '" + kind + "'");
}

inline Json schedule_to_json(const StepSizeSchedule& s) {
    switch (s.kind()) {
    case StepSizeSchedule::Kind::polynomial:
        return {{"kind", "polynomial"}, {"numerator", s.numerator()}, {"offset", s.offset()}};
    case StepSizeSchedule::Kind::geometric:
        return {{"kind", "geometric"}, {"numerator", s.numerator()}, {"offset", s.offset()}, {"decay", s.decay()}};
    case StepSizeSchedule::Kind::constant:
        return {{"kind", "constant"}, {"value", s.numerator()}};
    }
    return {};
}

inline ProcessSpec parse_process(const Json& j) {
    ProcessSpec p;
    p.num_states = detail::get_or<std::size_t>(j, "num_states", p.num_states);
    p.gamma = detail::get_or<double>(j, "gamma", p.gamma);
    p.seed = detail::get_or<std::uint64_t>(j, "seed", p.seed);
    if (j.contains("transition")) {
        const Json& t = j.at("transition");
        if (t.is_string()) {
            if (t.get<std::string>() != "uniform") throw InvalidInput("transition must be \"uniform\" or a matrix");
        } else {
            p.transition = detail::to_matrix(t);
            p.num_states = static_cast<std::size_t>(p.transition->rows());
        }
    }
    if (j.contains("rewards")) {
        const Json& r = j.at("rewards");
        if (r.contains("means")) p.reward_means = detail::to_vector(r.at("means"));
        p.reward_high = detail::get_or<double>(r, "high", p.reward_high);
        p.reward_noise = detail::get_or<double>(r, "noise", p.reward_noise);
    }
    if (j.contains("sigma")) p.sigma = j.at("sigma").get<double>();
    return p;
}

inline RbfFeatureSpec parse_features(const Json& j) {
    RbfFeatureSpec f;
    f.centers = j.at("centers").get<std::vector<double>>();
    f.scale = detail::get_or<double>(j, "scale", f.scale);
    const std::string form = detail::get_or<std::string>(j, "form", "gaussian");
    if (form == "displayed") {
        f.form = RbfForm::displayed;
    } else if (form == "gaussian") {
        f.form = RbfForm::gaussian;
    } else {
        throw InvalidInput("feature form must be displayed or gaussian");
    }
    return f;
}

inline AlgorithmConfig parse_algorithm(const Json& j) {
    AlgorithmConfig a;
    a.variant = parse_variant(j.at("variant").get<std::string>());
    if (j.contains("schedule")) a.schedule = parse_schedule(j.at("schedule"));
    if (j.contains("delta")) a.delta = j.at("delta").get<double>();
    if (j.contains("nu")) a.nu = j.at("nu").get<double>();
    if (j.contains("inner_lengths")) {
        const Json& l = j.at("inner_lengths");
        a.inner_lengths = l.is_array() ? InnerLengths{l.get<std::vector<std::size_t>>()}
                                       : InnerLengths::constant(l.get<std::size_t>());
    }
    if (j.contains("inner_schedule")) a.inner_schedule = parse_schedule(j.at("inner_schedule"));
    if (j.contains("inner_index")) {
        const std::string idx = j.at("inner_index").get<std::string>();
        if (idx == "global") {
            a.inner_index = InnerIndex::global;
        } else if (idx != "per_cycle") {
            throw InvalidInput("inner_index must be per_cycle or global");
        }
    }
    a.shared_samples = detail::get_or<bool>(j, "shared_samples", false);
    a.validate();
    return a;
}

/// `base_dir` resolves a relative "process_file" reference.
inline ExperimentConfig parse_config(const Json& j, const std::filesystem::path& base_dir = {}) {
    try {
        ExperimentConfig c;
        c.label = detail::get_or<std::string>(j, "label", c.label);
        if (j.contains("process_file")) {
            std::filesystem::path ref = j.at("process_file").get<std::string>();
            if (ref.is_relative()) ref = base_dir / ref;
            if (!std::filesystem::exists(ref)) {
                throw InvalidInput("referenced process file '" + ref.string() + "' does not exist");
            }
            c.process = parse_process(detail::read_json_file(ref));
        } else if (j.contains("process")) {
            c.process = parse_process(j.at("process"));
        }
        if (j.contains("features")) c.features = parse_features(j.at("features"));
        c.algorithm = parse_algorithm(j.at("algorithm"));
        c.budget = detail::get_or<std::size_t>(j, "budget", c.budget);
        c.num_seeds = detail::get_or<std::size_t>(j, "num_seeds", c.num_seeds);
        c.base_seed = detail::get_or<std::uint64_t>(j, "base_seed", c.base_seed);
        c.output = detail::get_or<std::string>(j, "output", c.output);
        if (j.contains("metrics")) c.metric = parse_metric(j.at("metrics").get<std::string>());
        c.zero_init = detail::get_or<bool>(j, "zero_init", false);
        c.validate();
        return c;
    } catch (const Json::exception& e) {
        throw InvalidInput(std::string("invalid config: ") + e.what());
    }
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    return parse_config(detail::read_json_file(path), path.parent_path());
}

/// Process, features, derived model and oracle for a config.
struct Problem {
    ProjectedModel model;
    SamplingOracle oracle;
};

inline Problem build_problem(const ProcessSpec& ps, const RbfFeatureSpec& fs) {
    MarkovRewardProcess process = ps.build();
    FeatureModel features(process, build_rbf_features(fs, process.num_states()));
    SamplingOracle oracle(process, features);
    return Problem{ProjectedModel(std::move(process), std::move(features)), std::move(oracle)};
}

// -----------------------------------------------------------------------------
// Ensembles
// -----------------------------------------------------------------------------

struct SeedRun {
    std::uint64_t seed = 0;
    Trace trace;
};

struct SummaryRow {
    std::size_t samples = 0;
    std::vector<double> mean, var, min, max;  ///< one entry per summarised metric
};

struct EnsembleSummary {
    std::string label;
    Metric metric = Metric::both;
    std::vector<SummaryRow> rows;
    std::size_t seeds_used = 0;
    std::vector<std::uint64_t> diverged_seeds;
};

struct ExperimentResult {
    EnsembleSummary summary;
    std::vector<SeedRun> runs;
    std::vector<std::string> files;
};

inline std::string trace_header(std::size_t n) {
    std::string h = "k,samples,err_l2,err_dnorm";
    for (std::size_t i = 0; i < n; ++i) h += ",theta_" + std::to_string(i);
    for (std::size_t i = 0; i < n; ++i) h += ",target_" + std::to_string(i);
    return h;
}

inline std::string trace_csv(const ExperimentConfig& cfg, const SeedRun& run, std::size_t n) {
    std::ostringstream os;
    os << "# label=" << cfg.label << ' ' << cfg.algorithm.describe() << " budget=" << cfg.budget
       << " seed=" << run.seed;
    if (run.trace.diverged) os << " diverged=true";
    os << '\n' << trace_header(n) << '\n';
    for (const TraceRow& r : run.trace.rows) {
        os << r.k << ',' << r.samples << ',' << fmt17(r.err_l2) << ',' << fmt17(r.err_dnorm);
        for (Eigen::Index i = 0; i < r.theta.size(); ++i) os << ',' << fmt17(r.theta(i));
        for (Eigen::Index i = 0; i < r.target.size(); ++i) os << ',' << fmt17(r.target(i));
        os << '\n';
    }
    return os.str();
}

inline std::string summary_csv(const EnsembleSummary& s) {
    std::ostringstream os;
    os << "# label=" << s.label << " seeds_used=" << s.seeds_used << " seeds_diverged=" << s.diverged_seeds.size()
       << '\n';
    os << "samples";
    for (const auto& m : metric_names(s.metric)) os << ",mean_" << m << ",var_" << m << ",min_" << m << ",max_" << m;
    os << '\n';
    for (const SummaryRow& r : s.rows) {
        os << r.samples;
        for (std::size_t i = 0; i < r.mean.size(); ++i) {
            os << ',' << fmt17(r.mean[i]) << ',' << fmt17(r.var[i]) << ',' << fmt17(r.min[i]) << ',' << fmt17(r.max[i]);
        }
        os << '\n';
    }
    return os.str();
}

/// Per-checkpoint mean, population variance, min and max over the seeds that
/// did not diverge.
inline EnsembleSummary summarize(const std::string& label, Metric metric, const std::vector<SeedRun>& runs) {
    EnsembleSummary s;
    s.label = label;
    s.metric = metric;
    std::vector<const Trace*> kept;
    for (const SeedRun& r : runs) {
        if (r.trace.diverged) {
            s.diverged_seeds.push_back(r.seed);
        } else {
            kept.push_back(&r.trace);
        }
    }
    s.seeds_used = kept.size();
    if (kept.empty()) return s;
    const std::size_t rows = kept.front()->rows.size();
    for (const Trace* t : kept) {
        if (t->rows.size() != rows) throw NumericalError("seed traces have different checkpoint sets");
    }
    const auto names = metric_names(metric);
    for (std::size_t i = 0; i < rows; ++i) {
        SummaryRow row;
        row.samples = kept.front()->rows[i].samples;
        for (const auto& name : names) {
            double sum = 0.0, lo = INFINITY, hi = -INFINITY;
            std::vector<double> vals;
            vals.reserve(kept.size());
            for (const Trace* t : kept) {
                const TraceRow& tr = t->rows[i];
                if (tr.samples != row.samples) throw NumericalError("seed traces have different checkpoint sets");
                const double v = name == "err_l2" ? tr.err_l2 : tr.err_dnorm;
                vals.push_back(v);
                sum += v;
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            const double mean = sum / static_cast<double>(vals.size());
            double ss = 0.0;
            for (double v : vals) ss += (v - mean) * (v - mean);
            row.mean.push_back(mean);
            row.var.push_back(ss / static_cast<double>(vals.size()));
            row.min.push_back(lo);
            row.max.push_back(hi);
        }
        s.rows.push_back(std::move(row));
    }
    return s;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
    out << text;
}

inline std::string seed_tag(std::uint64_t seed) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%03llu", static_cast<unsigned long long>(seed));
    return buf;
}

/// Seeds base_seed .. base_seed + num_seeds - 1, run concurrently, each with
/// its own stream. Output is a pure function of the config.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const Problem problem = build_problem(cfg.process, cfg.features);
    const std::size_t n = problem.model.num_features();

    std::vector<SeedRun> runs(cfg.num_seeds);
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::string first_error;
    auto worker = [&] {
        for (std::size_t i = next++; i < cfg.num_seeds; i = next++) {
            try {
                const std::uint64_t seed = cfg.base_seed + i;
                SampleStream stream(seed);
                LearnerState init = initial_state(cfg.algorithm, stream, n, cfg.zero_init);
                runs[i] = SeedRun{seed, record_run(cfg.algorithm, problem.model, problem.oracle, stream, cfg.budget,
                                                   std::move(init))};
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (first_error.empty()) first_error = e.what();
            }
        }
    };
    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(cfg.num_seeds, std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (!first_error.empty()) throw NumericalError("run failed: " + first_error);

    ExperimentResult result;
    result.summary = summarize(cfg.label, cfg.metric, runs);
    if (!cfg.output.empty()) {
        for (const SeedRun& r : runs) {
            const std::string path = cfg.output + "_seed" + seed_tag(r.seed) + ".csv";
            write_text(path, trace_csv(cfg, r, n));
            result.files.push_back(path);
        }
        const std::string path = cfg.output + "_summary.csv";
        write_text(path, summary_csv(result.summary));
        result.files.push_back(path);
    }
    result.runs = std::move(runs);
    return result;
}

// -----------------------------------------------------------------------------
// Sweeps
// -----------------------------------------------------------------------------

struct SweepEntry {
    double value = 0.0;
    std::optional<ExperimentResult> result;
    std::string error;
};

/// Copy of `cfg` with one hyperparameter replaced. Parameters: delta, nu,
/// alpha (schedule numerator), beta (inner schedule numerator), inner_length.
inline ExperimentConfig with_parameter(ExperimentConfig cfg, const std::string& parameter, double value) {
    auto renumerate = [&](const std::optional<StepSizeSchedule>& s, const char* what) {
        if (!s) throw InvalidInput(std::string("variant has no ") + what + " schedule");
        switch (s->kind()) {
        case StepSizeSchedule::Kind::polynomial: return StepSizeSchedule::polynomial(value, s->offset());
        case StepSizeSchedule::Kind::geometric: return StepSizeSchedule::geometric(value, s->offset(), s->decay());
        default: return StepSizeSchedule::constant(value);
        }
    };
    if (parameter == "delta") {
        if (!cfg.algorithm.delta) throw InvalidInput("delta does not apply to this variant");
        cfg.algorithm.delta = value;
    } else if (parameter == "nu") {
        if (!cfg.algorithm.nu) throw InvalidInput("nu does not apply to this variant");
        cfg.algorithm.nu = value;
    } else if (parameter == "alpha") {
        cfg.algorithm.schedule = renumerate(cfg.algorithm.schedule, "outer");
    } else if (parameter == "beta") {
        cfg.algorithm.inner_schedule = renumerate(cfg.algorithm.inner_schedule, "inner");
    } else if (parameter == "inner_length") {
        if (!cfg.algorithm.inner_lengths) throw InvalidInput("inner_length does not apply to this variant");
        if (!(value >= 1.0) || value != std::floor(value)) throw InvalidInput("inner_length must be a positive integer");
        cfg.algorithm.inner_lengths = InnerLengths::constant(static_cast<std::size_t>(value));
    } else {
        throw InvalidInput("unknown sweep parameter '" + parameter + "'");
    }
    cfg.label += "_" + parameter + fmt_short(value);
    if (!cfg.output.empty()) cfg.output += "_" + parameter + fmt_short(value);
    cfg.validate();
    return cfg;
}

/// One ensemble per value. A failing value is recorded, not propagated.
inline std::vector<SweepEntry> run_sweep(const ExperimentConfig& cfg, const std::string& parameter,
                                         const std::vector<double>& values) {
    std::vector<SweepEntry> out;
    for (double v : values) {
        SweepEntry e;
        e.value = v;
        try {
            e.result = run_experiment(with_parameter(cfg, parameter, v));
        } catch (const std::exception& ex) {
            e.error = ex.what();
        }
        out.push_back(std::move(e));
    }
    return out;
}

// -----------------------------------------------------------------------------
// Solve-and-report
// -----------------------------------------------------------------------------

struct SolveReport {
    Vector theta_star;
    Vector value_function;
    double approximation_gap = 0.0;
    double fixed_point_residual = 0.0;
    std::vector<std::pair<std::string, StabilityReport>> stability;
    std::optional<BoundConstants> constants;
    std::string constants_error;
};

/// beta = 2/mu and the smallest kappa meeting the step cap.
inline std::pair<double, double> default_bound_parameters(const ProjectedModel& model) {
    const double mu = min_symmetric_eigenvalue(model.gram());
    const double beta = 2.0 / mu;
    const Matrix gg = model.gram() * model.gram();
    const double lip = std::sqrt(max_symmetric_eigenvalue(gg));
    const double s = Eigen::JacobiSVD<Matrix>(model.phi()).singularValues()(0);
    const double xi3 = 3.0 * s * s * s * s / min_symmetric_eigenvalue(gg);
    const double kappa = std::ceil(beta * lip * (xi3 + 1.0) * (1.0 + 1e-12));
    return {beta, kappa};
}

inline SolveReport solve_and_report(const ExperimentConfig& cfg) {
    const Problem problem = build_problem(cfg.process, cfg.features);
    const ProjectedModel& m = problem.model;
    SolveReport rep;
    rep.theta_star = m.fixed_point();
    rep.value_function = value_function(m);
    rep.approximation_gap = approximation_gap(m);
    rep.fixed_point_residual = fixed_point_residual(m.fixed_point(), m);
    const double delta = cfg.algorithm.delta.value_or(0.9);
    const double nu = cfg.algorithm.nu.value_or(0.5);
    if (delta > 0.0) rep.stability.emplace_back("a_td delta=" + fmt_short(delta), analyse(atd_ode_system(m, delta)));
    rep.stability.emplace_back("d_td delta=" + fmt_short(delta), analyse(dtd_ode_system(m, delta)));
    rep.stability.emplace_back("d_td_random delta=" + fmt_short(delta) + " nu=" + fmt_short(nu),
                               analyse(randomized_dtd_ode_system(m, delta, nu)));
    try {
        const auto [beta, kappa] = default_bound_parameters(m);
        rep.constants = bound_constants(m, beta, kappa, m.fixed_point());
    } catch (const Error& e) {
        rep.constants_error = e.what();
    }
    return rep;
}

// -----------------------------------------------------------------------------
// Figure presets
// -----------------------------------------------------------------------------

inline ProcessSpec benchmark_process() { return ProcessSpec{}; }

inline RbfFeatureSpec two_center_features() { return RbfFeatureSpec{{0.0, 10.0}, 200.0, RbfForm::gaussian}; }
inline RbfFeatureSpec three_center_features() { return RbfFeatureSpec{{0.0, 10.0, 20.0}, 200.0, RbfForm::gaussian}; }

inline AlgorithmConfig td_config(double alpha) {
    AlgorithmConfig a;
    a.variant = Variant::standard_td;
    a.schedule = StepSizeSchedule::polynomial(alpha, 10000.0);
    return a;
}

inline AlgorithmConfig atd_config(double alpha, double delta) {
    AlgorithmConfig a = td_config(alpha);
    a.variant = Variant::a_td;
    a.delta = delta;
    return a;
}

inline AlgorithmConfig dtd_config(double alpha, double delta) {
    AlgorithmConfig a = atd_config(alpha, delta);
    a.variant = Variant::d_td;
    return a;
}

inline AlgorithmConfig dtd_random_config(double alpha, double delta, double nu) {
    AlgorithmConfig a = atd_config(alpha, delta);
    a.variant = Variant::d_td_random;
    a.nu = nu;
    return a;
}

/// beta_{k,t} = 10000 * 0.997^k / (10000 + t)
inline AlgorithmConfig ptd_adaptive_config(std::size_t length) {
    AlgorithmConfig a;
    a.variant = Variant::p_td;
    a.inner_lengths = InnerLengths::constant(length);
    a.inner_schedule = StepSizeSchedule::geometric(10000.0, 10000.0, 0.997);
    return a;
}

/// beta_t = beta / (10000 + t), t restarting every cycle
inline AlgorithmConfig ptd_fixed_config(std::size_t length, double beta) {
    AlgorithmConfig a;
    a.variant = Variant::p_td;
    a.inner_lengths = InnerLengths::constant(length);
    a.inner_schedule = StepSizeSchedule::polynomial(beta, 10000.0);
    return a;
}

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"fig1", "fig2", "fig3", "fig4", "fig5", "fig6"};
    return names;
}

/// Ensembles making up one figure. Labels double as output suffixes.
inline std::vector<ExperimentConfig> preset(const std::string& name) {
    auto make = [](std::string label, RbfFeatureSpec f, AlgorithmConfig a, std::size_t budget) {
        ExperimentConfig c;
        c.label = std::move(label);
        c.process = benchmark_process();
        c.features = std::move(f);
        c.algorithm = std::move(a);
        c.budget = budget;
        return c;
    };
    std::vector<ExperimentConfig> out;
    if (name == "fig1") {
        out.push_back(make("td", two_center_features(), td_config(1000.0), 3000));
        out.push_back(make("atd", two_center_features(), atd_config(1000.0, 0.9), 3000));
    } else if (name == "fig2") {
        out.push_back(make("td", two_center_features(), td_config(1000.0), 3000));
        out.push_back(make("dtd", two_center_features(), dtd_config(1000.0, 0.9), 3000));
    } else if (name == "fig3") {
        out.push_back(make("td", three_center_features(), td_config(10000.0), 40000));
        out.push_back(make("ptd", three_center_features(), ptd_adaptive_config(40), 40000));
    } else if (name == "fig4") {
        for (double alpha : {1000.0, 4000.0}) {
            out.push_back(make("td_alpha" + fmt_short(alpha), two_center_features(), td_config(alpha), 3000));
        }
        for (double delta : {0.1, 0.2, 0.5, 0.7, 0.9}) {
            out.push_back(make("atd_delta" + fmt_short(delta), two_center_features(), atd_config(1000.0, delta), 3000));
        }
    } else if (name == "fig5") {
        for (int alpha = 1000; alpha <= 10000; alpha += 1000) {
            out.push_back(make("td_alpha" + std::to_string(alpha), three_center_features(), td_config(alpha), 40000));
        }
        for (double beta : {4000.0, 6000.0, 8000.0}) {
            for (std::size_t l : {5, 10, 20, 40, 80, 160, 320}) {
                out.push_back(make("ptd_beta" + fmt_short(beta) + "_L" + std::to_string(l), three_center_features(),
                                   ptd_fixed_config(l, beta), 40000));
            }
        }
    } else if (name == "fig6") {
        for (std::size_t l : {10, 20, 40}) {
            for (int beta = 1000; beta <= 8000; beta += 1000) {
                out.push_back(make("ptd_L" + std::to_string(l) + "_beta" + std::to_string(beta),
                                   three_center_features(), ptd_fixed_config(l, beta), 40000));
            }
        }
    } else {
        throw InvalidInput("unknown preset '" + name + "' (expected fig1 .. fig6)");
    }
    return out;
}

} // namespace tdtarget
