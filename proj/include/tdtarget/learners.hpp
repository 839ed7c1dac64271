#pragma once

// Target-based TD learners with linear features: standard TD, averaging TD,
// double TD (parallel and randomized) and periodic TD (stochastic and
// deterministic inner loops).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tdtarget/bellman.hpp"
#include "tdtarget/errors.hpp"
#include "tdtarget/sampling.hpp"
#include "tdtarget/schedule.hpp"

namespace tdtarget {

inline constexpr double kDivergenceNorm = 1e8;

enum class Variant { standard_td, a_td, d_td, d_td_random, p_td, p_td_deterministic };

inline std::string_view to_string(Variant v) {
    switch (v) {
    case Variant::standard_td: return "standard_td";
    case Variant::a_td: return "a_td";
    case Variant::d_td: return "d_td";
    case Variant::d_td_random: return "d_td_random";
    case Variant::p_td: return "p_td";
    case Variant::p_td_deterministic: return "p_td_deterministic";
    }
    return "unknown";
}

inline Variant parse_variant(std::string_view name) {
    for (Variant v : {Variant::standard_td, Variant::a_td, Variant::d_td, Variant::d_td_random, Variant::p_td,
                      Variant::p_td_deterministic}) {
        if (to_string(v) == name) {
            return v;
        }
    }
    throw InvalidInput("unknown algorithm variant '" + std::string(name) + "'");
}

inline bool is_periodic(Variant v) { return v == Variant::p_td || v == Variant::p_td_deterministic; }
inline bool uses_delta(Variant v) { return v == Variant::a_td || v == Variant::d_td || v == Variant::d_td_random; }

/// Inner-loop lengths L_k. With an explicit list, the last entry repeats.
struct InnerLengths {
    std::vector<std::size_t> lengths;

    static InnerLengths constant(std::size_t length) { return InnerLengths{{length}}; }

    std::size_t at(std::size_t k) const {
        if (lengths.empty()) {
            throw InvalidInput("inner length schedule is empty");
        }
        return lengths[std::min(k, lengths.size() - 1)];
    }
};

/// Which index the inner step-size sees: t restarts every cycle, or counts
/// every inner step taken so far.
enum class InnerIndex { per_cycle, global };

struct AlgorithmConfig {
    Variant variant = Variant::standard_td;
    std::optional<StepSizeSchedule> schedule;        ///< alpha_k, non-periodic variants
    std::optional<double> delta;                     ///< a_td, d_td, d_td_random
    std::optional<double> nu;                        ///< d_td_random
    std::optional<InnerLengths> inner_lengths;       ///< periodic variants
    std::optional<StepSizeSchedule> inner_schedule;  ///< beta_{k,t}, periodic variants
    InnerIndex inner_index = InnerIndex::per_cycle;
    bool shared_samples = false;                     ///< d_td only

    void validate() const {
        const bool periodic = is_periodic(variant);
        if (periodic == schedule.has_value()) {
            throw InvalidInput(periodic ? "periodic variants take inner_schedule, not schedule"
                                        : "a step-size schedule is required");
        }
        if (periodic != inner_lengths.has_value() || periodic != inner_schedule.has_value()) {
            throw InvalidInput("inner_lengths and inner_schedule are required exactly for periodic variants");
        }
        if (periodic) {
            for (std::size_t l : inner_lengths->lengths) {
                if (l < 1) {
                    throw InvalidInput("inner lengths must be positive");
                }
            }
            if (inner_lengths->lengths.empty()) {
                throw InvalidInput("inner length schedule is empty");
            }
        }
        if (uses_delta(variant) != delta.has_value()) {
            throw InvalidInput("delta is required exactly for a_td, d_td and d_td_random");
        }
        if (delta) {
            if (variant == Variant::a_td ? !(*delta > 0.0) : !(*delta >= 0.0)) {
                throw InvalidInput(variant == Variant::a_td ? "a_td needs delta > 0" : "delta must be >= 0");
            }
        }
        if ((variant == Variant::d_td_random) != nu.has_value()) {
            throw InvalidInput("nu is required exactly for d_td_random");
        }
        if (nu && !(*nu > 0.0 && *nu < 1.0)) {
            throw InvalidInput("nu must lie in (0, 1)");
        }
        if (shared_samples && variant != Variant::d_td) {
            throw InvalidInput("shared_samples applies to d_td only");
        }
    }

    std::string describe() const {
        std::ostringstream os;
        os << "variant=" << to_string(variant);
        if (schedule) os << " schedule=" << schedule->describe();
        if (delta) os << " delta=" << *delta;
        if (nu) os << " nu=" << *nu;
        if (inner_lengths) {
            os << " L=";
            for (std::size_t i = 0; i < inner_lengths->lengths.size(); ++i) {
                os << (i ? ":" : "") << inner_lengths->lengths[i];
            }
        }
        if (inner_schedule) os << " inner_schedule=" << inner_schedule->describe();
        if (is_periodic(variant)) os << " inner_index=" << (inner_index == InnerIndex::global ? "global" : "per_cycle");
        if (variant == Variant::d_td) os << " shared_samples=" << (shared_samples ? "true" : "false");
        return os.str();
    }
};

/// Online variable, target variable and counters.
struct LearnerState {
    Vector theta;
    Vector target;
    long long k = 0;
    long long inner_t = 0;
};

inline void check_bounded(const LearnerState& s) {
    const bool bad = !s.theta.allFinite() || !s.target.allFinite() || s.theta.norm() > kDivergenceNorm ||
                     s.target.norm() > kDivergenceNorm;
    if (bad) {
        std::ostringstream os;
        os << "iterate diverged at k=" << s.k << " (|theta|=" << s.theta.norm() << ", |target|=" << s.target.norm()
           << ")";
        throw DivergenceError(os.str(), s.k);
    }
}

// -----------------------------------------------------------------------------
// Single steps
// -----------------------------------------------------------------------------

inline LearnerState std_td_step(const LearnerState& state, const Sample& sample, double alpha,
                                const ProjectedModel& model) {
    LearnerState next;
    next.theta = state.theta - alpha * td_semi_gradient(model.phi(), model.gamma(), sample, state.theta, state.target);
    next.target = next.theta;
    next.k = state.k + 1;
    return next;
}

inline LearnerState atd_step(const LearnerState& state, const Sample& sample, double alpha, double delta,
                             const ProjectedModel& model) {
    LearnerState next;
    next.theta = state.theta - alpha * td_semi_gradient(model.phi(), model.gamma(), sample, state.theta, state.target);
    next.target = state.target + alpha * delta * (state.theta - state.target);
    next.k = state.k + 1;
    return next;
}

/// Online-variable direction of double TD; the target direction is the same
/// call with the roles of theta and target swapped.
inline Vector dtd_direction(const ProjectedModel& model, const Sample& sample, const Vector& own, const Vector& other,
                            double delta) {
    return td_semi_gradient(model.phi(), model.gamma(), sample, own, other) - delta * (other - own);
}

inline LearnerState dtd_step(const LearnerState& state, const Sample& sample_a, const Sample& sample_b, double alpha,
                             double delta, const ProjectedModel& model) {
    LearnerState next;
    next.theta = state.theta - alpha * dtd_direction(model, sample_a, state.theta, state.target, delta);
    next.target = state.target - alpha * dtd_direction(model, sample_b, state.target, state.theta, delta);
    next.k = state.k + 1;
    return next;
}

/// `update_online` is the outcome of the Bernoulli(nu) coin.
inline LearnerState dtd_random_step(const LearnerState& state, const Sample& sample, double alpha, double delta,
                                    bool update_online, const ProjectedModel& model) {
    LearnerState next = state;
    if (update_online) {
        next.theta = state.theta - alpha * dtd_direction(model, sample, state.theta, state.target, delta);
    } else {
        next.target = state.target - alpha * dtd_direction(model, sample, state.target, state.theta, delta);
    }
    next.k = state.k + 1;
    return next;
}

inline Vector ptd_inner_step(const Vector& theta, const Vector& target, const Sample& sample, double beta,
                             const ProjectedModel& model) {
    return theta - beta * td_semi_gradient(model.phi(), model.gamma(), sample, theta, target);
}

inline double inner_step_size(const AlgorithmConfig& cfg, long long k, long long t, long long global_t) {
    return cfg.inner_schedule->value(k, cfg.inner_index == InnerIndex::global ? global_t : t);
}

/// L stochastic gradient steps on l(. ; target) starting from theta_init.
/// `outer_k` and `global_offset` only feed the step-size index.
inline Vector ptd_sgd_subroutine(const Vector& theta_init, const Vector& target, std::size_t length,
                                 const StepSizeSchedule& beta, const ProjectedModel& model,
                                 const SamplingOracle& oracle, SampleStream& stream, long long outer_k = 0,
                                 InnerIndex index = InnerIndex::per_cycle, long long global_offset = 0) {
    Vector theta = theta_init;
    for (std::size_t t = 0; t < length; ++t) {
        const auto tt = static_cast<long long>(t);
        const double step = beta.value(outer_k, index == InnerIndex::global ? global_offset + tt : tt);
        theta = ptd_inner_step(theta, target, oracle.draw(stream), step, model);
        if (!theta.allFinite() || theta.norm() > kDivergenceNorm) {
            std::ostringstream os;
            os << "SGD subroutine diverged at inner step " << t << " (|theta|=" << theta.norm() << ")";
            throw DivergenceError(os.str(), outer_k);
        }
    }
    return theta;
}

// -----------------------------------------------------------------------------
// Expected (mean-field) increments
// -----------------------------------------------------------------------------

/// Increment of (theta, target) after one update with every random quantity
/// replaced by its mean. For periodic variants this is one inner step.
inline std::pair<Vector, Vector> expected_increment(const AlgorithmConfig& cfg, const ProjectedModel& model,
                                                    const Vector& theta, const Vector& target, double step) {
    const Vector zero = Vector::Zero(theta.size());
    switch (cfg.variant) {
    case Variant::standard_td: {
        const Vector dtheta = -step * modified_loss_gradient(theta, target, model);
        return {dtheta, theta + dtheta - target};
    }
    case Variant::a_td:
        return {-step * modified_loss_gradient(theta, target, model), step * *cfg.delta * (theta - target)};
    case Variant::d_td:
    case Variant::d_td_random: {
        const double delta = *cfg.delta;
        Vector dtheta = -step * (modified_loss_gradient(theta, target, model) - delta * (target - theta));
        Vector dtarget = -step * (modified_loss_gradient(target, theta, model) - delta * (theta - target));
        if (cfg.variant == Variant::d_td_random) {
            dtheta *= *cfg.nu;
            dtarget *= 1.0 - *cfg.nu;
        }
        return {std::move(dtheta), std::move(dtarget)};
    }
    case Variant::p_td:
    case Variant::p_td_deterministic:
        return {-step * modified_loss_gradient(theta, target, model), zero};
    }
    return {zero, zero};
}

// -----------------------------------------------------------------------------
// Run driver
// -----------------------------------------------------------------------------

/// Completed P-TD cycle: theta_{k+1} and ||theta_{k+1} - argmin l(. ; theta'_k)||^2.
struct OuterRecord {
    long long k = 0;
    std::size_t samples = 0;
    Vector theta;
    double subproblem_gap_sq = 0.0;
};

struct RunOutcome {
    LearnerState final_state;
    std::size_t samples = 0;
    bool diverged = false;
    std::string message;
    std::vector<OuterRecord> outer;
};

/// theta_0 ~ U[-1,1]^n then a second U[-1,1]^n draw; variants that start
/// with target = theta ignore the second draw, so every variant consumes the
/// same prefix of the stream.
inline LearnerState initial_state(const AlgorithmConfig& cfg, SampleStream& stream, std::size_t n,
                                  bool zero_init = false) {
    const auto dim = static_cast<Eigen::Index>(n);
    LearnerState s;
    s.theta = Vector::Zero(dim);
    s.target = Vector::Zero(dim);
    if (zero_init) {
        return s;
    }
    for (Eigen::Index i = 0; i < dim; ++i) s.theta(i) = stream.uniform(-1.0, 1.0);
    for (Eigen::Index i = 0; i < dim; ++i) s.target(i) = stream.uniform(-1.0, 1.0);
    if (cfg.variant == Variant::standard_td || is_periodic(cfg.variant)) {
        s.target = s.theta;
    }
    return s;
}

/// SO calls one update consumes.
inline std::size_t samples_per_update(const AlgorithmConfig& cfg) {
    return cfg.variant == Variant::d_td && !cfg.shared_samples ? 2 : 1;
}

/// Runs `cfg` until `budget` SO calls (gradient evaluations for the
/// deterministic periodic variant) are used. `observer(state, samples)` is
/// called after every update that completed within the budget. Divergence
/// stops the run and is reported in the outcome, not thrown.
template <class Observer>
RunOutcome run_learner(const AlgorithmConfig& cfg, const ProjectedModel& model, const SamplingOracle& oracle,
                       SampleStream& stream, std::size_t budget, LearnerState init, Observer&& observer) {
    cfg.validate();
    RunOutcome out;
    LearnerState state = std::move(init);
    std::size_t used = 0;
    try {
        check_bounded(state);
        if (!is_periodic(cfg.variant)) {
            const std::size_t cost = samples_per_update(cfg);
            while (used + cost <= budget) {
                const double alpha = cfg.schedule->value(state.k);
                const Sample sample = oracle.draw(stream);
                switch (cfg.variant) {
                case Variant::standard_td:
                    state = std_td_step(state, sample, alpha, model);
                    break;
                case Variant::a_td:
                    state = atd_step(state, sample, alpha, *cfg.delta, model);
                    break;
                case Variant::d_td:
                    state = cfg.shared_samples ? dtd_step(state, sample, sample, alpha, *cfg.delta, model)
                                               : dtd_step(state, sample, oracle.draw(stream), alpha, *cfg.delta, model);
                    break;
                case Variant::d_td_random: {
                    const bool online = stream.bernoulli(*cfg.nu);
                    state = dtd_random_step(state, sample, alpha, *cfg.delta, online, model);
                    break;
                }
                default:
                    break;
                }
                used += cost;
                check_bounded(state);
                observer(static_cast<const LearnerState&>(state), used);
            }
        } else {
            const bool deterministic = cfg.variant == Variant::p_td_deterministic;
            long long global_t = 0;
            state.inner_t = 0;
            while (used < budget) {
                const std::size_t length = cfg.inner_lengths->at(static_cast<std::size_t>(state.k));
                const Vector subproblem_opt = projected_bellman_apply(state.target, model);
                for (std::size_t t = 0; t < length && used < budget; ++t) {
                    const double beta = inner_step_size(cfg, state.k, static_cast<long long>(t), global_t);
                    if (deterministic) {
                        state.theta = state.theta - beta * modified_loss_gradient(state.theta, state.target, model);
                    } else {
                        state.theta = ptd_inner_step(state.theta, state.target, oracle.draw(stream), beta, model);
                    }
                    ++used;
                    ++global_t;
                    state.inner_t = static_cast<long long>(t) + 1;
                    check_bounded(state);
                    if (state.inner_t == static_cast<long long>(length)) {
                        out.outer.push_back(
                            OuterRecord{state.k, used, state.theta, (state.theta - subproblem_opt).squaredNorm()});
                        state.target = state.theta;
                        state.k += 1;
                        state.inner_t = 0;
                    }
                    observer(static_cast<const LearnerState&>(state), used);
                }
            }
        }
    } catch (const DivergenceError& e) {
        out.diverged = true;
        out.message = e.what();
    }
    out.final_state = std::move(state);
    out.samples = used;
    return out;
}

inline RunOutcome run_learner(const AlgorithmConfig& cfg, const ProjectedModel& model, const SamplingOracle& oracle,
                              SampleStream& stream, std::size_t budget, LearnerState init) {
    return run_learner(cfg, model, oracle, stream, budget, std::move(init), [](const LearnerState&, std::size_t) {});
}

// -----------------------------------------------------------------------------
// Periodic TD entry points
// -----------------------------------------------------------------------------

/// Stochastic periodic TD for `num_outer` complete cycles from theta_0 (target = theta_0).
inline RunOutcome ptd_run(const Vector& theta0, const AlgorithmConfig& cfg, const ProjectedModel& model,
                          const SamplingOracle& oracle, SampleStream& stream, std::size_t num_outer) {
    if (cfg.variant != Variant::p_td) {
        throw InvalidInput("ptd_run expects the p_td variant");
    }
    cfg.validate();
    std::size_t budget = 0;
    for (std::size_t k = 0; k < num_outer; ++k) budget += cfg.inner_lengths->at(k);
    RunOutcome out = run_learner(cfg, model, oracle, stream, budget, LearnerState{theta0, theta0, 0, 0});
    if (out.diverged) {
        throw DivergenceError(out.message, out.final_state.k);
    }
    return out;
}

/// Deterministic periodic TD: L_k exact gradient steps per cycle. Returns
/// theta_0 .. theta_T (one entry per completed cycle).
inline std::vector<Vector> ptd_deterministic_run(const Vector& theta0, std::size_t num_outer,
                                                 const InnerLengths& lengths, const StepSizeSchedule& beta,
                                                 const ProjectedModel& model,
                                                 InnerIndex index = InnerIndex::per_cycle) {
    std::vector<Vector> iterates{theta0};
    Vector theta = theta0;
    long long global_t = 0;
    for (std::size_t k = 0; k < num_outer; ++k) {
        const Vector target = theta;
        const std::size_t length = lengths.at(k);
        for (std::size_t t = 0; t < length; ++t, ++global_t) {
            const double step =
                beta.value(static_cast<long long>(k), index == InnerIndex::global ? global_t : static_cast<long long>(t));
            theta -= step * modified_loss_gradient(theta, target, model);
            if (!theta.allFinite() || theta.norm() > kDivergenceNorm) {
                throw DivergenceError("deterministic periodic TD diverged; reduce the inner step size",
                                      static_cast<long long>(k));
            }
        }
        iterates.push_back(theta);
    }
    return iterates;
}

/// Periodic TD with every subproblem solved exactly (the L -> infinity limit).
inline std::vector<Vector> ptd_exact_run(const Vector& theta0, std::size_t num_outer, const ProjectedModel& model) {
    std::vector<Vector> iterates{theta0};
    for (std::size_t k = 0; k < num_outer; ++k) {
        iterates.push_back(projected_bellman_apply(iterates.back(), model));
    }
    return iterates;
}

// -----------------------------------------------------------------------------
// Traces
// -----------------------------------------------------------------------------

struct TraceRow {
    long long k = 0;
    std::size_t samples = 0;
    double err_l2 = 0.0;
    double err_dnorm = 0.0;
    Vector theta;
    Vector target;
};

struct Trace {
    std::vector<TraceRow> rows;
    bool diverged = false;
    std::string message;
    std::vector<OuterRecord> outer;
};

inline constexpr std::size_t kMaxTraceRows = 50'000;

/// Record every SO call up to 5e4, else every ceil(budget / 5e4) calls.
inline std::size_t checkpoint_cadence(std::size_t budget) {
    return budget <= kMaxTraceRows ? 1 : (budget + kMaxTraceRows - 1) / kMaxTraceRows;
}

inline TraceRow make_row(const LearnerState& s, std::size_t samples, const ProjectedModel& model) {
    return TraceRow{s.k, samples, (s.theta - model.fixed_point()).norm(), model.weighted_error(s.theta), s.theta,
                    s.target};
}

/// Runs the learner and keeps the initial row plus one row per checkpoint.
inline Trace record_run(const AlgorithmConfig& cfg, const ProjectedModel& model, const SamplingOracle& oracle,
                        SampleStream& stream, std::size_t budget, LearnerState init) {
    Trace trace;
    const std::size_t cadence = checkpoint_cadence(budget);
    std::size_t next = cadence;
    trace.rows.push_back(make_row(init, 0, model));
    RunOutcome out = run_learner(cfg, model, oracle, stream, budget, std::move(init),
                                 [&](const LearnerState& s, std::size_t used) {
                                     if (used >= next) {
                                         trace.rows.push_back(make_row(s, used, model));
                                         next = (used / cadence + 1) * cadence;
                                     }
                                 });
    trace.diverged = out.diverged;
    trace.message = std::move(out.message);
    trace.outer = std::move(out.outer);
    return trace;
}

} // namespace tdtarget
