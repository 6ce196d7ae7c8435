#pragma once

// Nested sampling over the unit cube with constrained Metropolis exploration.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "crease/gp_prior.hpp"
#include "crease/random.hpp"

namespace crease {

/// Snapshot passed to the progress callback.
struct NSProgress {
    std::size_t iteration = 0;
    double log_z = 0.0;           ///< evidence accumulated from discarded particles so far
    double worst_log_like = 0.0;  ///< likelihood of the particle just discarded
    double step_scale = 0.0;
    double acceptance = 0.0;      ///< acceptance rate of the latest replacement walk
};

struct NSConfig {
    std::size_t n_particles = 1000;
    std::size_t mcmc_steps = 1000;
    /// Stop once max live likelihood x remaining prior mass < termination_frac x accumulated evidence.
    double termination_frac = 1e-6;
    std::uint64_t seed = 0;
    /// Initial proposal width in unit-cube coordinates; adapted toward target_acceptance.
    double step_scale = 0.02;
    double target_acceptance = 0.35;
    /// Sample the shrinkage factor t ~ Beta(n, 1) instead of using log X_k = -k/n.
    bool stochastic_shrinkage = false;
    /// Replacements in a row without a single accepted move before aborting.
    std::size_t stall_limit = 10;
    /// 0 means no limit.
    std::size_t max_iterations = 0;
    /// Threads used to evaluate the initial population. Results do not depend on it.
    std::size_t threads = 1;
    /// Keep one ReplacementTrace per iteration in the result.
    bool record_trace = false;
    std::size_t progress_every = 0;
    std::function<void(const NSProgress&)> on_progress;

    /// Throws std::invalid_argument if the configuration is unusable.
    void validate() const;
};

struct NSSample {
    PriorVector u;
    double log_like = 0.0;
    double log_weight = 0.0;  ///< normalized log posterior weight

    friend bool operator==(const NSSample&, const NSSample&) = default;
};

/// What happened while replacing one discarded particle.
struct ReplacementTrace {
    double threshold_log_like = 0.0;
    double threshold_tiebreak = 0.0;
    double new_log_like = 0.0;
    double new_tiebreak = 0.0;
    double acceptance = 0.0;
};

struct NSResult {
    double log_z = 0.0;
    double log_z_err = 0.0;    ///< sqrt(information / n_particles)
    double information = 0.0;  ///< KL divergence from prior to posterior, nats
    std::size_t n_iterations = 0;
    std::size_t n_particles = 0;
    std::vector<NSSample> samples;  ///< discarded particles in order, then the final live set
    std::vector<ReplacementTrace> trace;

    std::vector<double> weights() const;
    double effective_sample_size() const;
};

using LogLikelihood = std::function<double(std::span<const double>)>;

/// Runs nested sampling for a likelihood over the open unit cube of dimension `dim`.
///
/// Particles carry a uniform tiebreak value so that likelihood plateaus still
/// have a strict ordering; the walk accepts a move only if (log L, tiebreak)
/// exceeds the discarded particle's pair lexicographically. Evidence is
/// accumulated with the trapezoid rule in log X, the first segment using the
/// first discarded likelihood at both ends, and the final live particles share
/// the remaining prior mass equally. Throws SamplerError when stall_limit
/// consecutive replacements accept nothing.
NSResult run_nested_sampling(const LogLikelihood& model, std::size_t dim, const NSConfig& cfg);

/// Systematic resampling: indices of n draws proportional to `weights`
/// (need not be normalized). Output is in ascending index order.
std::vector<std::size_t> systematic_resample(std::span<const double> weights, std::size_t n, Rng& rng);

/// n equally weighted posterior draws. The draws are shuffled after systematic
/// resampling so that their order carries no information about the run.
/// Throws DegenerateWeightsError when the effective sample size is below min_ess.
std::vector<PriorVector> posterior_resample(const NSResult& result, std::size_t n, std::uint64_t seed,
                                            double min_ess = 2.0);

}  // namespace crease
