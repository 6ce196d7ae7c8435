#pragma once

// Posterior summaries: nu(t) trajectories, forecasts and head-to-head comparisons.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "crease/gp_prior.hpp"
#include "crease/model.hpp"

namespace crease {

/// Expected score of a completed innings, E[X], for one set of hazard parameters.
double nu_of_params(const AbilityParams& p);

/// Pointwise posterior summary of nu over a range of innings indices.
struct NuCurve {
    std::vector<double> t_values;
    std::vector<double> median;
    std::vector<double> band_low;
    std::vector<double> band_high;
    double level = 0.68;
    /// Optional retained per-draw curves: posterior_draws[k][i] is draw k at t_values[i].
    std::vector<std::vector<double>> posterior_draws;

    std::size_t size() const noexcept { return t_values.size(); }
};

struct PredictiveOptions {
    double level = 0.68;        ///< central credible mass of the band
    std::size_t keep_draws = 0; ///< how many per-draw curves to retain
    std::size_t threads = 1;
};

/// Type-7 (linear interpolation) sample quantile; `values` is sorted in place.
double sample_quantile(std::vector<double>& values, double prob);

/// Median and central band of per-draw values for each column.
/// draws[k][i] is draw k at index i.
NuCurve summarize_draws(std::vector<double> t_values, const std::vector<std::vector<double>>& draws,
                        const PredictiveOptions& opts);

/// nu(t) for t = 1..I from equally weighted posterior draws of the unit-cube vector.
NuCurve nu_curve(const Career& career, std::span<const PriorVector> draws, const PredictiveOptions& opts = {});

/// Conditional distribution of a GP at new indices given noiseless values at observed indices.
struct GpConditional {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

GpConditional gp_conditional(std::span<const double> log_mu2_obs, const GPHyper& h, std::span<const double> t_obs,
                             std::span<const double> t_new);

struct Forecast {
    std::size_t horizon = 0;
    NuCurve nu_pred;               ///< indices I+1 .. I+horizon
    double next_innings_nu = 0.0;  ///< posterior mean of nu(I+1)
    /// Per-draw hazard parameters for innings I+1, in draw order.
    std::vector<AbilityParams> next_params;
};

/// Forecasts nu for the next `horizon` innings. Each draw gets one GP
/// conditional realization from random substream (seed, draw index), so the
/// result does not depend on the thread count.
Forecast extrapolate(const Career& career, std::span<const PriorVector> draws, std::size_t horizon,
                     std::uint64_t seed, const PredictiveOptions& opts = {});

struct Comparison {
    double expected_margin = 0.0;  ///< E[X_A - X_B], runs
    double p_outscore = 0.0;       ///< P(X_A > X_B)
    double p_tie = 0.0;            ///< P(X_A == X_B)
    double p_outscored = 0.0;      ///< P(X_B > X_A)
    std::size_t pairs = 0;
};

/// Exact (truncated-sum) comparison of one next-innings score distribution against another.
Comparison compare_pair(const AbilityParams& a, const AbilityParams& b);

struct CompareOptions {
    /// Every (A draw, B draw) pair is used when their count is at most this;
    /// otherwise this many pairs are drawn independently per player.
    std::size_t max_pairs = 250'000;
    std::size_t threads = 1;
};

/// Next-innings comparison of player A against player B, averaging compare_pair
/// over posterior draw pairs.
Comparison compare(const Forecast& a, const Forecast& b, std::uint64_t seed, const CompareOptions& opts = {});

}  // namespace crease
