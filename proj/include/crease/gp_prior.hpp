#pragma once

// Gaussian-process prior over per-innings log ability, and the map from
// unit-cube coordinates to model parameters.
//
// Unit-cube layout: [C, D, m, sigma, ell, z_1 .. z_I]. The z_t are whitened
// GP coordinates, z_t = Phi^-1(u_{5+t}), coloured by the Cholesky factor of
// the squared-exponential covariance over innings indices 1..I.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "crease/model.hpp"

namespace crease {

/// GP hyperparameters: mean ability m (runs), kernel scale sigma (log-runs), length scale ell (innings).
struct GPHyper {
    double m = 25.0;
    double sigma = 0.1;
    double ell = 10.0;

    bool valid() const noexcept;
};

/// Squared-exponential covariance plus diagonal jitter, with its lower Cholesky factor.
struct CovMatrix {
    Eigen::MatrixXd matrix;  ///< kernel + jitter * I
    Eigen::MatrixXd lower;   ///< lower-triangular factor of `matrix`
    double jitter = 0.0;     ///< jitter actually applied (after any escalation)

    std::size_t size() const noexcept { return static_cast<std::size_t>(matrix.rows()); }
};

/// Unit-cube coordinates handed to the sampler.
using PriorVector = std::vector<double>;

inline constexpr std::size_t kHyperCoordinates = 5;
inline constexpr double kUnitClamp = 1e-12;

constexpr std::size_t prior_dimension(std::size_t innings) noexcept {
    return kHyperCoordinates + innings;
}

/// 1, 2, ..., n as reals.
std::vector<double> innings_indices(std::size_t n);

/// sigma^2 exp(-(dt)^2 / (2 ell^2)).
double squared_exponential(double dt, const GPHyper& h) noexcept;

/// Base jitter for a kernel of scale sigma: 1e-8 sigma^2, or 1e-12 when sigma == 0.
double base_jitter(double sigma) noexcept;

/// Lower Cholesky factor of a + jitter * I. The jitter is multiplied by ten on
/// failure, up to three retries; after that FactorizationError is thrown.
/// The jitter that succeeded is written to `applied` if non-null.
Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& a, double jitter, double* applied = nullptr);

/// Kernel matrix over strictly increasing innings indices.
CovMatrix build_covariance(std::span<const double> t_indices, const GPHyper& h);

/// Materialized parameters for one unit-cube point.
struct PriorDraw {
    CareerParams career;
    GPHyper hyper;
    std::vector<double> log_mu2;
};

/// Maps a unit-cube point of length 5 + innings to model parameters.
///
///   C     = 1 - sqrt(1 - u1)                Beta(1, 2)
///   D     = 1 - (1 - u2)^(1/5)              Beta(1, 5)
///   m     = exp(log 25 + 0.75 Phi^-1(u3))   Lognormal(log 25, 0.75^2)
///   sigma = -log(1 - u4) / 10               Exponential, rate 10
///   ell   = 100 u5                          Uniform(0, 100)
///   log mu2 = log m + chol(K) z,  z_t = Phi^-1(u_{5+t})
///
/// Coordinates are clamped to [1e-12, 1 - 1e-12] before any quantile is taken.
/// Throws DimensionError on a length mismatch.
PriorDraw prior_transform(std::span<const double> u, std::size_t innings);

/// Multivariate normal log-density of log mu2 under mean log(m) and covariance K (with jitter).
double gp_log_density(std::span<const double> log_mu2, const GPHyper& h, std::span<const double> t_indices);

/// Standard normal quantile with the unit-cube clamp applied.
double normal_quantile(double u);

}  // namespace crease
