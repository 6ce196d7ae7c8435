#include "crease/gp_prior.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/erf.hpp>

#include "crease/errors.hpp"

namespace crease {

namespace {

constexpr double kLogPriorMedian = 3.2188758248682006;  // log(25)
constexpr double kLogPriorWidth = 0.75;
constexpr double kSigmaRate = 10.0;
constexpr double kEllMax = 100.0;
constexpr double kRelativeJitter = 1e-8;
constexpr double kAbsoluteJitter = 1e-12;
constexpr int kJitterRetries = 3;

double clamp_unit(double u) {
    return std::clamp(u, kUnitClamp, 1.0 - kUnitClamp);
}

// Lower Cholesky factor of the unit-scale correlation matrix over indices
// 1..n, jittered by 1e-8. Scaling by sigma gives the factor of K + 1e-8 sigma^2 I.
// Cached per thread: during sampling most moves leave ell untouched.
const Eigen::MatrixXd& correlation_factor(std::size_t n, double ell) {
    struct Cache {
        std::size_t n = 0;
        double ell = -1.0;
        Eigen::MatrixXd lower;
    };
    thread_local Cache cache;
    if (cache.n == n && cache.ell == ell) return cache.lower;

    Eigen::MatrixXd r(n, n);
    const GPHyper unit{1.0, 1.0, ell};
    for (std::size_t i = 0; i < n; ++i) {
        r(i, i) = 1.0;
        for (std::size_t j = 0; j < i; ++j) {
            const double k = squared_exponential(static_cast<double>(i) - static_cast<double>(j), unit);
            r(i, j) = k;
            r(j, i) = k;
        }
    }
    cache.lower = cholesky_with_jitter(r, kRelativeJitter);
    cache.n = n;
    cache.ell = ell;
    return cache.lower;
}

}  // namespace

bool GPHyper::valid() const noexcept {
    return m > 0.0 && sigma >= 0.0 && ell > 0.0 && ell <= kEllMax && std::isfinite(m) &&
           std::isfinite(sigma);
}

std::vector<double> innings_indices(std::size_t n) {
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i + 1);
    return t;
}

double squared_exponential(double dt, const GPHyper& h) noexcept {
    return h.sigma * h.sigma * std::exp(-(dt * dt) / (2.0 * h.ell * h.ell));
}

double base_jitter(double sigma) noexcept {
    return sigma > 0.0 ? kRelativeJitter * sigma * sigma : kAbsoluteJitter;
}

Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& a, double jitter, double* applied) {
    const auto n = a.rows();
    Eigen::MatrixXd work = a;
    double j = jitter;
    for (int attempt = 0; attempt <= kJitterRetries; ++attempt) {
        work.diagonal() = a.diagonal().array() + j;
        Eigen::LLT<Eigen::MatrixXd> llt(work);
        if (llt.info() == Eigen::Success) {
            if (applied != nullptr) *applied = j;
            return llt.matrixL();
        }
        j *= 10.0;
    }
    throw FactorizationError("covariance of size " + std::to_string(n) +
                             " is not positive definite after jitter escalation to " +
                             std::to_string(j / 10.0) + "; hyperparameters are pathological");
}

CovMatrix build_covariance(std::span<const double> t_indices, const GPHyper& h) {
    const auto n = static_cast<Eigen::Index>(t_indices.size());
    for (std::size_t i = 1; i < t_indices.size(); ++i) {
        if (!(t_indices[i] > t_indices[i - 1])) {
            throw std::invalid_argument("innings indices must be strictly increasing");
        }
    }
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double v = squared_exponential(t_indices[i] - t_indices[j], h);
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    CovMatrix cov;
    cov.lower = cholesky_with_jitter(k, base_jitter(h.sigma), &cov.jitter);
    k.diagonal().array() += cov.jitter;
    cov.matrix = std::move(k);
    return cov;
}

double normal_quantile(double u) {
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * clamp_unit(u));
}

PriorDraw prior_transform(std::span<const double> u, std::size_t innings) {
    if (u.size() != prior_dimension(innings)) {
        throw DimensionError("prior vector has " + std::to_string(u.size()) + " coordinates, expected " +
                             std::to_string(prior_dimension(innings)));
    }
    PriorDraw draw;
    auto& cp = draw.career;
    cp.c = 1.0 - std::sqrt(1.0 - clamp_unit(u[0]));
    cp.d = 1.0 - std::pow(1.0 - clamp_unit(u[1]), 0.2);
    draw.hyper.m = std::exp(kLogPriorMedian + kLogPriorWidth * normal_quantile(u[2]));
    draw.hyper.sigma = -std::log1p(-clamp_unit(u[3])) / kSigmaRate;
    draw.hyper.ell = kEllMax * clamp_unit(u[4]);

    const double log_m = std::log(draw.hyper.m);
    draw.log_mu2.assign(innings, log_m);
    cp.mu2_series.resize(innings);
    if (draw.hyper.sigma > 0.0) {
        Eigen::VectorXd z(static_cast<Eigen::Index>(innings));
        for (std::size_t t = 0; t < innings; ++t) z[static_cast<Eigen::Index>(t)] = normal_quantile(u[kHyperCoordinates + t]);
        const auto& lower = correlation_factor(innings, draw.hyper.ell);
        const Eigen::VectorXd coloured = lower.triangularView<Eigen::Lower>() * z;
        for (std::size_t t = 0; t < innings; ++t) {
            draw.log_mu2[t] += draw.hyper.sigma * coloured[static_cast<Eigen::Index>(t)];
        }
    }
    for (std::size_t t = 0; t < innings; ++t) cp.mu2_series[t] = std::exp(draw.log_mu2[t]);
    return draw;
}

double gp_log_density(std::span<const double> log_mu2, const GPHyper& h, std::span<const double> t_indices) {
    if (log_mu2.size() != t_indices.size()) {
        throw DimensionError("log mu2 vector and index vector differ in length");
    }
    const auto cov = build_covariance(t_indices, h);
    const auto n = static_cast<Eigen::Index>(log_mu2.size());
    const double log_m = std::log(h.m);
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) r[i] = log_mu2[static_cast<std::size_t>(i)] - log_m;
    const Eigen::VectorXd w = cov.lower.triangularView<Eigen::Lower>().solve(r);
    const double log_det_half = cov.lower.diagonal().array().log().sum();
    return -0.5 * w.squaredNorm() - log_det_half - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

}  // namespace crease
