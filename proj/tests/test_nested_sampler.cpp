#include <cmath>
#include <cstring>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include "crease/errors.hpp"
#include "crease/gp_prior.hpp"
#include "crease/nested_sampler.hpp"
#include "crease/random.hpp"

using namespace crease;
using doctest::Approx;

namespace {

double normal_log_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double quadrature(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

NSConfig small_config(std::uint64_t seed, std::size_t n = 200, std::size_t steps = 40) {
    NSConfig cfg;
    cfg.n_particles = n;
    cfg.mcmc_steps = steps;
    cfg.seed = seed;
    return cfg;
}

// log N(y; theta, s^2) per coordinate with theta = Phi^-1(u): a standard
// normal prior with Gaussian likelihood, so the evidence is N(y; 0, 1 + s^2).
struct ConjugateGaussian {
    double y = 1.0;
    double s = 0.3;
    double operator()(std::span<const double> u) const {
        double ll = 0.0;
        for (double x : u) ll += normal_log_pdf(y, normal_quantile(x), s);
        return ll;
    }
    double log_evidence(std::size_t dim) const {
        return static_cast<double>(dim) * normal_log_pdf(y, 0.0, std::sqrt(1.0 + s * s));
    }
};

}  // namespace

TEST_SUITE("sampler") {
    TEST_CASE("flat likelihood recovers log c for any seed") {
        const double log_c = -3.7;
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            const auto r = run_nested_sampling([&](std::span<const double>) { return log_c; }, 3, small_config(seed, 100, 20));
            CHECK(std::abs(r.log_z - log_c) < 1e-6);
            CHECK(r.n_iterations >= 100);
            double w = 0.0;
            for (double x : r.weights()) w += x;
            CHECK(std::abs(w - 1.0) < 1e-10);
            CHECK(r.information == Approx(0.0).epsilon(1e-9));
        }
    }

    TEST_CASE("one-dimensional narrow Gaussian against quadrature") {
        const double truth = std::log(quadrature(
            [](double u) { return std::exp(normal_log_pdf(u, 0.5, 0.01)); }, 0.0, 1.0));
        auto model = [](std::span<const double> u) { return normal_log_pdf(u[0], 0.5, 0.01); };
        const auto r = run_nested_sampling(model, 1, small_config(42, 500, 30));
        CHECK(std::abs(r.log_z - truth) < 3.0 * r.log_z_err);
        CHECK(r.log_z_err > 0.0);
    }

    TEST_CASE("five-dimensional conjugate Gaussian against the closed form") {
        const ConjugateGaussian model;
        const auto r = run_nested_sampling(model, 5, small_config(5, 500, 60));
        CHECK(std::abs(r.log_z - model.log_evidence(5)) < 3.0 * r.log_z_err);
    }

    TEST_CASE("same seed gives a bit-identical result") {
        const ConjugateGaussian model;
        const auto a = run_nested_sampling(model, 3, small_config(77, 60, 20));
        const auto b = run_nested_sampling(model, 3, small_config(77, 60, 20));
        CHECK(std::memcmp(&a.log_z, &b.log_z, sizeof(double)) == 0);
        CHECK(a.n_iterations == b.n_iterations);
        CHECK(a.samples == b.samples);
        const auto c = run_nested_sampling(model, 3, small_config(78, 60, 20));
        CHECK(c.log_z != a.log_z);
    }

    TEST_CASE("thread count does not change the result") {
        const ConjugateGaussian model;
        auto cfg = small_config(9, 50, 10);
        const auto a = run_nested_sampling(model, 2, cfg);
        cfg.threads = 4;
        const auto b = run_nested_sampling(model, 2, cfg);
        CHECK(a.samples == b.samples);
    }

    TEST_CASE("discarded likelihoods never decrease and walks stay above the threshold") {
        const ConjugateGaussian model;
        auto cfg = small_config(11, 100, 30);
        cfg.record_trace = true;
        const auto r = run_nested_sampling(model, 4, cfg);
        for (std::size_t i = 1; i < r.n_iterations; ++i) {
            CHECK(r.samples[i].log_like >= r.samples[i - 1].log_like);
        }
        REQUIRE(r.trace.size() == r.n_iterations);
        for (const auto& t : r.trace) {
            const bool above = t.new_log_like > t.threshold_log_like ||
                               (t.new_log_like == t.threshold_log_like && t.new_tiebreak > t.threshold_tiebreak);
            CHECK(above);
        }
    }

    TEST_CASE("step adaptation keeps acceptance in a useful range") {
        const ConjugateGaussian model;
        auto cfg = small_config(12, 200, 50);
        cfg.record_trace = true;
        const auto r = run_nested_sampling(model, 5, cfg);
        double mean = 0.0;
        std::size_t in_range = 0;
        for (const auto& t : r.trace) {
            mean += t.acceptance;
            if (t.acceptance >= 0.1 && t.acceptance <= 0.6) ++in_range;
        }
        mean /= static_cast<double>(r.trace.size());
        CHECK(mean >= 0.1);
        CHECK(mean <= 0.6);
        CHECK(static_cast<double>(in_range) / static_cast<double>(r.trace.size()) > 0.9);
    }

    TEST_CASE("stochastic shrinkage still estimates the evidence") {
        const ConjugateGaussian model;
        auto cfg = small_config(13, 300, 40);
        cfg.stochastic_shrinkage = true;
        const auto r = run_nested_sampling(model, 2, cfg);
        CHECK(std::abs(r.log_z - model.log_evidence(2)) < 4.0 * r.log_z_err);
    }

    TEST_CASE("a likelihood that cannot be climbed aborts with a diagnostic") {
        // Each point gets an unrelated value, so the constrained region is a
        // dust of isolated points and single-step walks stop finding it.
        auto noise = [](std::span<const double> u) {
            std::uint64_t bits = 0;
            std::memcpy(&bits, &u[0], sizeof bits);
            return static_cast<double>(mix64(bits) >> 11) * 0x1.0p-53;
        };
        auto cfg = small_config(1, 10, 1);
        CHECK_THROWS_AS(run_nested_sampling(noise, 1, cfg), SamplerError);
    }

    TEST_CASE("configuration validation") {
        NSConfig cfg;
        cfg.n_particles = 1;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
        cfg = NSConfig{};
        cfg.mcmc_steps = 0;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
        CHECK_THROWS_AS(run_nested_sampling([](std::span<const double>) { return 0.0; }, 0, NSConfig{}),
                        std::invalid_argument);
    }
}

TEST_SUITE("posterior resampling") {
    TEST_CASE("equal weights give every index once") {
        Rng rng(1);
        const std::vector<double> w(8, 0.125);
        const auto idx = systematic_resample(w, 8, rng);
        for (std::size_t i = 0; i < 8; ++i) CHECK(idx[i] == i);
        const auto half = systematic_resample(w, 4, rng);
        for (std::size_t i = 1; i < 4; ++i) CHECK(half[i] - half[i - 1] == 2);
    }

    TEST_CASE("point mass gives identical draws") {
        Rng rng(2);
        const std::vector<double> w{0.0, 0.0, 1.0, 0.0};
        for (auto i : systematic_resample(w, 50, rng)) CHECK(i == 2);
    }

    TEST_CASE("low effective sample size is rejected") {
        NSResult r;
        r.samples = {NSSample{{0.1}, 0.0, 0.0}, NSSample{{0.2}, -1.0, -800.0}};
        CHECK_THROWS_AS(posterior_resample(r, 10, 1), DegenerateWeightsError);
        CHECK(posterior_resample(r, 10, 1, 1.0).size() == 10);
    }

    TEST_CASE("posterior mean of a monomial likelihood matches quadrature") {
        auto model = [](std::span<const double> u) { return 3.0 * std::log(u[0]); };
        const auto r = run_nested_sampling(model, 1, small_config(21, 400, 30));
        const double norm = quadrature([](double u) { return u * u * u; }, 0.0, 1.0);
        const double mean = quadrature([](double u) { return u * u * u * u; }, 0.0, 1.0) / norm;
        const double second = quadrature([](double u) { return std::pow(u, 5); }, 0.0, 1.0) / norm;
        const auto draws = posterior_resample(r, 4000, 5);
        double m = 0.0;
        for (const auto& d : draws) m += d[0];
        m /= static_cast<double>(draws.size());
        const double se = std::sqrt((second - mean * mean) / r.effective_sample_size());
        CHECK(std::abs(m - mean) < 4.0 * se);
        CHECK(std::abs(r.log_z - std::log(norm)) < 3.0 * r.log_z_err);
    }

    TEST_CASE("resampling is deterministic given the seed") {
        auto model = [](std::span<const double> u) { return -10.0 * (u[0] - 0.3) * (u[0] - 0.3); };
        const auto r = run_nested_sampling(model, 1, small_config(3, 50, 10));
        CHECK(posterior_resample(r, 100, 9) == posterior_resample(r, 100, 9));
    }
}
