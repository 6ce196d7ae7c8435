#include "crease/simulate.hpp"

#include <cmath>
#include <stdexcept>

#include "crease/predictive.hpp"

namespace crease {

void SimulationSpec::validate() const {
    if (!(c > 0.0 && c <= 1.0)) throw std::invalid_argument("c must lie in (0, 1]");
    if (!(d > 0.0)) throw std::invalid_argument("d must be positive");
    if (!(hyper.m > 0.0 && std::isfinite(hyper.m))) throw std::invalid_argument("m must be positive");
    if (!(hyper.sigma >= 0.0 && std::isfinite(hyper.sigma))) throw std::invalid_argument("sigma must be non-negative");
    if (!(hyper.ell > 0.0 && std::isfinite(hyper.ell))) throw std::invalid_argument("ell must be positive");
    if (innings < 1) throw std::invalid_argument("innings must be at least 1");
    if (!(not_out_rate >= 0.0 && not_out_rate <= 1.0)) throw std::invalid_argument("not-out rate must lie in [0, 1]");
}

int sample_score(const AbilityParams& p, Rng& rng) {
    // X >= x exactly when P(X >= x) >= U.
    const double u = rng.uniform_open();
    double s = 1.0;
    for (int x = 0;; ++x) {
        const double mu = effective_average(x, p);
        s *= mu / (mu + 1.0);
        if (s < u) return x;
    }
}

SimulatedCareer simulate_career(const SimulationSpec& spec, std::uint64_t seed, std::string player_id) {
    spec.validate();
    Rng rng(seed);
    const std::size_t n = spec.innings;

    std::vector<double> log_mu2(n, std::log(spec.hyper.m));
    if (spec.hyper.sigma > 0.0) {
        const auto t = innings_indices(n);
        const auto cov = build_covariance(t, spec.hyper);
        Eigen::VectorXd z(static_cast<Eigen::Index>(n));
        for (auto& v : z) v = rng.normal();
        const Eigen::VectorXd path = cov.lower.triangularView<Eigen::Lower>() * z;
        for (std::size_t i = 0; i < n; ++i) log_mu2[i] += path[static_cast<Eigen::Index>(i)];
    }

    SimulatedCareer sim{Career(player_id, {Innings{}}), {}, {}};
    std::vector<Innings> innings(n);
    sim.mu2_series.resize(n);
    sim.true_nu.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double mu2 = std::exp(log_mu2[i]);
        const auto p = AbilityParams::from_shape(spec.c, spec.d, mu2);
        sim.mu2_series[i] = mu2;
        sim.true_nu[i] = nu_of_params(p);
        innings[i].score = sample_score(p, rng);
    }
    for (auto& inn : innings) {
        if (spec.not_out_rate > 0.0 && rng.uniform() < spec.not_out_rate) {
            inn.dismissed = false;
            inn.score = static_cast<int>(std::floor(rng.uniform() * inn.score));
        }
    }
    sim.career = Career(std::move(player_id), std::move(innings));
    return sim;
}

SimulationSpec spec_from_prior(std::size_t innings, double not_out_rate, std::uint64_t seed) {
    Rng rng(substream_seed(seed, 0x7072696f72ULL));
    PriorVector u(prior_dimension(1));
    for (auto& x : u) x = rng.uniform_open();
    const auto draw = prior_transform(u, 1);
    SimulationSpec spec;
    spec.c = draw.career.c;
    spec.d = draw.career.d;
    spec.hyper = draw.hyper;
    spec.innings = innings;
    spec.not_out_rate = not_out_rate;
    return spec;
}

}  // namespace crease
