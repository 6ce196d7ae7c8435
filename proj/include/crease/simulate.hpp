#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "crease/gp_prior.hpp"
#include "crease/model.hpp"
#include "crease/random.hpp"

namespace crease {

/// Generative settings for a synthetic career. c == 1 gives constant
/// within-innings ability (geometric scores with mean mu2_t).
struct SimulationSpec {
    double c = 0.4;
    double d = 0.1;
    GPHyper hyper{30.0, 0.2, 20.0};
    std::size_t innings = 100;
    /// Fraction of innings ended not out; the reported score is floor(V X) with V ~ U(0, 1).
    double not_out_rate = 0.0;

    /// Throws std::invalid_argument describing the first bad field.
    void validate() const;
};

/// A synthetic career together with the truth that generated it.
struct SimulatedCareer {
    Career career;
    std::vector<double> mu2_series;
    std::vector<double> true_nu;  ///< nu(t) of the generating parameters
};

/// Draws one score by inverting the survival function with a single uniform.
int sample_score(const AbilityParams& p, Rng& rng);

/// GP path for log mu2, then one score per innings, then random censoring.
SimulatedCareer simulate_career(const SimulationSpec& spec, std::uint64_t seed, std::string player_id = "simulated");

/// Draws (c, d, m, sigma, ell) from the model prior.
SimulationSpec spec_from_prior(std::size_t innings, double not_out_rate, std::uint64_t seed);

}  // namespace crease
