#pragma once

#include <cstddef>
#include <span>

#include "crease/gp_prior.hpp"
#include "crease/model.hpp"

namespace crease {

/// Likelihood of a career as a function of unit-cube coordinates; the
/// evaluator handed to the nested sampler. Safe to call from several threads.
class CareerModel {
public:
    explicit CareerModel(Career career) : career_(std::move(career)) {}

    const Career& career() const noexcept { return career_; }
    std::size_t dimension() const noexcept { return prior_dimension(career_.size()); }

    double log_likelihood(std::span<const double> u) const;
    double operator()(std::span<const double> u) const { return log_likelihood(u); }

    PriorDraw transform(std::span<const double> u) const { return prior_transform(u, career_.size()); }

private:
    Career career_;
};

}  // namespace crease
