#include "crease/career_model.hpp"

namespace crease {

double CareerModel::log_likelihood(std::span<const double> u) const {
    return career_log_likelihood(career_, prior_transform(u, career_.size()).career);
}

}  // namespace crease
