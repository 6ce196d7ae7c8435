#include "crease/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "crease/errors.hpp"

namespace crease {

Career::Career(std::string player_id, std::vector<Innings> innings)
    : player_id_(std::move(player_id)), innings_(std::move(innings)) {
    if (innings_.empty()) {
        throw std::invalid_argument("career must contain at least one innings");
    }
    for (const auto& inn : innings_) {
        if (inn.score < 0) {
            throw std::invalid_argument("innings score must be non-negative");
        }
    }
}

std::size_t Career::not_outs() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(innings_.begin(), innings_.end(), [](const Innings& i) { return !i.dismissed; }));
}

long long Career::total_runs() const noexcept {
    long long runs = 0;
    for (const auto& inn : innings_) runs += inn.score;
    return runs;
}

std::optional<double> Career::batting_average() const noexcept {
    const auto outs = dismissals();
    if (outs == 0) return std::nullopt;
    return static_cast<double>(total_runs()) / static_cast<double>(outs);
}

AbilityParams AbilityParams::from_shape(double c, double d, double mu2) {
    return AbilityParams{c * mu2, mu2, d * mu2};
}

AbilityParams AbilityParams::constant(double mu) {
    return AbilityParams{mu, mu, 1.0};
}

bool AbilityParams::valid() const noexcept {
    return mu1 > 0.0 && mu2 > 0.0 && big_l > 0.0 && std::isfinite(mu1) && std::isfinite(mu2) &&
           std::isfinite(big_l);
}

double effective_average(int x, const AbilityParams& p) {
    return p.mu2 + (p.mu1 - p.mu2) * std::exp(-static_cast<double>(x) / p.big_l);
}

double hazard(int x, const AbilityParams& p) {
    return 1.0 / (effective_average(x, p) + 1.0);
}

namespace {

// Walks a = 0, 1, 2, ... producing mu(a) with the exponential evaluated by
// repeated multiplication. Once (mu1 - mu2) exp(-a/L) is below half an ulp of
// mu2 the effective average is exactly mu2 in floating point and the walk
// reports that the remaining terms are constant.
class EffectiveAverageWalk {
public:
    explicit EffectiveAverageWalk(const AbilityParams& p)
        : mu2_(p.mu2), delta_(p.mu1 - p.mu2), decay_(std::exp(-1.0 / p.big_l)),
          negligible_(p.mu2 * 0x1p-60) {}

    bool settled() const noexcept { return std::abs(delta_) * e_ <= negligible_; }
    double value() const noexcept { return settled() ? mu2_ : mu2_ + delta_ * e_; }
    void advance() noexcept { e_ *= decay_; }

private:
    double mu2_;
    double delta_;
    double decay_;
    double negligible_;
    double e_ = 1.0;
};

// log(1 - H) with H = 1/(mu + 1) is log(mu / (mu + 1)) = -log1p(1/mu).
inline double log_one_minus_hazard(double mu) { return -std::log1p(1.0 / mu); }
inline double log_hazard(double mu) { return -std::log1p(mu); }

// Sum of log(1 - H(a)) for a = 0..x-1; leaves the walk positioned at a = x.
double accumulate_log_survival(int x, EffectiveAverageWalk& walk, double mu2) {
    double acc = 0.0;
    int a = 0;
    for (; a < x && !walk.settled(); ++a) {
        acc += log_one_minus_hazard(walk.value());
        walk.advance();
    }
    if (a < x) {
        acc += static_cast<double>(x - a) * log_one_minus_hazard(mu2);
        // Walk is settled so its position no longer matters.
    }
    return acc;
}

}  // namespace

double log_survival(int x, const AbilityParams& p) {
    EffectiveAverageWalk walk(p);
    return accumulate_log_survival(x, walk, p.mu2);
}

double survival(int x, const AbilityParams& p) {
    return std::exp(log_survival(x, p));
}

double log_score_pmf(int x, const AbilityParams& p) {
    EffectiveAverageWalk walk(p);
    const double log_s = accumulate_log_survival(x, walk, p.mu2);
    return log_s + log_hazard(walk.value());
}

double score_pmf(int x, const AbilityParams& p) {
    return std::exp(log_score_pmf(x, p));
}

double innings_log_likelihood(const Innings& inn, const AbilityParams& p) {
    return inn.dismissed ? log_score_pmf(inn.score, p) : log_survival(inn.score, p);
}

double career_log_likelihood(const Career& career, const CareerParams& cp) {
    if (cp.mu2_series.size() != career.size()) {
        throw DimensionError("mu2 series has " + std::to_string(cp.mu2_series.size()) +
                             " entries but the career has " + std::to_string(career.size()) +
                             " innings");
    }
    double total = 0.0;
    for (std::size_t t = 0; t < career.size(); ++t) {
        total += innings_log_likelihood(career[t], cp.innings_params(t));
    }
    return total;
}

double ScoreDistribution::mean() const noexcept {
    double m = 0.0;
    for (std::size_t x = 1; x < surv.size(); ++x) m += surv[x];
    return m;
}

ScoreDistribution ScoreDistribution::build(const AbilityParams& p, const TruncationPolicy& policy) {
    ScoreDistribution dist;
    EffectiveAverageWalk walk(p);
    const double tail_factor = p.mu2 + 1.0;
    double s = 1.0;  // P(X >= x)
    dist.surv.push_back(s);
    for (int x = 0;; ++x) {
        if (x > policy.max_cap) {
            throw std::length_error("score distribution did not converge below the maximum cap");
        }
        const double mu = walk.value();
        dist.pmf.push_back(s / (mu + 1.0));
        s *= mu / (mu + 1.0);
        dist.surv.push_back(s);
        walk.advance();
        const double bound = s * tail_factor;
        if (x >= policy.min_cap && bound < policy.tail_tol) {
            dist.tail_bound = bound;
            break;
        }
    }
    return dist;
}

double expected_score(const AbilityParams& p, const TruncationPolicy& policy) {
    EffectiveAverageWalk walk(p);
    const double tail_factor = p.mu2 + 1.0;
    double s = 1.0;
    double sum = 0.0;
    for (int x = 0;; ++x) {
        if (x > policy.max_cap) {
            throw std::length_error("expected score did not converge below the maximum cap");
        }
        const double mu = walk.value();
        s *= mu / (mu + 1.0);  // now P(X >= x + 1)
        sum += s;
        walk.advance();
        if (x >= policy.min_cap && s * tail_factor < policy.tail_tol) break;
    }
    return sum;
}

}  // namespace crease
