#include "crease/nested_sampler.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "crease/errors.hpp"

namespace crease {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

double log_sum_exp(std::span<const double> xs) {
    double hi = kNegInf;
    for (double x : xs) hi = std::max(hi, x);
    if (hi == kNegInf) return kNegInf;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - hi);
    return hi + std::log(s);
}

// log(X_prev - X_next) for log X_next < log X_prev.
double log_width(double log_x_prev, double log_x_next) {
    return log_x_prev + std::log(-std::expm1(log_x_next - log_x_prev));
}

// Folds x back into [0, 1] by reflection at the faces.
double reflect_unit(double x) {
    x -= 2.0 * std::floor(x / 2.0);
    return x > 1.0 ? 2.0 - x : x;
}

struct Particle {
    PriorVector u;
    double tiebreak = 0.5;
    double log_like = 0.0;
};

bool ranks_above(double log_like, double tiebreak, double threshold_ll, double threshold_tb) {
    return log_like > threshold_ll || (log_like == threshold_ll && tiebreak > threshold_tb);
}

void evaluate_population(const LogLikelihood& model, std::vector<Particle>& live, std::size_t threads) {
    const std::size_t n = live.size();
    threads = std::clamp<std::size_t>(threads, 1, n);
    if (threads == 1) {
        for (auto& p : live) p.log_like = model(p.u);
        return;
    }
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += threads) live[i].log_like = model(live[i].u);
        });
    }
    for (auto& th : pool) th.join();
}

class ConstrainedWalker {
public:
    ConstrainedWalker(const LogLikelihood& model, std::size_t dim, const NSConfig& cfg, Rng& rng)
        : model_(model), dim_(dim), cfg_(cfg), rng_(rng), log_step_(std::log(cfg.step_scale)),
          coord_prob_(std::min(1.0, 10.0 / static_cast<double>(dim + 1))),
          gain_(std::clamp(1.0 / std::sqrt(static_cast<double>(cfg.mcmc_steps)), 0.01, 0.5)) {}

    double step_scale() const { return std::exp(log_step_); }

    // Evolves `p` in place; returns the fraction of accepted moves.
    double evolve(Particle& p, double threshold_ll, double threshold_tb) {
        std::size_t accepted = 0;
        PriorVector proposal(dim_);
        for (std::size_t s = 0; s < cfg_.mcmc_steps; ++s) {
            proposal = p.u;
            double tb = p.tiebreak;
            const double step = std::exp(log_step_);
            bool moved = false;
            bool in_bounds = true;
            auto perturb = [&](std::size_t i) {
                double& x = (i == dim_) ? tb : proposal[i];
                x = reflect_unit(x + step * rng_.normal());
                if (x <= 0.0 || x >= 1.0) in_bounds = false;
                moved = true;
            };
            for (std::size_t i = 0; i <= dim_; ++i) {
                if (rng_.uniform() < coord_prob_) perturb(i);
            }
            if (!moved) perturb(static_cast<std::size_t>(rng_.index(dim_ + 1)));

            bool accept = false;
            if (in_bounds) {
                const double ll = model_(proposal);
                if (ranks_above(ll, tb, threshold_ll, threshold_tb)) {
                    assert(ll >= threshold_ll);
                    p.u.swap(proposal);
                    p.tiebreak = tb;
                    p.log_like = ll;
                    accept = true;
                    ++accepted;
                }
            }
            log_step_ += gain_ * ((accept ? 1.0 : 0.0) - cfg_.target_acceptance);
            log_step_ = std::clamp(log_step_, std::log(1e-9), std::log(0.5));
        }
        return static_cast<double>(accepted) / static_cast<double>(cfg_.mcmc_steps);
    }

private:
    const LogLikelihood& model_;
    std::size_t dim_;
    const NSConfig& cfg_;
    Rng& rng_;
    double log_step_;
    double coord_prob_;
    double gain_;
};

}  // namespace

void NSConfig::validate() const {
    if (n_particles < 2) throw std::invalid_argument("n_particles must be at least 2");
    if (mcmc_steps < 1) throw std::invalid_argument("mcmc_steps must be at least 1");
    if (!(termination_frac > 0.0)) throw std::invalid_argument("termination_frac must be positive");
    if (!(step_scale > 0.0 && step_scale <= 0.5)) throw std::invalid_argument("step_scale must lie in (0, 0.5]");
    if (!(target_acceptance > 0.0 && target_acceptance < 1.0)) {
        throw std::invalid_argument("target_acceptance must lie in (0, 1)");
    }
    if (stall_limit < 1) throw std::invalid_argument("stall_limit must be at least 1");
}

std::vector<double> NSResult::weights() const {
    std::vector<double> w(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) w[i] = std::exp(samples[i].log_weight);
    return w;
}

double NSResult::effective_sample_size() const {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (const auto& s : samples) {
        const double w = std::exp(s.log_weight);
        sum += w;
        sum_sq += w * w;
    }
    return sum_sq > 0.0 ? sum * sum / sum_sq : 0.0;
}

NSResult run_nested_sampling(const LogLikelihood& model, std::size_t dim, const NSConfig& cfg) {
    cfg.validate();
    if (dim < 1) throw std::invalid_argument("dimension must be at least 1");

    const std::size_t n = cfg.n_particles;
    const double n_real = static_cast<double>(n);
    Rng rng(cfg.seed);

    std::vector<Particle> live(n);
    for (auto& p : live) {
        p.u.resize(dim);
        for (auto& x : p.u) x = rng.uniform_open();
        p.tiebreak = rng.uniform_open();
    }
    evaluate_population(model, live, cfg.threads);
    for (const auto& p : live) {
        if (!std::isfinite(p.log_like)) throw SamplerError("likelihood is not finite at an initial particle");
    }

    ConstrainedWalker walker(model, dim, cfg, rng);
    NSResult result;
    result.n_particles = n;

    std::vector<NSSample> dead;
    std::vector<double> dead_log_x;
    double log_x = 0.0;
    double log_z = kNegInf;
    double prev_log_like = 0.0;
    std::size_t stalled = 0;
    const double log_frac = std::log(cfg.termination_frac);

    for (std::size_t k = 1;; ++k) {
        const std::size_t done = k - 1;
        if (done >= n) {
            double max_live = kNegInf;
            for (const auto& p : live) max_live = std::max(max_live, p.log_like);
            if (max_live + log_x < log_frac + log_z) break;
        }
        if (cfg.max_iterations != 0 && done >= cfg.max_iterations) break;

        std::size_t worst = 0;
        for (std::size_t i = 1; i < n; ++i) {
            if (ranks_above(live[worst].log_like, live[worst].tiebreak, live[i].log_like, live[i].tiebreak)) worst = i;
        }
        const double worst_ll = live[worst].log_like;
        const double worst_tb = live[worst].tiebreak;

        const double next_log_x =
            cfg.stochastic_shrinkage ? log_x + std::log(rng.uniform_open()) / n_real : -static_cast<double>(k) / n_real;
        const double left_ll = (k == 1) ? worst_ll : prev_log_like;
        log_z = log_add_exp(log_z, log_add_exp(left_ll, worst_ll) - std::numbers::ln2 + log_width(log_x, next_log_x));
        log_x = next_log_x;
        prev_log_like = worst_ll;
        dead.push_back(NSSample{live[worst].u, worst_ll, 0.0});
        dead_log_x.push_back(log_x);

        // Clone a random survivor and walk it above the threshold.
        std::size_t source = static_cast<std::size_t>(rng.index(n - 1));
        if (source >= worst) ++source;
        Particle fresh = live[source];
        const double acceptance = walker.evolve(fresh, worst_ll, worst_tb);
        stalled = (acceptance == 0.0) ? stalled + 1 : 0;
        if (stalled >= cfg.stall_limit) {
            std::ostringstream msg;
            msg << "nested sampling stalled: " << stalled << " consecutive replacements accepted no move"
                << " (iteration " << k << ", log L threshold " << worst_ll << ", step scale "
                << walker.step_scale() << "); the likelihood may have a plateau or the proposal is mis-scaled";
            throw SamplerError(msg.str());
        }
        if (cfg.record_trace) {
            result.trace.push_back(
                ReplacementTrace{worst_ll, worst_tb, fresh.log_like, fresh.tiebreak, acceptance});
        }
        live[worst] = std::move(fresh);

        if (cfg.on_progress && cfg.progress_every != 0 && k % cfg.progress_every == 0) {
            cfg.on_progress(NSProgress{k, log_z, worst_ll, walker.step_scale(), acceptance});
        }
    }

    // Prior-mass weight of each discarded particle: half of each adjacent
    // trapezoid segment, with the first segment assigned wholly to particle 1.
    const std::size_t n_dead = dead.size();
    std::vector<double> log_seg(n_dead);
    for (std::size_t j = 0; j < n_dead; ++j) {
        log_seg[j] = log_width(j == 0 ? 0.0 : dead_log_x[j - 1], dead_log_x[j]);
    }
    std::vector<double> log_w;
    log_w.reserve(n_dead + n);
    for (std::size_t j = 0; j < n_dead; ++j) {
        double w = (j == 0) ? log_seg[0] : log_seg[j] - std::numbers::ln2;
        if (j + 1 < n_dead) w = log_add_exp(w, log_seg[j + 1] - std::numbers::ln2);
        log_w.push_back(w);
    }

    std::sort(live.begin(), live.end(), [](const Particle& a, const Particle& b) {
        return ranks_above(b.log_like, b.tiebreak, a.log_like, a.tiebreak);
    });
    const double log_live_share = log_x - std::log(n_real);
    result.samples = std::move(dead);
    for (auto& p : live) {
        result.samples.push_back(NSSample{std::move(p.u), p.log_like, 0.0});
        log_w.push_back(log_live_share);
    }

    std::vector<double> log_post(result.samples.size());
    for (std::size_t i = 0; i < log_post.size(); ++i) log_post[i] = log_w[i] + result.samples[i].log_like;
    result.log_z = log_sum_exp(log_post);
    for (auto& lp : log_post) lp -= result.log_z;
    const double renorm = log_sum_exp(log_post);
    double information = 0.0;
    for (std::size_t i = 0; i < log_post.size(); ++i) {
        auto& s = result.samples[i];
        s.log_weight = log_post[i] - renorm;
        const double p = std::exp(s.log_weight);
        if (p > 0.0) information += p * (s.log_like - result.log_z);
    }
    result.information = std::max(0.0, information);
    result.log_z_err = std::sqrt(result.information / n_real);
    result.n_iterations = n_dead;
    return result;
}

std::vector<std::size_t> systematic_resample(std::span<const double> weights, std::size_t n, Rng& rng) {
    if (n == 0) throw std::invalid_argument("resample count must be at least 1");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("weights must be non-negative");
        total += w;
    }
    if (!(total > 0.0)) throw DegenerateWeightsError("all weights are zero");

    std::vector<std::size_t> idx;
    idx.reserve(n);
    const double spacing = total / static_cast<double>(n);
    double target = rng.uniform() * spacing;
    double cumulative = 0.0;
    std::size_t i = 0;
    for (std::size_t k = 0; k < n; ++k) {
        while (i + 1 < weights.size() && cumulative + weights[i] <= target) {
            cumulative += weights[i];
            ++i;
        }
        // Rounding can leave trailing zero-weight entries reachable; step back to the last positive one.
        std::size_t pick = i;
        while (weights[pick] == 0.0 && pick > 0) --pick;
        idx.push_back(pick);
        target += spacing;
    }
    return idx;
}

std::vector<PriorVector> posterior_resample(const NSResult& result, std::size_t n, std::uint64_t seed, double min_ess) {
    if (result.samples.empty()) throw DegenerateWeightsError("result holds no samples");
    const double ess = result.effective_sample_size();
    if (ess < min_ess) {
        std::ostringstream msg;
        msg << "posterior effective sample size " << ess << " is below " << min_ess
            << "; rerun with more particles";
        throw DegenerateWeightsError(msg.str());
    }
    Rng rng(substream_seed(seed, 0x7265'7361'6d70ULL));
    const auto w = result.weights();
    auto idx = systematic_resample(w, n, rng);
    for (std::size_t i = idx.size(); i > 1; --i) {
        std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.index(i))]);
    }
    std::vector<PriorVector> draws;
    draws.reserve(n);
    for (auto i : idx) draws.push_back(result.samples[i].u);
    return draws;
}

}  // namespace crease
