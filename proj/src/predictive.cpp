#include "crease/predictive.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "crease/errors.hpp"
#include "crease/random.hpp"

namespace crease {

namespace {

template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
    threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += threads) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

void check_level(double level) {
    if (!(level > 0.0 && level <= 1.0)) throw std::invalid_argument("credible level must lie in (0, 1]");
}

}  // namespace

double nu_of_params(const AbilityParams& p) {
    return expected_score(p);
}

double sample_quantile(std::vector<double>& values, double prob) {
    if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * std::clamp(prob, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

NuCurve summarize_draws(std::vector<double> t_values, const std::vector<std::vector<double>>& draws,
                        const PredictiveOptions& opts) {
    check_level(opts.level);
    if (draws.empty()) throw DegenerateWeightsError("no posterior draws to summarize");
    NuCurve curve;
    curve.level = opts.level;
    curve.t_values = std::move(t_values);
    const std::size_t cols = curve.t_values.size();
    curve.median.resize(cols);
    curve.band_low.resize(cols);
    curve.band_high.resize(cols);
    std::vector<double> column(draws.size());
    for (std::size_t i = 0; i < cols; ++i) {
        for (std::size_t k = 0; k < draws.size(); ++k) column[k] = draws[k][i];
        curve.band_low[i] = sample_quantile(column, 0.5 * (1.0 - opts.level));
        curve.median[i] = sample_quantile(column, 0.5);
        curve.band_high[i] = sample_quantile(column, 0.5 * (1.0 + opts.level));
    }
    const std::size_t keep = std::min(opts.keep_draws, draws.size());
    curve.posterior_draws.assign(draws.begin(), draws.begin() + static_cast<std::ptrdiff_t>(keep));
    return curve;
}

NuCurve nu_curve(const Career& career, std::span<const PriorVector> draws, const PredictiveOptions& opts) {
    const std::size_t n_innings = career.size();
    std::vector<std::vector<double>> per_draw(draws.size());
    parallel_for(draws.size(), opts.threads, [&](std::size_t k) {
        const auto params = prior_transform(draws[k], n_innings);
        auto& row = per_draw[k];
        row.resize(n_innings);
        for (std::size_t t = 0; t < n_innings; ++t) row[t] = nu_of_params(params.career.innings_params(t));
    });
    return summarize_draws(innings_indices(n_innings), per_draw, opts);
}

GpConditional gp_conditional(std::span<const double> log_mu2_obs, const GPHyper& h, std::span<const double> t_obs,
                             std::span<const double> t_new) {
    if (log_mu2_obs.size() != t_obs.size()) throw DimensionError("observations and indices differ in length");
    const auto n_obs = static_cast<Eigen::Index>(t_obs.size());
    const auto n_new = static_cast<Eigen::Index>(t_new.size());
    const double log_m = std::log(h.m);

    GpConditional out;
    out.mean = Eigen::VectorXd::Constant(n_new, log_m);
    out.cov = Eigen::MatrixXd::Zero(n_new, n_new);
    if (h.sigma == 0.0) return out;

    const auto obs = build_covariance(t_obs, h);
    Eigen::MatrixXd cross(n_obs, n_new);
    for (Eigen::Index i = 0; i < n_obs; ++i) {
        for (Eigen::Index j = 0; j < n_new; ++j) cross(i, j) = squared_exponential(t_obs[i] - t_new[j], h);
    }
    Eigen::VectorXd resid(n_obs);
    for (Eigen::Index i = 0; i < n_obs; ++i) resid[i] = log_mu2_obs[static_cast<std::size_t>(i)] - log_m;

    const auto lower = obs.lower.triangularView<Eigen::Lower>();
    const Eigen::MatrixXd a = lower.solve(cross);       // L^-1 K_on
    const Eigen::VectorXd w = lower.solve(resid);       // L^-1 (y - log m)
    out.mean.array() += (a.transpose() * w).array();
    for (Eigen::Index i = 0; i < n_new; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double v = squared_exponential(t_new[i] - t_new[j], h) - a.col(i).dot(a.col(j));
            out.cov(i, j) = v;
            out.cov(j, i) = v;
        }
    }
    return out;
}

Forecast extrapolate(const Career& career, std::span<const PriorVector> draws, std::size_t horizon,
                     std::uint64_t seed, const PredictiveOptions& opts) {
    if (horizon < 1) throw std::invalid_argument("forecast horizon must be at least 1");
    if (draws.empty()) throw DegenerateWeightsError("no posterior draws to extrapolate from");
    const std::size_t n_innings = career.size();
    const auto t_obs = innings_indices(n_innings);
    std::vector<double> t_new(horizon);
    for (std::size_t j = 0; j < horizon; ++j) t_new[j] = static_cast<double>(n_innings + 1 + j);

    std::vector<std::vector<double>> per_draw(draws.size());
    std::vector<AbilityParams> next(draws.size());
    parallel_for(draws.size(), opts.threads, [&](std::size_t k) {
        const auto params = prior_transform(draws[k], n_innings);
        const auto cond = gp_conditional(params.log_mu2, params.hyper, t_obs, t_new);
        Eigen::VectorXd log_mu2 = cond.mean;
        if (params.hyper.sigma > 0.0) {
            Rng rng = Rng::substream(seed, k);
            Eigen::VectorXd eps(static_cast<Eigen::Index>(horizon));
            for (auto& e : eps) e = rng.normal();
            const auto lower = cholesky_with_jitter(cond.cov, base_jitter(params.hyper.sigma));
            log_mu2 += lower.triangularView<Eigen::Lower>() * eps;
        }
        auto& row = per_draw[k];
        row.resize(horizon);
        for (std::size_t j = 0; j < horizon; ++j) {
            const auto p = AbilityParams::from_shape(params.career.c, params.career.d,
                                                     std::exp(log_mu2[static_cast<Eigen::Index>(j)]));
            row[j] = nu_of_params(p);
            if (j == 0) next[k] = p;
        }
    });

    Forecast fc;
    fc.horizon = horizon;
    double sum = 0.0;
    for (const auto& row : per_draw) sum += row[0];
    fc.next_innings_nu = sum / static_cast<double>(per_draw.size());
    fc.nu_pred = summarize_draws(std::move(t_new), per_draw, opts);
    fc.next_params = std::move(next);
    return fc;
}

namespace {

Comparison compare_distributions(const ScoreDistribution& a, const ScoreDistribution& b) {
    Comparison c;
    c.pairs = 1;
    for (int x = 0; x <= b.cap(); ++x) c.p_outscore += b.pmf[static_cast<std::size_t>(x)] * a.survival_at(x + 1);
    for (int x = 0; x <= a.cap(); ++x) c.p_outscored += a.pmf[static_cast<std::size_t>(x)] * b.survival_at(x + 1);
    const int common = std::min(a.cap(), b.cap());
    for (int x = 0; x <= common; ++x) c.p_tie += a.pmf[static_cast<std::size_t>(x)] * b.pmf[static_cast<std::size_t>(x)];
    c.expected_margin = a.mean() - b.mean();
    return c;
}

}  // namespace

Comparison compare_pair(const AbilityParams& a, const AbilityParams& b) {
    return compare_distributions(ScoreDistribution::build(a), ScoreDistribution::build(b));
}

Comparison compare(const Forecast& a, const Forecast& b, std::uint64_t seed, const CompareOptions& opts) {
    const std::size_t n_a = a.next_params.size();
    const std::size_t n_b = b.next_params.size();
    if (n_a == 0 || n_b == 0) throw DegenerateWeightsError("forecast holds no posterior draws");

    std::vector<ScoreDistribution> dist_a(n_a);
    std::vector<ScoreDistribution> dist_b(n_b);
    parallel_for(n_a, opts.threads, [&](std::size_t i) { dist_a[i] = ScoreDistribution::build(a.next_params[i]); });
    parallel_for(n_b, opts.threads, [&](std::size_t i) { dist_b[i] = ScoreDistribution::build(b.next_params[i]); });

    // Pair list: the full product, or an independent draw per player.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (n_a * n_b <= opts.max_pairs) {
        pairs.reserve(n_a * n_b);
        for (std::size_t i = 0; i < n_a; ++i)
            for (std::size_t j = 0; j < n_b; ++j) pairs.emplace_back(i, j);
    } else {
        Rng rng_a = Rng::substream(seed, 0xa);
        Rng rng_b = Rng::substream(seed, 0xb);
        pairs.reserve(opts.max_pairs);
        for (std::size_t k = 0; k < opts.max_pairs; ++k) {
            pairs.emplace_back(static_cast<std::size_t>(rng_a.index(n_a)), static_cast<std::size_t>(rng_b.index(n_b)));
        }
    }

    std::vector<Comparison> per_pair(pairs.size());
    parallel_for(pairs.size(), opts.threads, [&](std::size_t k) {
        per_pair[k] = compare_distributions(dist_a[pairs[k].first], dist_b[pairs[k].second]);
    });

    Comparison total;
    for (const auto& c : per_pair) {
        total.expected_margin += c.expected_margin;
        total.p_outscore += c.p_outscore;
        total.p_tie += c.p_tie;
        total.p_outscored += c.p_outscored;
    }
    const double count = static_cast<double>(per_pair.size());
    total.expected_margin /= count;
    total.p_outscore /= count;
    total.p_tie /= count;
    total.p_outscored /= count;
    total.pairs = per_pair.size();
    return total;
}

}  // namespace crease
