#pragma once

// Within-innings batting model: effective average, hazard, score distribution
// and the censored career log-likelihood.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace crease {

/// One batting record. `dismissed == false` is a "not out" innings.
struct Innings {
    int score = 0;
    bool dismissed = true;

    friend bool operator==(const Innings&, const Innings&) = default;
};

/// Chronological batting record of one player.
class Career {
public:
    Career(std::string player_id, std::vector<Innings> innings);

    const std::string& player_id() const noexcept { return player_id_; }
    std::span<const Innings> innings() const noexcept { return innings_; }
    std::size_t size() const noexcept { return innings_.size(); }
    const Innings& operator[](std::size_t i) const { return innings_[i]; }

    std::size_t not_outs() const noexcept;
    std::size_t dismissals() const noexcept { return size() - not_outs(); }
    long long total_runs() const noexcept;

    /// Runs per dismissal; empty when the player has never been dismissed.
    std::optional<double> batting_average() const noexcept;

    friend bool operator==(const Career&, const Career&) = default;

private:
    std::string player_id_;
    std::vector<Innings> innings_;
};

/// Hazard parameters for a single innings, in runs.
struct AbilityParams {
    double mu1 = 0.0;    ///< ability on arrival at the crease
    double mu2 = 0.0;    ///< "eye in" ability
    double big_l = 0.0;  ///< e-folding scale of the mu1 -> mu2 transition

    /// Builds (c * mu2, mu2, d * mu2).
    static AbilityParams from_shape(double c, double d, double mu2);
    /// mu1 == mu2: hazard is constant and scores are geometric with mean mu.
    static AbilityParams constant(double mu);

    bool valid() const noexcept;
};

/// Shared shape (c, d) plus one mu2 per innings.
struct CareerParams {
    double c = 0.5;
    double d = 0.1;
    std::vector<double> mu2_series;

    AbilityParams innings_params(std::size_t t) const {
        return AbilityParams::from_shape(c, d, mu2_series[t]);
    }
};

/// mu(x) = mu2 + (mu1 - mu2) exp(-x / L).
double effective_average(int x, const AbilityParams& p);

/// H(x) = 1 / (mu(x) + 1).
double hazard(int x, const AbilityParams& p);

/// log P(X >= x) = sum_{a<x} log(1 - H(a)).
double log_survival(int x, const AbilityParams& p);

/// P(X >= x).
double survival(int x, const AbilityParams& p);

/// log P(X = x).
double log_score_pmf(int x, const AbilityParams& p);

/// P(X = x) = H(x) * prod_{a<x} (1 - H(a)).
double score_pmf(int x, const AbilityParams& p);

/// Log-likelihood of a single innings: log P(X = x) if dismissed, log P(X >= x) if not out.
double innings_log_likelihood(const Innings& inn, const AbilityParams& p);

/// Censored log-likelihood of a whole career, innings t using its own mu2_t.
/// Throws DimensionError if the mu2 series length differs from the career length.
double career_log_likelihood(const Career& career, const CareerParams& cp);

/// Controls for truncated sums over scores.
struct TruncationPolicy {
    double tail_tol = 1e-9;      ///< bound on the neglected tail of sum_x P(X >= x)
    int min_cap = 0;             ///< never stop before this score
    int max_cap = 50'000'000;    ///< give up (std::length_error) beyond this score
};

/// Truncated score distribution: pmf[x] for x = 0..cap and surv[x] = P(X >= x)
/// for x = 0..cap+1.
///
/// The hazard never drops below 1/(mu2 + 1), so the neglected tail obeys the
/// geometric bound sum_{y > cap} P(X >= y) <= P(X >= cap + 1) (mu2 + 1).
/// The cap is the first score where that bound is below tail_tol.
struct ScoreDistribution {
    std::vector<double> pmf;
    std::vector<double> surv;
    double tail_bound = 0.0;

    int cap() const noexcept { return static_cast<int>(pmf.size()) - 1; }
    /// P(X >= x) with zero beyond the cap.
    double survival_at(int x) const noexcept {
        return x < static_cast<int>(surv.size()) ? surv[static_cast<std::size_t>(x)] : 0.0;
    }
    /// E[X] = sum_{x >= 1} P(X >= x), truncated at the cap.
    double mean() const noexcept;

    static ScoreDistribution build(const AbilityParams& p, const TruncationPolicy& policy = {});
};

/// E[X] = sum_{x >= 1} P(X >= x), truncated under the same tail bound as ScoreDistribution.
double expected_score(const AbilityParams& p, const TruncationPolicy& policy = {});

}  // namespace crease
