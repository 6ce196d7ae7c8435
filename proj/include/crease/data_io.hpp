#pragma once

// Score files, fit archives and plot-ready tables.
//
// Score file grammar, one innings per line:
//
//   line    := blank | comment | innings [comment]
//   innings := digit+ ['*']          '*' marks a not-out innings
//   comment := '#' any*
//
// Leading and trailing whitespace is ignored. Order is chronological.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crease/model.hpp"
#include "crease/nested_sampler.hpp"
#include "crease/predictive.hpp"

namespace crease {

/// Parses score-file text. Throws ParseError (with line number) on bad records
/// or when the text holds no innings.
Career parse_scores(std::string_view text, std::string player_id = {});

/// Reads and parses a score file; the player id defaults to the file stem.
Career read_scores(const std::filesystem::path& path, std::optional<std::string> player_id = std::nullopt);

/// Canonical score-file text: one token per line, no comments.
std::string emit_scores(const Career& career);

/// Everything needed to replay predictions from a fit.
struct FitArchive {
    static constexpr int kVersion = 1;

    std::string player_id;
    std::vector<Innings> innings;
    NSConfig config;  ///< callbacks and trace flags are not stored
    NSResult result;  ///< trace is not stored
    std::string created;
    std::string code_version;

    Career career() const { return Career(player_id, innings); }
};

/// Serializes to versioned JSON. Reals use shortest round-trip decimal form.
std::string serialize_fit(const FitArchive& archive);
/// Throws ArchiveError on malformed, truncated or wrong-version input.
FitArchive deserialize_fit(std::string_view text);

void write_fit(const std::filesystem::path& path, const FitArchive& archive);
FitArchive read_fit(const std::filesystem::path& path);

/// Tab-separated: t, median, low, high, then one column per retained draw.
std::string emit_plot_data(const NuCurve& curve);
/// Same columns as a NuCurve over the forecast horizon.
std::string emit_plot_data(const Forecast& forecast);
/// Key-value table of a comparison.
std::string emit_plot_data(const Comparison& comparison, std::string_view player_a, std::string_view player_b);

struct PlayerSummaryRow {
    std::string player;
    std::optional<double> career_average;
    std::optional<double> predicted_nu;
};

/// Columns player, career_average, predicted_nu; missing values print as NA.
std::string emit_player_table(const std::vector<PlayerSummaryRow>& rows);

/// Writes text to a file, throwing IoError on failure.
void write_text(const std::filesystem::path& path, std::string_view text);
/// Reads a whole file, throwing IoError on failure.
std::string read_text(const std::filesystem::path& path);

}  // namespace crease
