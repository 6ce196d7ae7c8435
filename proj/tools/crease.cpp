// crease: fit, forecast and compare batting careers from score files.

#include <cerrno>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "crease/career_model.hpp"
#include "crease/data_io.hpp"
#include "crease/errors.hpp"
#include "crease/nested_sampler.hpp"
#include "crease/predictive.hpp"
#include "crease/simulate.hpp"
#include "crease/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOptions {
    std::optional<std::uint64_t> seed;
    std::size_t threads = 1;
    std::string out_dir = "crease-out";
};

std::uint64_t resolve_seed(const CommonOptions& common) {
    if (common.seed) return *common.seed;
    if (const char* env = std::getenv("CREASE_SEED"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        errno = 0;
        const auto v = std::strtoull(env, &end, 10);
        if (errno != 0 || end == env || *end != '\0') {
            throw std::invalid_argument(std::string("CREASE_SEED is not an unsigned integer: ") + env);
        }
        return v;
    }
    return 1;
}

// Honours SOURCE_DATE_EPOCH so archives can be reproduced byte for byte.
std::string creation_timestamp() {
    std::time_t t = std::time(nullptr);
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env != nullptr && *env != '\0') {
        t = static_cast<std::time_t>(std::strtoll(env, nullptr, 10));
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

fs::path prepare_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw crease::IoError("cannot create output directory '" + dir + "': " + ec.message());
    return fs::path(dir);
}

void record_run(const fs::path& out, const std::string& subcommand, json config) {
    config["subcommand"] = subcommand;
    config["code_version"] = crease::kCodeVersion;
    crease::write_text(out / ("run-" + subcommand + ".json"), config.dump(2) + "\n");
}

std::vector<crease::PriorVector> posterior_draws(const crease::FitArchive& archive, std::size_t n, std::uint64_t seed) {
    return crease::posterior_resample(archive.result, n, seed);
}

// ---- fit ------------------------------------------------------------------

struct FitOptions {
    std::string scores;
    std::optional<std::string> player;
    crease::NSConfig ns;
    std::string preset = "paper";
    std::optional<std::size_t> particles;
    std::optional<std::size_t> mcmc_steps;
    std::size_t progress_every = 100;
};

// paper: the published 1000 x 1000 settings, hours for a long career.
// desk: 200 x 200, minutes.
std::size_t preset_size(const std::string& preset) { return preset == "desk" ? 200 : 1000; }

int run_fit(const FitOptions& opt, const CommonOptions& common) {
    auto career = crease::read_scores(opt.scores, opt.player);
    const auto out = prepare_out_dir(common.out_dir);

    crease::NSConfig cfg = opt.ns;
    cfg.n_particles = opt.particles.value_or(preset_size(opt.preset));
    cfg.mcmc_steps = opt.mcmc_steps.value_or(preset_size(opt.preset));
    cfg.seed = resolve_seed(common);
    cfg.threads = common.threads;
    cfg.validate();

    record_run(out, "fit",
               json{{"scores", opt.scores},
                    {"player_id", career.player_id()},
                    {"innings", career.size()},
                    {"n_particles", cfg.n_particles},
                    {"mcmc_steps", cfg.mcmc_steps},
                    {"termination_frac", cfg.termination_frac},
                    {"step_scale", cfg.step_scale},
                    {"stochastic_shrinkage", cfg.stochastic_shrinkage},
                    {"seed", cfg.seed},
                    {"threads", cfg.threads},
                    {"out_dir", common.out_dir}});

    std::ofstream progress(out / "progress.log", std::ios::trunc);
    if (!progress) throw crease::IoError("cannot write progress log in '" + common.out_dir + "'");
    progress << "iteration\tlog_z\tworst_log_like\tstep_scale\tacceptance\n";
    cfg.progress_every = opt.progress_every;
    cfg.on_progress = [&progress](const crease::NSProgress& p) {
        progress << p.iteration << '\t' << p.log_z << '\t' << p.worst_log_like << '\t' << p.step_scale << '\t'
                 << p.acceptance << '\n';
    };

    const crease::CareerModel model(career);
    auto result = crease::run_nested_sampling(model, model.dimension(), cfg);

    crease::FitArchive archive;
    archive.player_id = career.player_id();
    archive.innings.assign(career.innings().begin(), career.innings().end());
    archive.config = cfg;
    archive.result = std::move(result);
    archive.created = creation_timestamp();
    archive.code_version = crease::kCodeVersion;
    crease::write_fit(out / "fit.json", archive);

    std::cout << "player\t" << archive.player_id << "\n"
              << "innings\t" << career.size() << "\n"
              << "log_z\t" << archive.result.log_z << "\n"
              << "log_z_err\t" << archive.result.log_z_err << "\n"
              << "iterations\t" << archive.result.n_iterations << "\n"
              << "archive\t" << (out / "fit.json").string() << "\n";
    return 0;
}

// ---- predict --------------------------------------------------------------

struct PredictOptions {
    std::string archive;
    std::size_t horizon = 20;
    double level = 0.68;
    std::size_t draws = 500;
    std::size_t keep_draws = 20;
};

int run_predict(const PredictOptions& opt, const CommonOptions& common) {
    const auto archive = crease::read_fit(opt.archive);
    const auto out = prepare_out_dir(common.out_dir);
    const auto seed = resolve_seed(common);
    record_run(out, "predict",
               json{{"archive", opt.archive},
                    {"horizon", opt.horizon},
                    {"level", opt.level},
                    {"draws", opt.draws},
                    {"keep_draws", opt.keep_draws},
                    {"seed", seed},
                    {"threads", common.threads},
                    {"out_dir", common.out_dir}});

    const auto career = archive.career();
    const auto draws = posterior_draws(archive, opt.draws, seed);
    crease::PredictiveOptions popts{opt.level, opt.keep_draws, common.threads};
    const auto curve = crease::nu_curve(career, draws, popts);
    const auto forecast = crease::extrapolate(career, draws, opt.horizon, seed, popts);

    crease::write_text(out / "nu_curve.tsv", crease::emit_plot_data(curve));
    crease::write_text(out / "forecast.tsv", crease::emit_plot_data(forecast));
    crease::write_text(out / "players.tsv",
                       crease::emit_player_table({{career.player_id(), career.batting_average(), forecast.next_innings_nu}}));

    std::cout << "player\t" << career.player_id() << "\n"
              << "next_innings_nu\t" << forecast.next_innings_nu << "\n"
              << "nu_curve\t" << (out / "nu_curve.tsv").string() << "\n"
              << "forecast\t" << (out / "forecast.tsv").string() << "\n";
    return 0;
}

// ---- compare --------------------------------------------------------------

struct CompareCliOptions {
    std::string archive_a;
    std::string archive_b;
    std::size_t draws = 500;
    std::size_t max_pairs = 250'000;
};

int run_compare(const CompareCliOptions& opt, const CommonOptions& common) {
    const auto a = crease::read_fit(opt.archive_a);
    const auto b = crease::read_fit(opt.archive_b);
    const auto out = prepare_out_dir(common.out_dir);
    const auto seed = resolve_seed(common);
    record_run(out, "compare",
               json{{"archive_a", opt.archive_a},
                    {"archive_b", opt.archive_b},
                    {"draws", opt.draws},
                    {"max_pairs", opt.max_pairs},
                    {"seed", seed},
                    {"threads", common.threads},
                    {"out_dir", common.out_dir}});

    crease::PredictiveOptions popts;
    popts.threads = common.threads;
    const auto career_a = a.career();
    const auto career_b = b.career();
    const auto fc_a = crease::extrapolate(career_a, posterior_draws(a, opt.draws, seed), 1, seed, popts);
    const auto fc_b = crease::extrapolate(career_b, posterior_draws(b, opt.draws, seed), 1, seed, popts);
    const auto cmp = crease::compare(fc_a, fc_b, seed, crease::CompareOptions{opt.max_pairs, common.threads});

    const auto table = crease::emit_player_table({{career_a.player_id(), career_a.batting_average(), fc_a.next_innings_nu},
                                                  {career_b.player_id(), career_b.batting_average(), fc_b.next_innings_nu}});
    const auto kv = crease::emit_plot_data(cmp, career_a.player_id(), career_b.player_id());
    crease::write_text(out / "comparison.tsv", kv);
    crease::write_text(out / "players.tsv", table);
    std::cout << kv << "\n" << table;
    return 0;
}

// ---- simulate -------------------------------------------------------------

struct SimulateOptions {
    crease::SimulationSpec spec;
    bool from_prior = false;
    std::string player = "simulated";
    std::string output;
    std::string truth;
};

int run_simulate(const SimulateOptions& opt, const CommonOptions& common) {
    const auto seed = resolve_seed(common);
    auto spec = opt.from_prior ? crease::spec_from_prior(opt.spec.innings, opt.spec.not_out_rate, seed) : opt.spec;
    spec.validate();
    const auto sim = crease::simulate_career(spec, seed, opt.player);

    std::ostringstream text;
    text << "# simulated career: c=" << spec.c << " d=" << spec.d << " m=" << spec.hyper.m
         << " sigma=" << spec.hyper.sigma << " ell=" << spec.hyper.ell << " not_out_rate=" << spec.not_out_rate
         << " seed=" << seed << "\n"
         << crease::emit_scores(sim.career);

    const auto out = prepare_out_dir(common.out_dir);
    const fs::path scores_path = opt.output.empty() ? out / (opt.player + ".txt") : fs::path(opt.output);
    crease::write_text(scores_path, text.str());
    if (!opt.truth.empty()) {
        std::ostringstream truth;
        truth << "t\tmu2\tnu\n";
        truth.precision(17);
        for (std::size_t i = 0; i < sim.mu2_series.size(); ++i) {
            truth << (i + 1) << '\t' << sim.mu2_series[i] << '\t' << sim.true_nu[i] << '\n';
        }
        crease::write_text(opt.truth, truth.str());
    }
    record_run(out, "simulate",
               json{{"c", spec.c},
                    {"d", spec.d},
                    {"m", spec.hyper.m},
                    {"sigma", spec.hyper.sigma},
                    {"ell", spec.hyper.ell},
                    {"innings", spec.innings},
                    {"not_out_rate", spec.not_out_rate},
                    {"from_prior", opt.from_prior},
                    {"seed", seed},
                    {"output", scores_path.string()},
                    {"truth", opt.truth}});
    std::cout << scores_path.string() << "\n";
    return 0;
}

// ---- summary --------------------------------------------------------------

struct SummaryOptions {
    std::vector<std::string> inputs;
    std::size_t draws = 500;
};

int run_summary(const SummaryOptions& opt, const CommonOptions& common) {
    const auto seed = resolve_seed(common);
    std::vector<crease::PlayerSummaryRow> rows;
    for (const auto& input : opt.inputs) {
        const auto text = crease::read_text(input);
        if (text.find("\"crease-fit\"") != std::string::npos) {
            const auto archive = crease::deserialize_fit(text);
            const auto career = archive.career();
            crease::PredictiveOptions popts;
            popts.threads = common.threads;
            const auto fc = crease::extrapolate(career, posterior_draws(archive, opt.draws, seed), 1, seed, popts);
            rows.push_back({career.player_id(), career.batting_average(), fc.next_innings_nu});
        } else {
            const auto career = crease::parse_scores(text, fs::path(input).stem().string());
            rows.push_back({career.player_id(), career.batting_average(), std::nullopt});
        }
    }
    std::cout << crease::emit_player_table(rows);
    return 0;
}

int exit_code(crease::ExitCode c) { return static_cast<int>(c); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"crease: Bayesian batting-career model with a Gaussian-process ability trajectory"};
    app.require_subcommand(1);
    app.set_version_flag("--version", crease::kCodeVersion);

    CommonOptions common;
    auto add_common = [&common](CLI::App* sub) {
        sub->add_option("--seed", common.seed, "Random seed (falls back to CREASE_SEED, then 1)");
        sub->add_option("--threads", common.threads, "Worker threads; results do not depend on this")
            ->check(CLI::PositiveNumber);
        sub->add_option("--out-dir", common.out_dir, "Directory for all outputs")->capture_default_str();
    };

    FitOptions fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit the model to a score file with nested sampling");
    fit_cmd->add_option("scores", fit.scores, "Score file")->required();
    fit_cmd->add_option("--player", fit.player, "Player id (default: file stem)");
    fit_cmd->add_option("--preset", fit.preset, "Sampler scale: paper (1000 x 1000) or desk (200 x 200)")
        ->check(CLI::IsMember({"paper", "desk"}))
        ->capture_default_str();
    fit_cmd->add_option("--particles", fit.particles, "Nested-sampling particles (overrides the preset)");
    fit_cmd->add_option("--mcmc-steps", fit.mcmc_steps, "Metropolis steps per replacement (overrides the preset)");
    fit_cmd->add_option("--termination-frac", fit.ns.termination_frac, "Stopping threshold")->capture_default_str();
    fit_cmd->add_option("--step-scale", fit.ns.step_scale, "Initial proposal width")->capture_default_str();
    fit_cmd->add_flag("--stochastic-shrinkage", fit.ns.stochastic_shrinkage, "Sample prior-mass shrinkage");
    fit_cmd->add_option("--progress-every", fit.progress_every, "Iterations between progress records")
        ->capture_default_str();
    add_common(fit_cmd);

    PredictOptions predict;
    auto* predict_cmd = app.add_subcommand("predict", "Emit nu(t) and a forecast from a fit archive");
    predict_cmd->add_option("archive", predict.archive, "Fit archive")->required();
    predict_cmd->add_option("--horizon", predict.horizon, "Innings to forecast")->capture_default_str()
        ->check(CLI::PositiveNumber);
    predict_cmd->add_option("--level", predict.level, "Credible band mass")->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    predict_cmd->add_option("--draws", predict.draws, "Posterior draws")->capture_default_str()
        ->check(CLI::PositiveNumber);
    predict_cmd->add_option("--keep-draws", predict.keep_draws, "Per-draw curves to emit")->capture_default_str();
    add_common(predict_cmd);

    CompareCliOptions cmp;
    auto* compare_cmd = app.add_subcommand("compare", "Compare two players' next innings");
    compare_cmd->add_option("archive_a", cmp.archive_a, "Fit archive of player A")->required();
    compare_cmd->add_option("archive_b", cmp.archive_b, "Fit archive of player B")->required();
    compare_cmd->add_option("--draws", cmp.draws, "Posterior draws per player")->capture_default_str()
        ->check(CLI::PositiveNumber);
    compare_cmd->add_option("--max-pairs", cmp.max_pairs, "Pair budget")->capture_default_str()
        ->check(CLI::PositiveNumber);
    add_common(compare_cmd);

    SimulateOptions sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic career from the model");
    sim_cmd->add_option("--innings", sim.spec.innings, "Number of innings")->capture_default_str();
    sim_cmd->add_option("--c", sim.spec.c, "mu1 / mu2 (1 for constant ability)")->capture_default_str();
    sim_cmd->add_option("--d", sim.spec.d, "L / mu2")->capture_default_str();
    sim_cmd->add_option("--m", sim.spec.hyper.m, "GP mean ability, runs")->capture_default_str();
    sim_cmd->add_option("--sigma", sim.spec.hyper.sigma, "GP scale, log-runs")->capture_default_str();
    sim_cmd->add_option("--ell", sim.spec.hyper.ell, "GP length scale, innings")->capture_default_str();
    sim_cmd->add_option("--not-out-rate", sim.spec.not_out_rate, "Fraction of innings censored")->capture_default_str();
    sim_cmd->add_flag("--from-prior", sim.from_prior, "Draw c, d, m, sigma, ell from the prior");
    sim_cmd->add_option("--player", sim.player, "Player id")->capture_default_str();
    sim_cmd->add_option("--output", sim.output, "Score file to write (default: <out-dir>/<player>.txt)");
    sim_cmd->add_option("--truth", sim.truth, "Also write the generating mu2 and nu per innings here");
    add_common(sim_cmd);

    SummaryOptions summary;
    auto* summary_cmd = app.add_subcommand("summary", "Career average and predicted next-innings nu per player");
    summary_cmd->add_option("inputs", summary.inputs, "Score files or fit archives")->required();
    summary_cmd->add_option("--draws", summary.draws, "Posterior draws per archive")->capture_default_str();
    add_common(summary_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_code(crease::ExitCode::usage);
    }

    try {
        if (*fit_cmd) return run_fit(fit, common);
        if (*predict_cmd) return run_predict(predict, common);
        if (*compare_cmd) return run_compare(cmp, common);
        if (*sim_cmd) return run_simulate(sim, common);
        if (*summary_cmd) return run_summary(summary, common);
    } catch (const crease::ParseError& e) {
        std::cerr << "crease: parse error: " << e.what() << "\n";
        return exit_code(crease::ExitCode::parse);
    } catch (const crease::SamplerError& e) {
        std::cerr << "crease: sampler error: " << e.what() << "\n";
        return exit_code(crease::ExitCode::sampler);
    } catch (const crease::DegenerateWeightsError& e) {
        std::cerr << "crease: sampler error: " << e.what() << "\n";
        return exit_code(crease::ExitCode::sampler);
    } catch (const crease::FactorizationError& e) {
        std::cerr << "crease: sampler error: " << e.what() << "\n";
        return exit_code(crease::ExitCode::sampler);
    } catch (const crease::IoError& e) {
        std::cerr << "crease: i/o error: " << e.what() << "\n";
        return exit_code(crease::ExitCode::io);
    } catch (const std::invalid_argument& e) {
        std::cerr << "crease: " << e.what() << "\n";
        return exit_code(crease::ExitCode::usage);
    } catch (const std::exception& e) {
        std::cerr << "crease: internal error: " << e.what() << "\n";
        return exit_code(crease::ExitCode::internal);
    }
    return exit_code(crease::ExitCode::usage);
}
