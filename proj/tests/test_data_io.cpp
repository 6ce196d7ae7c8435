#include <cstdio>
#include <filesystem>
#include <sstream>

#include <doctest.h>

#include "crease/career_model.hpp"
#include "crease/data_io.hpp"
#include "crease/errors.hpp"
#include "crease/nested_sampler.hpp"
#include "crease/predictive.hpp"
#include "crease/random.hpp"

using namespace crease;
using doctest::Approx;

namespace {

std::size_t parse_error_line(std::string_view text) {
    try {
        parse_scores(text);
    } catch (const ParseError& e) {
        return e.line();
    }
    return 0;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(s);
    while (std::getline(in, cell, sep)) out.push_back(cell);
    return out;
}

std::vector<std::string> lines(const std::string& s) { return split(s, '\n'); }

FitArchive small_fit() {
    const auto career = parse_scores("12\n0\n45*\n3\n101\n", "tester");
    NSConfig cfg;
    cfg.n_particles = 30;
    cfg.mcmc_steps = 5;
    cfg.seed = 4;
    CareerModel model(career);
    FitArchive a;
    a.player_id = career.player_id();
    a.innings.assign(career.innings().begin(), career.innings().end());
    a.config = cfg;
    a.result = run_nested_sampling(model, model.dimension(), cfg);
    a.created = "1970-01-01T00:00:00Z";
    a.code_version = "test";
    return a;
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("crease-test-" + name);
}

}  // namespace

TEST_SUITE("score files") {
    TEST_CASE("scores, not-outs, comments and blank lines") {
        const auto c = parse_scores("# header\n12\n\n  45* \n0 # duck\n\t7\n", "p");
        REQUIRE(c.size() == 4);
        CHECK(c[0] == Innings{12, true});
        CHECK(c[1] == Innings{45, false});
        CHECK(c[2] == Innings{0, true});
        CHECK(c[3] == Innings{7, true});
        CHECK(c.player_id() == "p");
    }

    TEST_CASE("windows line endings are accepted") {
        const auto c = parse_scores("3\r\n4*\r\n");
        CHECK(c.size() == 2);
        CHECK(!c[1].dismissed);
    }

    TEST_CASE("bad records report their line") {
        CHECK(parse_error_line("1\n2\n-5\n") == 3);
        CHECK(parse_error_line("abc\n") == 1);
        CHECK(parse_error_line("1\n12x\n") == 2);
        CHECK(parse_error_line("1\n2\n3\n4 5\n") == 4);
        CHECK(parse_error_line("*\n") == 1);
        CHECK(parse_error_line("12**\n") == 1);
        CHECK(parse_error_line("99999999\n") == 1);
        CHECK_THROWS_AS(parse_scores("# nothing\n\n"), ParseError);
        CHECK_THROWS_AS(parse_scores(""), ParseError);
    }

    TEST_CASE("emit then parse returns the same career") {
        Rng rng(17);
        for (int k = 0; k < 100; ++k) {
            std::vector<Innings> inn(1 + rng.index(60));
            for (auto& i : inn) i = {static_cast<int>(rng.index(400)), rng.uniform() < 0.8};
            const Career c("x", inn);
            CHECK(parse_scores(emit_scores(c), "x") == c);
        }
    }

    TEST_CASE("career average counts runs per dismissal") {
        const auto c = parse_scores("10\n20*\n30\n");
        CHECK(*c.batting_average() == Approx(30.0));
        CHECK_FALSE(parse_scores("10*\n5*\n").batting_average().has_value());
    }

    TEST_CASE("player id defaults to the file stem") {
        const auto path = temp_path("stem.txt");
        write_text(path, "5\n6\n");
        CHECK(read_scores(path).player_id() == "crease-test-stem");
        CHECK(read_scores(path, "other").player_id() == "other");
        std::filesystem::remove(path);
        CHECK_THROWS_AS(read_scores(path), IoError);
    }
}

TEST_SUITE("fit archive") {
    TEST_CASE("round trip is exact") {
        const auto a = small_fit();
        const auto b = deserialize_fit(serialize_fit(a));
        CHECK(b.player_id == a.player_id);
        CHECK(b.innings == a.innings);
        CHECK(b.result.samples == a.result.samples);
        CHECK(b.result.log_z == a.result.log_z);
        CHECK(b.result.log_z_err == a.result.log_z_err);
        CHECK(b.result.n_iterations == a.result.n_iterations);
        CHECK(b.config.seed == a.config.seed);
        CHECK(b.config.n_particles == a.config.n_particles);
        CHECK(serialize_fit(b) == serialize_fit(a));
    }

    TEST_CASE("replay from the archive reproduces the nu curve") {
        const auto a = small_fit();
        const auto path = temp_path("replay.json");
        write_fit(path, a);
        const auto b = read_fit(path);
        std::filesystem::remove(path);
        const auto draws_a = posterior_resample(a.result, 50, 3, 1.0);
        const auto draws_b = posterior_resample(b.result, 50, 3, 1.0);
        const auto ca = nu_curve(a.career(), draws_a);
        const auto cb = nu_curve(b.career(), draws_b);
        CHECK(ca.median == cb.median);
        CHECK(ca.band_low == cb.band_low);
        CHECK(emit_plot_data(ca) == emit_plot_data(cb));
    }

    TEST_CASE("truncated, foreign and future archives are rejected") {
        const auto text = serialize_fit(small_fit());
        CHECK_THROWS_AS(deserialize_fit(text.substr(0, text.size() / 2)), ArchiveError);
        CHECK_THROWS_AS(deserialize_fit("{\"format\": \"other\"}"), ArchiveError);
        CHECK_THROWS_AS(deserialize_fit("[]"), ArchiveError);

        auto future = text;
        const auto at = future.find("\"version\": 1");
        REQUIRE(at != std::string::npos);
        future.replace(at, 12, "\"version\": 2");
        try {
            deserialize_fit(future);
            FAIL("future version accepted");
        } catch (const ArchiveError& e) {
            CHECK(std::string(e.what()).find("version 2") != std::string::npos);
        }
    }

    TEST_CASE("missing archive is an io error") {
        CHECK_THROWS_AS(read_fit(temp_path("does-not-exist.json")), IoError);
    }
}

TEST_SUITE("plot data") {
    TEST_CASE("nu curve columns") {
        NuCurve c;
        c.t_values = {1, 2, 3};
        c.median = {10, 11, 12};
        c.band_low = {9, 10, 11};
        c.band_high = {12, 13, 14};
        c.posterior_draws = {{10.5, 11.5, 12.5}, {9.5, 10.5, 11.5}};
        const auto rows = lines(emit_plot_data(c));
        REQUIRE(rows.size() == 4);
        CHECK(rows[0] == "t\tmedian\tlow\thigh\tdraw_1\tdraw_2");
        CHECK(rows[2] == "2\t11\t10\t13\t11.5\t10.5");
        for (const auto& r : rows) CHECK(split(r, '\t').size() == 6);
    }

    TEST_CASE("comparison keys") {
        Comparison c{1.5, 0.5, 0.1, 0.4, 9};
        const auto rows = lines(emit_plot_data(c, "a", "b"));
        REQUIRE(rows.size() == 8);
        CHECK(rows[1] == "player_a\ta");
        CHECK(rows[4] == "p_outscore\t0.5");
        CHECK(rows[7] == "pairs\t9");
    }

    TEST_CASE("player table has a fixed header and NA for missing values") {
        const auto rows = lines(emit_player_table({{"a", 40.25, 38.5}, {"b", std::nullopt, 12.0}}));
        REQUIRE(rows.size() == 3);
        CHECK(rows[0] == "player\tcareer_average\tpredicted_nu");
        CHECK(rows[1] == "a\t40.25\t38.5");
        CHECK(rows[2] == "b\tNA\t12");
    }
}
