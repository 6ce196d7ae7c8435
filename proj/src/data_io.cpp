#include "crease/data_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "crease/errors.hpp"

namespace crease {

using nlohmann::json;

namespace {

constexpr std::string_view kWhitespace = " \t\r\v\f";
constexpr int kMaxScoreDigits = 7;

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(kWhitespace);
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(kWhitespace);
    return s.substr(first, last - first + 1);
}

Innings parse_token(std::string_view token, std::size_t line) {
    bool not_out = false;
    if (!token.empty() && token.back() == '*') {
        not_out = true;
        token.remove_suffix(1);
    }
    if (token.empty()) throw ParseError(line, "missing score before '*'");
    if (token.front() == '-') throw ParseError(line, "negative score '" + std::string(token) + "'");
    std::size_t digits = 0;
    while (digits < token.size() && token[digits] >= '0' && token[digits] <= '9') ++digits;
    if (digits == 0) throw ParseError(line, "expected a score, found '" + std::string(token) + "'");
    if (digits < token.size()) {
        throw ParseError(line, "unexpected suffix '" + std::string(token.substr(digits)) + "' (only '*' is allowed)");
    }
    if (digits > kMaxScoreDigits) throw ParseError(line, "score '" + std::string(token) + "' is too large");
    int score = 0;
    for (char ch : token) score = score * 10 + (ch - '0');
    return Innings{score, !not_out};
}

std::string innings_token(const Innings& inn) {
    return std::to_string(inn.score) + (inn.dismissed ? "" : "*");
}

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// JSON has no infinities or NaN; encode them as strings.
json encode_real(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double decode_real(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw ArchiveError("expected a real number, found " + j.dump());
}

const json& field(const json& obj, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw ArchiveError(std::string("archive is missing field '") + key + "'");
    return *it;
}

json config_to_json(const NSConfig& c) {
    return json{{"n_particles", c.n_particles},
                {"mcmc_steps", c.mcmc_steps},
                {"termination_frac", c.termination_frac},
                {"seed", c.seed},
                {"step_scale", c.step_scale},
                {"target_acceptance", c.target_acceptance},
                {"stochastic_shrinkage", c.stochastic_shrinkage},
                {"stall_limit", c.stall_limit},
                {"max_iterations", c.max_iterations}};
}

NSConfig config_from_json(const json& j) {
    NSConfig c;
    c.n_particles = field(j, "n_particles").get<std::size_t>();
    c.mcmc_steps = field(j, "mcmc_steps").get<std::size_t>();
    c.termination_frac = decode_real(field(j, "termination_frac"));
    c.seed = field(j, "seed").get<std::uint64_t>();
    c.step_scale = decode_real(field(j, "step_scale"));
    c.target_acceptance = decode_real(field(j, "target_acceptance"));
    c.stochastic_shrinkage = field(j, "stochastic_shrinkage").get<bool>();
    c.stall_limit = field(j, "stall_limit").get<std::size_t>();
    c.max_iterations = field(j, "max_iterations").get<std::size_t>();
    return c;
}

json model_description() {
    return json{{"likelihood", "censored discrete hazard, H(x) = 1/(mu(x)+1), mu(x) = mu2 + (mu1-mu2) exp(-x/L)"},
                {"shape", "mu1 = C mu2, L = D mu2, C and D shared across innings"},
                {"gp", "log mu2_t ~ GP(log m, sigma^2 exp(-(t_i-t_j)^2 / (2 ell^2))), t = innings index"},
                {"priors",
                 {{"C", "Beta(1, 2)"},
                  {"D", "Beta(1, 5)"},
                  {"m", "Lognormal(log 25, 0.75^2)"},
                  {"sigma", "Exponential(rate 10)"},
                  {"ell", "Uniform(0, 100)"}}},
                {"layout", "u = [C, D, m, sigma, ell, z_1..z_I], z_t whitened GP coordinates"}};
}

}  // namespace

Career parse_scores(std::string_view text, std::string player_id) {
    std::vector<Innings> innings;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        ++line_no;
        auto line = text.substr(pos, end - pos);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (!line.empty()) {
            if (line.find_first_of(kWhitespace) != std::string_view::npos) {
                throw ParseError(line_no, "expected one innings per line, found '" + std::string(line) + "'");
            }
            innings.push_back(parse_token(line, line_no));
        }
        if (end == text.size()) break;
        pos = end + 1;
    }
    if (innings.empty()) throw ParseError(line_no, "no innings found");
    return Career(std::move(player_id), std::move(innings));
}

Career read_scores(const std::filesystem::path& path, std::optional<std::string> player_id) {
    const auto text = read_text(path);
    return parse_scores(text, player_id.value_or(path.stem().string()));
}

std::string emit_scores(const Career& career) {
    std::string out;
    for (const auto& inn : career.innings()) {
        out += innings_token(inn);
        out += '\n';
    }
    return out;
}

std::string serialize_fit(const FitArchive& a) {
    json innings = json::array();
    for (const auto& inn : a.innings) innings.push_back(innings_token(inn));

    const auto& r = a.result;
    json u = json::array();
    json log_like = json::array();
    json log_weight = json::array();
    for (const auto& s : r.samples) {
        json row = json::array();
        for (double x : s.u) row.push_back(encode_real(x));
        u.push_back(std::move(row));
        log_like.push_back(encode_real(s.log_like));
        log_weight.push_back(encode_real(s.log_weight));
    }
    json doc{{"format", "crease-fit"},
             {"version", FitArchive::kVersion},
             {"code_version", a.code_version},
             {"created", a.created},
             {"player_id", a.player_id},
             {"model", model_description()},
             {"config", config_to_json(a.config)},
             {"innings", std::move(innings)},
             {"result",
              {{"log_z", encode_real(r.log_z)},
               {"log_z_err", encode_real(r.log_z_err)},
               {"information", encode_real(r.information)},
               {"n_iterations", r.n_iterations},
               {"n_particles", r.n_particles},
               {"n_samples", r.samples.size()},
               {"log_like", std::move(log_like)},
               {"log_weight", std::move(log_weight)},
               {"u", std::move(u)}}}};
    return doc.dump(1) + "\n";
}

FitArchive deserialize_fit(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ArchiveError(std::string("archive is not valid JSON (truncated or corrupt): ") + e.what());
    }
    try {
        if (!doc.is_object() || doc.value("format", "") != "crease-fit") {
            throw ArchiveError("not a crease fit archive");
        }
        const int version = field(doc, "version").get<int>();
        if (version != FitArchive::kVersion) {
            throw ArchiveError("archive version " + std::to_string(version) + " is not supported (this build reads version " +
                               std::to_string(FitArchive::kVersion) + "); no migration is available, refit the career");
        }
        FitArchive a;
        a.code_version = field(doc, "code_version").get<std::string>();
        a.created = field(doc, "created").get<std::string>();
        a.player_id = field(doc, "player_id").get<std::string>();
        a.config = config_from_json(field(doc, "config"));
        std::size_t i = 0;
        for (const auto& tok : field(doc, "innings")) {
            ++i;
            try {
                a.innings.push_back(parse_token(tok.get<std::string>(), i));
            } catch (const ParseError& e) {
                throw ArchiveError(std::string("bad innings record in archive: ") + e.what());
            }
        }
        if (a.innings.empty()) throw ArchiveError("archive holds no innings");

        const auto& r = field(doc, "result");
        a.result.log_z = decode_real(field(r, "log_z"));
        a.result.log_z_err = decode_real(field(r, "log_z_err"));
        a.result.information = decode_real(field(r, "information"));
        a.result.n_iterations = field(r, "n_iterations").get<std::size_t>();
        a.result.n_particles = field(r, "n_particles").get<std::size_t>();
        const auto n_samples = field(r, "n_samples").get<std::size_t>();
        const auto& u = field(r, "u");
        const auto& ll = field(r, "log_like");
        const auto& lw = field(r, "log_weight");
        if (u.size() != n_samples || ll.size() != n_samples || lw.size() != n_samples) {
            throw ArchiveError("sample arrays disagree with n_samples; archive is incomplete");
        }
        const std::size_t dim = prior_dimension(a.innings.size());
        a.result.samples.resize(n_samples);
        for (std::size_t k = 0; k < n_samples; ++k) {
            auto& s = a.result.samples[k];
            if (u[k].size() != dim) throw ArchiveError("sample " + std::to_string(k) + " has the wrong dimension");
            s.u.reserve(dim);
            for (const auto& x : u[k]) s.u.push_back(decode_real(x));
            s.log_like = decode_real(ll[k]);
            s.log_weight = decode_real(lw[k]);
        }
        return a;
    } catch (const json::exception& e) {
        throw ArchiveError(std::string("archive has an unexpected layout: ") + e.what());
    }
}

void write_fit(const std::filesystem::path& path, const FitArchive& archive) {
    write_text(path, serialize_fit(archive));
}

FitArchive read_fit(const std::filesystem::path& path) {
    return deserialize_fit(read_text(path));
}

std::string emit_plot_data(const NuCurve& curve) {
    std::ostringstream out;
    out << "t\tmedian\tlow\thigh";
    for (std::size_t k = 0; k < curve.posterior_draws.size(); ++k) out << "\tdraw_" << (k + 1);
    out << '\n';
    for (std::size_t i = 0; i < curve.size(); ++i) {
        out << format_real(curve.t_values[i]) << '\t' << format_real(curve.median[i]) << '\t'
            << format_real(curve.band_low[i]) << '\t' << format_real(curve.band_high[i]);
        for (const auto& draw : curve.posterior_draws) out << '\t' << format_real(draw[i]);
        out << '\n';
    }
    return out.str();
}

std::string emit_plot_data(const Forecast& forecast) {
    return emit_plot_data(forecast.nu_pred);
}

std::string emit_plot_data(const Comparison& c, std::string_view player_a, std::string_view player_b) {
    std::ostringstream out;
    out << "key\tvalue\n";
    out << "player_a\t" << player_a << '\n';
    out << "player_b\t" << player_b << '\n';
    out << "expected_margin\t" << format_real(c.expected_margin) << '\n';
    out << "p_outscore\t" << format_real(c.p_outscore) << '\n';
    out << "p_tie\t" << format_real(c.p_tie) << '\n';
    out << "p_outscored\t" << format_real(c.p_outscored) << '\n';
    out << "pairs\t" << c.pairs << '\n';
    return out.str();
}

std::string emit_player_table(const std::vector<PlayerSummaryRow>& rows) {
    auto cell = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string("NA"); };
    std::string out = "player\tcareer_average\tpredicted_nu\n";
    for (const auto& r : rows) {
        out += r.player + '\t' + cell(r.career_average) + '\t' + cell(r.predicted_nu) + '\n';
    }
    return out;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
    return ss.str();
}

}  // namespace crease
