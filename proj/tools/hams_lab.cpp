#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hams/diagnostics.hpp"
#include "hams/experiments.hpp"
#include "hams/integrators.hpp"
#include "hams/validation.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace hams;

namespace {

struct Common {
    std::uint64_t seed = 1;
    std::string epsilon;
    double eta = 1.0;
    int k = 1;
    std::vector<std::string> samplers;
    std::size_t reps = 0;
    std::size_t draws = 0;
    std::size_t burnin = 0;
    bool burnin_set = false;
    std::string out;
    bool full = false;
    unsigned threads = 0;
    std::size_t chains = 0;
};

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Flat key = value lines; '#' starts a comment; quotes around values are dropped.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw InvalidParams("cannot open config file " + path);
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidParams(path + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (val.size() >= 2 && val.front() == '"' && val.back() == '"')
            val = val.substr(1, val.size() - 2);
        std::replace(key.begin(), key.end(), '_', '-');
        out.emplace_back(key, val);
    }
    return out;
}

// Config entries become leading arguments of the subcommand, so flags given
// on the command line (parsed later, last value wins) override them.
std::vector<std::string> expand_config(std::vector<std::string> args)
{
    std::optional<std::string> path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
    }
    if (!path || args.size() < 2)
        return args;
    std::vector<std::string> injected;
    for (const auto& [key, val] : read_config(*path)) {
        if (val == "true") {
            injected.push_back("--" + key);
        } else if (val == "false") {
            continue;
        } else {
            injected.push_back("--" + key);
            injected.push_back(val);
        }
    }
    args.insert(args.begin() + 2, injected.begin(), injected.end());
    return args;
}

void add_common(CLI::App* sub, Common& c, bool runs)
{
    sub->add_option("--config", "flat key = value file; command-line flags win");
    sub->add_option("--seed", c.seed, "base seed; rep r uses seed + r");
    if (!runs)
        return;
    sub->add_option("--epsilon", c.epsilon, "step size, or auto to tune during burn-in");
    sub->add_option("--eta", c.eta, "friction");
    sub->add_option("--k", c.k, "k of hams-k");
    sub->add_option("--sampler", c.samplers, "sampler(s); default all eight")->delimiter(',');
    sub->add_option("--reps", c.reps, "repetitions");
    sub->add_option("--draws", c.draws, "draws per chain");
    sub->add_option("--burnin", c.burnin, "burn-in iterations");
    sub->add_option("--out", c.out, "output directory")->required();
    sub->add_flag("--full", c.full, "full-scale sizes");
    sub->add_option("--threads", c.threads, "worker threads (0 = all cores)");
    sub->add_option("--chains", c.chains, "write chain CSVs for the first N reps");
}

std::vector<SamplerSpec> resolve_samplers(const Common& c)
{
    if (c.samplers.empty())
        return standard_samplers();
    std::vector<SamplerSpec> out;
    for (const auto& s : c.samplers)
        out.push_back(parse_sampler(s, c.k));
    return out;
}

std::string slug(const std::string& label)
{
    std::string s = label;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
    return s;
}

std::string eps_tag(double e)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(4) << e;
    return os.str();
}

void write_text(const fs::path& p, const std::string& text)
{
    std::ofstream out(p);
    if (!out)
        throw InvalidParams("cannot write " + p.string());
    out << text;
}

json num_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Rep lines are appended as they finish and rewritten in sorted order at the end.
class RepLog {
public:
    RepLog(fs::path path, std::string header) : path_(std::move(path)), header_(std::move(header))
    {
        out_.open(path_);
        out_ << header_ << '\n';
        out_.flush();
    }

    void add(const std::string& key, const std::string& line)
    {
        std::lock_guard<std::mutex> lock(m_);
        out_ << line << '\n';
        out_.flush();
        lines_.emplace(key, line);
    }

    void finish()
    {
        out_.close();
        std::ofstream out(path_);
        out << header_ << '\n';
        for (const auto& [k, l] : lines_)
            out << l << '\n';
    }

private:
    fs::path path_;
    std::string header_;
    std::ofstream out_;
    std::mutex m_;
    std::map<std::string, std::string> lines_;
};

std::string pad(std::size_t v, int w = 6)
{
    std::ostringstream os;
    os << std::setw(w) << std::setfill('0') << v;
    return os.str();
}

int cmd_theory(const Common& c, const std::vector<double>& gammas, std::optional<double> a1,
               const std::vector<double>& ks, const std::string& out)
{
    (void)c;
    std::vector<TheoryRow> rows;
    if (a1) {
        for (double g : gammas)
            rows.push_back(theory_row_for_a1(*a1, g));
    } else {
        std::vector<double> eps = {0.05, 0.1, 0.2, 0.4, 0.8};
        if (!c.epsilon.empty())
            eps = {std::stod(c.epsilon)};
        rows = theory_table(eps, ks, gammas);
    }
    std::ostringstream os;
    write_theory_csv(os, rows);
    if (out.empty()) {
        std::cout << os.str();
    } else {
        fs::create_directories(out);
        write_text(fs::path(out) / "theory.csv", os.str());
    }
    return 0;
}

int cmd_match(const Common& c, const std::string& kind, const std::string& variant,
              double gamma, const std::string& out)
{
    std::vector<IntegratorKind> kinds;
    if (kind.empty() || kind == "all")
        kinds.assign(all_kinds().begin(), all_kinds().end());
    else
        kinds.push_back(parse_kind(kind));
    const double eps = c.epsilon.empty() ? 0.3 : std::stod(c.epsilon);
    std::vector<MatchRow> rows;
    for (auto k : kinds)
        rows.push_back(match_row(k, parse_variant(variant), eps, c.eta, gamma));
    std::ostringstream os;
    write_match_csv(os, rows);
    if (out.empty()) {
        std::cout << os.str();
    } else {
        fs::create_directories(out);
        write_text(fs::path(out) / "match.csv", os.str());
    }
    return 0;
}

int cmd_gaussian_validate(const Common& c)
{
    bool ok = true;
    for (const auto& r : gaussian_validate(c.seed)) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
        ok = ok && r.passed;
    }
    return ok ? 0 : 1;
}

int cmd_double_well(const Common& c)
{
    DoubleWellOptions opt;
    opt.eta = c.eta;
    opt.reps = c.reps ? c.reps : (c.full ? 3000 : 200);
    opt.draws = c.draws ? c.draws : 10000;
    opt.burnin = c.burnin;
    opt.seed = c.seed;
    opt.samplers = resolve_samplers(c);
    opt.threads = c.threads;
    if (!c.epsilon.empty()) {
        if (c.epsilon == "auto")
            throw InvalidParams("double well runs on a fixed step-size grid; auto is not supported");
        opt.epsilons = {std::stod(c.epsilon)};
    }
    const fs::path out(c.out);
    fs::create_directories(out);

    RepLog log(out / "reps.csv",
               "sampler,epsilon,rep,acceptance,t_c1,t_c2,t_k,density_error");
    auto hook = [&](std::size_t e, std::size_t s, std::size_t r, const DoubleWellRep& rep) {
        std::ostringstream os;
        os << std::setprecision(12) << opt.samplers[s].label() << ',' << opt.epsilons[e] << ','
           << r << ',' << rep.acceptance << ',' << rep.temps.t_c1 << ',' << rep.temps.t_c2 << ','
           << rep.temps.t_k << ',' << rep.density_error;
        log.add(pad(e) + pad(s) + pad(r, 9), os.str());
    };
    const auto cells = run_double_well(opt, hook);
    log.finish();

    if (c.chains > 0) {
        fs::create_directories(out / "chains");
        const std::size_t ns = opt.samplers.size();
        for (std::size_t e = 0; e < opt.epsilons.size(); ++e)
            for (std::size_t s = 0; s < ns; ++s)
                for (std::size_t r = 0; r < std::min(c.chains, opt.reps); ++r) {
                    Rng rng(opt.seed + r, double_well_stream(e, s, ns));
                    ChainRecord chain;
                    run_double_well_rep(opt.samplers[s], opt.epsilons[e], opt.eta, opt.burnin,
                                        opt.draws, rng, &chain);
                    write_chain_csv((out / "chains" /
                                     (slug(opt.samplers[s].label()) + "_eps" +
                                      eps_tag(opt.epsilons[e]) + "_rep" + pad(r) + ".csv"))
                                        .string(),
                                    chain);
                }
    }

    std::ostringstream csv;
    csv << "sampler,epsilon,reps,acceptance,t_c1,t_c2,t_k,t_c1_rmse,t_c2_rmse,t_k_rmse,"
           "density_error,time_seconds\n"
        << std::setprecision(10);
    json summary = json::array();
    for (const auto& cell : cells) {
        csv << cell.sampler.label() << ',' << cell.epsilon << ',' << cell.reps << ','
            << cell.acceptance << ',' << cell.mean.t_c1 << ',' << cell.mean.t_c2 << ','
            << cell.mean.t_k << ',' << cell.rmse.t_c1 << ',' << cell.rmse.t_c2 << ','
            << cell.rmse.t_k << ',' << cell.density_error << ',' << cell.time_seconds << '\n';
        json j;
        j["sampler"] = cell.sampler.label();
        j["epsilon"] = cell.epsilon;
        j["acceptance"] = cell.acceptance;
        j["ess1_min"] = nullptr;
        j["ess1_med"] = nullptr;
        j["ess1_max"] = nullptr;
        j["ess2_min"] = nullptr;
        j["time_seconds"] = cell.time_seconds;
        j["t_c1"] = cell.mean.t_c1;
        j["t_c2"] = cell.mean.t_c2;
        j["t_k"] = cell.mean.t_k;
        j["density_error"] = cell.density_error;
        j["t_c1_rmse"] = cell.rmse.t_c1;
        j["t_c2_rmse"] = cell.rmse.t_c2;
        j["t_k_rmse"] = cell.rmse.t_k;
        j["reps"] = cell.reps;
        j["draws"] = opt.draws;
        j["eta"] = opt.eta;
        j["seed"] = opt.seed;
        summary.push_back(j);
    }
    write_text(out / "double_well.csv", csv.str());
    write_text(out / "summary.json", summary.dump(2) + "\n");
    std::cout << csv.str();
    return 0;
}

int cmd_latent(const Common& c, LatentKind kind, std::size_t size, const std::string& data,
               bool no_precondition, std::size_t ess_cutoff, double target_rate)
{
    const bool sv = kind == LatentKind::SV;
    if (!sv && size == 0)
        size = c.full ? 64 : 16;
    if (sv && size == 0)
        size = c.full ? 1000 : 200;
    LatentProblem problem;
    if (!data.empty()) {
        Vec xt, y;
        read_data_csv(data, xt, y);
        problem = make_latent_problem(kind, xt, y, !no_precondition, sv ? 0 : size);
    } else {
        problem = sv ? make_sv_problem(size, c.seed, !no_precondition)
                     : make_cox_problem(size, c.seed, !no_precondition);
    }

    LatentOptions opt;
    opt.reps = c.reps ? c.reps : (c.full ? 50 : 20);
    opt.draws = c.draws ? c.draws : 5000;
    opt.burnin = c.burnin_set ? c.burnin : 5000;
    opt.seed = c.seed;
    opt.eta = c.eta;
    opt.target_rate = target_rate;
    opt.ess_cutoff = ess_cutoff;
    opt.samplers = resolve_samplers(c);
    opt.threads = c.threads;
    if (!c.epsilon.empty() && c.epsilon != "auto")
        opt.epsilon = std::stod(c.epsilon);

    const fs::path out(c.out);
    fs::create_directories(out);
    write_data_csv((out / "data.csv").string(), problem.x_true, problem.y);
    if (c.chains > 0)
        fs::create_directories(out / "chains");

    RepLog log(out / "reps.csv", "sampler,rep,epsilon,validation_acceptance,acceptance,"
                                 "time_seconds,ess1_min,ess1_med,ess1_max");
    auto hook = [&](std::size_t s, const LatentRep& rep, ChainRecord* chain) {
        const std::string label = opt.samplers[s].label();
        std::ostringstream os;
        os << std::setprecision(10) << label << ',' << rep.rep << ',' << rep.epsilon << ','
           << rep.validation_acceptance << ',' << rep.acceptance << ',' << rep.time_seconds << ','
           << rep.ess1.min << ',' << rep.ess1.median << ',' << rep.ess1.max;
        log.add(pad(s) + pad(rep.rep, 9), os.str());
        if (chain)
            write_chain_csv((out / "chains" / (slug(label) + "_rep" + pad(rep.rep) + ".csv")).string(),
                            *chain);
    };
    const auto sums = run_latent(problem, opt, c.chains, hook);
    log.finish();

    std::ostringstream csv;
    csv << "sampler,time_seconds,ess1_min,ess1_med,ess1_max,min_ess1_per_second,ess2_min,"
           "ess2_med,ess2_max,min_ess2_per_second,epsilon,acceptance\n"
        << std::setprecision(10);
    json summary = json::array();
    for (const auto& s : sums) {
        const double e2min = s.ess2 ? s.ess2->min : NAN;
        const double e2med = s.ess2 ? s.ess2->median : NAN;
        const double e2max = s.ess2 ? s.ess2->max : NAN;
        csv << s.sampler.label() << ',' << s.time_seconds << ',' << s.ess1.min << ','
            << s.ess1.median << ',' << s.ess1.max << ',' << s.ess1.min / s.time_seconds << ',';
        if (s.ess2)
            csv << e2min << ',' << e2med << ',' << e2max << ',' << e2min / s.time_seconds;
        else
            csv << ",,,";
        csv << ',' << s.epsilon << ',' << s.acceptance << '\n';
        json j;
        j["sampler"] = s.sampler.label();
        j["epsilon"] = s.epsilon;
        j["acceptance"] = s.acceptance;
        j["ess1_min"] = s.ess1.min;
        j["ess1_med"] = s.ess1.median;
        j["ess1_max"] = s.ess1.max;
        j["ess2_min"] = num_or_null(e2min);
        j["time_seconds"] = s.time_seconds;
        j["t_c1"] = nullptr;
        j["t_c2"] = nullptr;
        j["t_k"] = nullptr;
        j["density_error"] = nullptr;
        j["ess2_med"] = num_or_null(e2med);
        j["ess2_max"] = num_or_null(e2max);
        j["min_ess1_per_second"] = s.ess1.min / s.time_seconds;
        j["min_ess2_per_second"] = num_or_null(e2min / s.time_seconds);
        j["reps"] = s.reps.size();
        j["draws"] = opt.draws;
        j["burnin"] = opt.burnin;
        j["dim"] = problem.model->dim();
        j["seed"] = opt.seed;
        summary.push_back(j);
    }
    write_text(out / (sv ? "sv.csv" : "cox.csv"), csv.str());
    write_text(out / "summary.json", summary.dump(2) + "\n");
    std::cout << csv.str();
    return 0;
}

int cmd_simulate(const Common& c, LatentKind kind, std::size_t size, const std::string& path)
{
    Rng rng(c.seed, 0);
    if (kind == LatentKind::SV) {
        const SvData d = simulate_sv(size ? size : 200, SvParams{}, rng);
        write_data_csv(path, d.x_true, d.y);
    } else {
        CoxParams p;
        p.m = size ? size : 16;
        const CoxData d = simulate_cox(p, rng);
        write_data_csv(path, d.x_true, d.y);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"hams-lab: HAMS samplers, analytic tables and benchmark runs"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);

    Common c;
    std::vector<double> gammas = {2.0};
    std::vector<double> ks = {0, 1, 2, 3};
    double a1 = 0.0;
    std::string table_out, kind, variant = "modified";
    double match_gamma = 1.5;
    std::size_t size = 0, ess_cutoff = default_ess_cutoff;
    std::string data, sim_out;
    bool no_pre = false;
    double target_rate = 0.7;

    auto* theory = app.add_subcommand("theory", "analytic table: coefficients, Var(x), E[dG], E[alpha], radius");
    add_common(theory, c, false);
    theory->add_option("--epsilon", c.epsilon, "single step size (default grid)");
    theory->add_option("--k", ks, "k values")->delimiter(',');
    theory->add_option("--gamma", gammas, "target precision(s)")->delimiter(',');
    auto* a1_opt = theory->add_option("--a1", a1, "tabulate a bare a1 instead of (epsilon, k)");
    theory->add_option("--out", table_out, "output directory (default stdout)");

    auto* match = app.add_subcommand("match", "integrator-to-HAMS matching report");
    add_common(match, c, false);
    match->add_option("--kind", kind, "gjf, baoab, aboba, il, bp, vec, spv, mannella or all");
    match->add_option("--variant", variant, "modified or raw");
    match->add_option("--epsilon", c.epsilon, "step size (default 0.3)");
    match->add_option("--eta", c.eta, "friction");
    match->add_option("--gamma", match_gamma, "target precision");
    match->add_option("--out", table_out, "output directory (default stdout)");

    auto* gv = app.add_subcommand("gaussian-validate", "Gaussian invariant suites; nonzero exit on failure");
    add_common(gv, c, false);

    auto* dw = app.add_subcommand("double-well", "double-well temperature and density study");
    add_common(dw, c, true);

    auto* sv = app.add_subcommand("sv", "stochastic-volatility latent sampling");
    auto* cox = app.add_subcommand("cox", "log-Gaussian Cox latent sampling");
    for (auto* sub : {sv, cox}) {
        add_common(sub, c, true);
        sub->add_option("--data", data, "observations CSV (index, x_true, y) instead of simulating");
        sub->add_flag("--no-precondition", no_pre, "sample the raw target");
        sub->add_option("--ess-cutoff", ess_cutoff, "Bartlett cutoff L");
        sub->add_option("--target-rate", target_rate, "autotune acceptance target");
    }
    sv->add_option("--len", size, "series length (default 200, 1000 with --full)");
    cox->add_option("--m", size, "grid side (default 16, 64 with --full)");

    auto* ssv = app.add_subcommand("simulate-sv", "simulate SV observations to CSV");
    auto* scox = app.add_subcommand("simulate-cox", "simulate Cox observations to CSV");
    for (auto* sub : {ssv, scox}) {
        add_common(sub, c, false);
        sub->add_option("--out", sim_out, "output CSV")->required();
    }
    ssv->add_option("--len", size, "series length");
    scox->add_option("--m", size, "grid side");

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args.insert(args.begin(), argv[0]);
        args = expand_config(args);
        std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        for (auto* sub : {dw, sv, cox})
            if (sub->parsed())
                c.burnin_set = sub->get_option("--burnin")->count() > 0;
        if (theory->parsed())
            return cmd_theory(c, gammas, a1_opt->count() ? std::optional<double>(a1) : std::nullopt,
                              ks, table_out);
        if (match->parsed())
            return cmd_match(c, kind, variant, match_gamma, table_out);
        if (gv->parsed())
            return cmd_gaussian_validate(c);
        if (dw->parsed())
            return cmd_double_well(c);
        if (sv->parsed())
            return cmd_latent(c, LatentKind::SV, size, data, no_pre, ess_cutoff, target_rate);
        if (cox->parsed()) {
            if (size > 16 && !c.full)
                throw InvalidParams("cox grids beyond m = 16 need --full");
            return cmd_latent(c, LatentKind::Cox, size, data, no_pre, ess_cutoff, target_rate);
        }
        if (ssv->parsed())
            return cmd_simulate(c, LatentKind::SV, size, sim_out);
        if (scox->parsed())
            return cmd_simulate(c, LatentKind::Cox, size, sim_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
