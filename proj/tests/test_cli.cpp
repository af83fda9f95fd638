#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "hams/analytic.hpp"
#include "hams/experiments.hpp"

using namespace hams;
namespace fs = std::filesystem;

namespace {

std::string lab_path()
{
#ifdef HAMS_LAB_PATH
    return HAMS_LAB_PATH;
#else
    const char* p = std::getenv("HAMS_LAB_PATH");
    return p ? p : "hams-lab";
#endif
}

int run(const std::string& args, const fs::path& log)
{
    const std::string cmd = "\"" + lab_path() + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int rc = std::system(cmd.c_str());
    return rc == -1 ? -1 : WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// CSV rows with every column whose header mentions time removed.
std::vector<std::vector<std::string>> csv_without_time(const fs::path& p)
{
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    std::vector<bool> keep;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            cells.push_back(cell);
        if (keep.empty())
            for (const auto& h : cells)
                keep.push_back(h.find("time") == std::string::npos);
        std::vector<std::string> kept;
        for (std::size_t i = 0; i < cells.size(); ++i)
            if (i >= keep.size() || keep[i])
                kept.push_back(cells[i]);
        rows.push_back(kept);
    }
    return rows;
}

fs::path scratch(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("hams_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// eps with E[alpha] = target for a one-dimensional MA-BP chain, by bisection.
double bp_epsilon_for(double target, double gamma)
{
    double lo = 1e-3, hi = 1.9 / std::sqrt(gamma);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double a = 1 - 2 / M_PI * std::atan(std::sqrt(gamma * gamma * gamma * std::pow(mid, 6) / 64));
        (a > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("cli")
{
    TEST_CASE("sampler names")
    {
        CHECK(parse_sampler("hams-a").label() == "HAMS-A");
        CHECK(parse_sampler("hams-b").label() == "HAMS-B");
        CHECK(parse_sampler("hams-2").label() == "HAMS-2");
        CHECK(parse_sampler("hams-k", 3).label() == "HAMS-3");
        CHECK(parse_sampler("bp").label() == "MA-BP");
        CHECK(parse_sampler("ma-aboba").label() == "MA-ABOBA");
        CHECK(parse_sampler("hams-a").is_hams());
        CHECK_FALSE(parse_sampler("ma-baoab").is_hams());
        CHECK_THROWS(parse_sampler("nuts"));

        const auto all = standard_samplers();
        REQUIRE(all.size() == 8);
        std::vector<std::string> labels;
        for (const auto& s : all)
            labels.push_back(s.label());
        CHECK(labels == std::vector<std::string>{"HAMS-A", "HAMS-1", "HAMS-2", "HAMS-3", "HAMS-B",
                                                 "MA-BAOAB", "MA-ABOBA", "MA-BP"});
    }

    TEST_CASE("autotune climbs to the clamp on a rejection-free target")
    {
        GaussianTarget g(1.0, 3);
        const auto spec = parse_sampler("hams-1");
        KernelFactory f = [&](double eps) { return make_kernel(spec, eps, 1.0, Tuning::Optimal); };
        Rng rng(1);
        ChainState s{{0.1, 0.2, 0.3}, {0.0, 0.0, 0.0}};
        const auto r = autotune_epsilon(f, g, s, rng);
        CHECK(r.at_clamp);
        CHECK(r.epsilon == doctest::Approx(0.999));
    }

    TEST_CASE("autotune reaches the target acceptance")
    {
        GaussianTarget g(2.0, 10);
        const auto spec = parse_sampler("hams-a");
        KernelFactory f = [&](double eps) { return make_kernel(spec, eps, 1.0, Tuning::Optimal); };
        Rng rng(2);
        ChainState s{Vec(10, 0.0), Vec(10, 0.0)};
        AutotuneOptions opt;
        opt.n_adapt = 8000;
        opt.n_validate = 4000;
        const auto r = autotune_epsilon(f, g, s, rng, opt);
        CHECK_FALSE(r.at_clamp);
        CHECK(std::fabs(r.validation_acceptance - 0.7) < 0.05);
    }

    TEST_CASE("autotuned MA-BP step agrees with the closed-form inversion")
    {
        // at gamma = 4 the 70% step sits inside the clamp range
        const double gamma = 4.0;
        GaussianTarget g(gamma, 1);
        const auto spec = parse_sampler("ma-bp");
        KernelFactory f = [&](double eps) { return make_kernel(spec, eps, 1.0, Tuning::Friction); };
        const double truth = bp_epsilon_for(0.7, gamma);
        CHECK(expected_acceptance_ma(MaKind::BP, truth, 1.0, gamma) == doctest::Approx(0.7).epsilon(1e-6));
        Vec got;
        for (std::uint64_t seed = 3; seed < 8; ++seed) {
            Rng rng(seed);
            ChainState s{{rng.normal() / std::sqrt(gamma)}, {rng.normal()}};
            AutotuneOptions opt;
            opt.n_adapt = 40000;
            opt.n_validate = 10000;
            got.push_back(autotune_epsilon(f, g, s, rng, opt).epsilon);
        }
        const double med = summarize(got).median;
        CHECK(std::fabs(med - truth) < 0.1 * truth);
    }

    TEST_CASE("parallel_for covers every index and rethrows")
    {
        std::vector<std::atomic<int>> hits(1000);
        parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
        for (const auto& h : hits)
            CHECK(h.load() == 1);
        CHECK_THROWS_AS(parallel_for(100, 4,
                                     [](std::size_t i) {
                                         if (i == 37)
                                             throw std::runtime_error("boom");
                                     }),
                        std::runtime_error);
    }

    TEST_CASE("double-well reps are reproducible")
    {
        for (const auto& spec : standard_samplers()) {
            Rng r1(5, 3), r2(5, 3);
            const auto a = run_double_well_rep(spec, 0.12, 1.0, 0, 2000, r1);
            const auto b = run_double_well_rep(spec, 0.12, 1.0, 0, 2000, r2);
            CHECK(a.temps.t_c1 == b.temps.t_c1);
            CHECK(a.acceptance == b.acceptance);
            CHECK(a.density_error == b.density_error);
        }
    }

    TEST_CASE("binary: double-well output is deterministic")
    {
        const auto d1 = scratch("dw1"), d2 = scratch("dw2");
        const std::string args =
            "double-well --epsilon 0.1 --reps 4 --draws 500 --sampler hams-a,ma-bp --threads 2 --out ";
        REQUIRE(run(args + "\"" + d1.string() + "\"", d1 / "log.txt") == 0);
        REQUIRE(run(args + "\"" + d2.string() + "\"", d2 / "log.txt") == 0);
        const auto a = csv_without_time(d1 / "double_well.csv");
        CHECK(a.size() == 3);
        CHECK(a == csv_without_time(d2 / "double_well.csv"));
        CHECK(csv_without_time(d1 / "reps.csv") == csv_without_time(d2 / "reps.csv"));
        CHECK(fs::exists(d1 / "summary.json"));
    }

    TEST_CASE("binary: config file with flags taking precedence")
    {
        const auto d = scratch("cfg");
        {
            std::ofstream cfg(d / "run.cfg");
            cfg << "# small run\nepsilon = 0.1\nreps = 3\ndraws = 300\nsampler = \"hams-a\"\n";
        }
        const auto out = d / "out";
        REQUIRE(run("double-well --config \"" + (d / "run.cfg").string() + "\" --reps 2 --out \"" +
                        out.string() + "\"",
                    d / "log.txt") == 0);
        const auto rows = csv_without_time(out / "double_well.csv");
        REQUIRE(rows.size() == 2);
        CHECK(rows[1][0] == "HAMS-A");
        CHECK(rows[1][2] == "2");
    }

    TEST_CASE("binary: analytic and matching tables")
    {
        const auto d = scratch("tables");
        REQUIRE(run("theory --gamma 2 --a1 0.2", d / "theory.txt") == 0);
        const std::string t = slurp(d / "theory.txt");
        CHECK(t.find(",0.5625,") != std::string::npos);
        CHECK(t.find(",0.97001") != std::string::npos);
        REQUIRE(run("match --kind bp --epsilon 0.3", d / "match.txt") == 0);
        CHECK(slurp(d / "match.txt").find("\nBP,modified,0.3,1,1.5,") != std::string::npos);
        CHECK(run("match --kind nope", d / "bad.txt") != 0);
    }

    TEST_CASE("binary: gaussian-validate passes")
    {
        const auto d = scratch("gv");
        CHECK(run("gaussian-validate --seed 7", d / "gv.txt") == 0);
        const std::string t = slurp(d / "gv.txt");
        CHECK(t.find("FAIL") == std::string::npos);
    }
}
