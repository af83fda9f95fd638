#include "hams/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <exception>
#include <iostream>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

namespace hams {

std::string SamplerSpec::label() const
{
    switch (kind) {
    case SamplerKind::HamsA: return "HAMS-A";
    case SamplerKind::HamsB: return "HAMS-B";
    case SamplerKind::HamsK: return "HAMS-" + std::to_string(k);
    case SamplerKind::MaBaoab: return "MA-BAOAB";
    case SamplerKind::MaAboba: return "MA-ABOBA";
    case SamplerKind::MaBp: return "MA-BP";
    }
    return "?";
}

bool SamplerSpec::is_hams() const
{
    return kind == SamplerKind::HamsA || kind == SamplerKind::HamsB || kind == SamplerKind::HamsK;
}

SamplerSpec parse_sampler(const std::string& name, int k)
{
    std::string s = name;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "hams-a")
        return {SamplerKind::HamsA, 0};
    if (s == "hams-b")
        return {SamplerKind::HamsB, 0};
    if (s == "hams-k") {
        if (k < 0)
            throw InvalidParams("hams-k needs k >= 0");
        return {SamplerKind::HamsK, k};
    }
    if (s.size() > 5 && s.rfind("hams-", 0) == 0) {
        const std::string tail = s.substr(5);
        if (std::all_of(tail.begin(), tail.end(), [](unsigned char c) { return std::isdigit(c); }))
            return {SamplerKind::HamsK, std::stoi(tail)};
    }
    if (s == "ma-baoab" || s == "baoab")
        return {SamplerKind::MaBaoab, 0};
    if (s == "ma-aboba" || s == "aboba")
        return {SamplerKind::MaAboba, 0};
    if (s == "ma-bp" || s == "bp")
        return {SamplerKind::MaBp, 0};
    throw InvalidParams("unknown sampler: " + name);
}

std::vector<SamplerSpec> standard_samplers()
{
    return {{SamplerKind::HamsA, 0},   {SamplerKind::HamsK, 1},   {SamplerKind::HamsK, 2},
            {SamplerKind::HamsK, 3},   {SamplerKind::HamsB, 0},   {SamplerKind::MaBaoab, 0},
            {SamplerKind::MaAboba, 0}, {SamplerKind::MaBp, 0}};
}

std::unique_ptr<Kernel> make_kernel(const SamplerSpec& spec, double epsilon, double eta,
                                    Tuning tuning)
{
    const bool fr = tuning == Tuning::Friction;
    auto ma = [&](MaKind kind) -> std::unique_ptr<Kernel> {
        if (fr)
            return std::make_unique<MaKernel>(MaKernel::with_friction(kind, epsilon, eta, spec.label()));
        return std::make_unique<MaKernel>(kind, epsilon, optimal_carryover(epsilon), spec.label());
    };
    switch (spec.kind) {
    case SamplerKind::HamsA:
        return std::make_unique<HamsKernel>(fr ? hams_a_coeffs(epsilon, eta) : hams_a_optimal(epsilon),
                                            spec.label());
    case SamplerKind::HamsB:
        return std::make_unique<HamsKernel>(fr ? hams_b_coeffs(epsilon, eta) : hams_b_optimal(epsilon),
                                            spec.label());
    case SamplerKind::HamsK:
        return std::make_unique<HamsKernel>(fr ? hams_k_friction_coeffs(epsilon, spec.k, eta)
                                               : hams_k_coeffs(epsilon, spec.k),
                                            spec.label());
    case SamplerKind::MaBaoab: return ma(MaKind::BAOAB);
    case SamplerKind::MaAboba: return ma(MaKind::ABOBA);
    case SamplerKind::MaBp: return ma(MaKind::BP);
    }
    throw InvalidParams("unknown sampler kind");
}

StepInfo guarded_step(Kernel& kernel, const TargetModel& target, ChainState& state, Rng& rng)
{
    try {
        return kernel.step(target, state, rng);
    } catch (const NonFinite&) {
        for (auto& v : state.u)
            v = -v;
        StepInfo info;
        info.accepted = false;
        info.delta_g = std::numeric_limits<double>::infinity();
        info.alpha = 0.0;
        return info;
    }
}

AutotuneResult autotune_epsilon(const KernelFactory& factory, const TargetModel& target,
                                ChainState& state, Rng& rng, const AutotuneOptions& opt)
{
    if (!(opt.target_rate > 0.0 && opt.target_rate < 1.0))
        throw InvalidParams("autotune target rate must lie in (0, 1)");
    if (!(opt.eps_min > 0.0 && opt.eps_min < opt.eps_max))
        throw InvalidParams("autotune needs 0 < eps_min < eps_max");
    if (opt.n_validate == 0)
        throw InvalidParams("autotune needs a validation run");

    const double lo = std::log(opt.eps_min), hi = std::log(opt.eps_max);
    double log_eps = std::clamp(std::log(opt.eps0), lo, hi);
    std::size_t t = 0;
    AutotuneResult res;

    auto adapt = [&](std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            ++t;
            auto kernel = factory(std::exp(log_eps));
            const StepInfo info = guarded_step(*kernel, target, state, rng);
            log_eps += std::pow(double(t), -0.7) * (info.alpha - opt.target_rate);
            log_eps = std::clamp(log_eps, lo, hi);
        }
        res.steps += n;
    };
    auto validate = [&]() {
        const double eps = std::exp(log_eps);
        auto kernel = factory(eps);
        const std::size_t window = std::max<std::size_t>(1, opt.n_validate / 5);
        double sum = 0.0;
        for (std::size_t i = 0; i < opt.n_validate; ++i) {
            const StepInfo info = guarded_step(*kernel, target, state, rng);
            if (i >= opt.n_validate - window)
                sum += info.alpha;
        }
        res.steps += opt.n_validate;
        res.epsilon = eps;
        res.validation_acceptance = sum / double(window);
        const double acc = res.validation_acceptance;
        res.at_clamp = (log_eps >= hi && acc > opt.target_rate) ||
                       (log_eps <= lo && acc < opt.target_rate);
        res.within_tolerance = std::abs(acc - opt.target_rate) <= opt.tolerance;
    };

    adapt(opt.n_adapt);
    validate();
    for (std::size_t r = 0; r < opt.max_retries && !res.within_tolerance && !res.at_clamp; ++r) {
        adapt(std::max<std::size_t>(opt.n_adapt / 2, 1));
        validate();
    }
    if (!res.at_clamp && std::abs(res.validation_acceptance - opt.target_rate) > opt.fail_margin)
        throw TuningFailed("trailing acceptance " + std::to_string(res.validation_acceptance) +
                           " misses target " + std::to_string(opt.target_rate));
    return res;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn)
{
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = unsigned(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

const DoubleWellTarget& double_well_model()
{
    static const DoubleWellTarget model(1.0);
    return model;
}

const Vec& double_well_truth()
{
    static const Vec truth = exact_bin_masses(double_well_model(), -2.0, 2.0, 16);
    return truth;
}

}  // namespace

DoubleWellRep run_double_well_rep(const SamplerSpec& spec, double epsilon, double eta,
                                  std::size_t burnin, std::size_t draws, Rng& rng,
                                  ChainRecord* chain)
{
    if (draws == 0)
        throw InvalidParams("double well needs draws >= 1");
    const TargetModel& target = double_well_model();
    auto kernel = make_kernel(spec, epsilon, eta, Tuning::Friction);
    ChainState s;
    s.x = {-1.0 + 2.0 * rng.uniform()};
    s.u = {-1.0 + 2.0 * rng.uniform()};
    for (std::size_t i = 0; i < burnin; ++i)
        guarded_step(*kernel, target, s, rng);
    Vec xs(draws), us(draws);
    std::size_t acc = 0;
    if (chain) {
        *chain = ChainRecord{};
        chain->k = 1;
    }
    for (std::size_t i = 0; i < draws; ++i) {
        const StepInfo info = guarded_step(*kernel, target, s, rng);
        xs[i] = s.x[0];
        us[i] = s.u[0];
        acc += info.accepted ? 1 : 0;
        if (chain)
            chain->push(s.x, s.u, info.accepted, info.delta_g);
    }
    DoubleWellRep rep;
    rep.temps = temperatures(xs, us, target, 1.0);
    rep.density_error = density_bin_error(xs, double_well_truth(), -2.0, 2.0);
    rep.acceptance = double(acc) / double(draws);
    return rep;
}

std::uint64_t double_well_stream(std::size_t eps_index, std::size_t sampler_index,
                                 std::size_t n_samplers)
{
    return 1 + eps_index * n_samplers + sampler_index;
}

std::vector<DoubleWellCell> run_double_well(const DoubleWellOptions& opt,
                                            const DoubleWellRepHook& hook)
{
    if (opt.reps == 0 || opt.samplers.empty() || opt.epsilons.empty())
        throw InvalidParams("double well needs reps, samplers and step sizes");
    (void)double_well_truth();
    const std::size_t ns = opt.samplers.size(), ne = opt.epsilons.size();
    const std::size_t cells = ne * ns;
    std::vector<DoubleWellRep> reps(cells * opt.reps);
    Vec times(cells * opt.reps, 0.0);
    std::mutex hook_mutex;
    parallel_for(cells * opt.reps, opt.threads, [&](std::size_t task) {
        const std::size_t cell = task / opt.reps, r = task % opt.reps;
        const std::size_t e = cell / ns, si = cell % ns;
        Rng rng(opt.seed + r, double_well_stream(e, si, ns));
        const auto start = Clock::now();
        reps[task] = run_double_well_rep(opt.samplers[si], opt.epsilons[e], opt.eta, opt.burnin,
                                         opt.draws, rng);
        times[task] = seconds_since(start);
        if (hook) {
            std::lock_guard<std::mutex> lock(hook_mutex);
            hook(e, si, r, reps[task]);
        }
    });

    std::vector<DoubleWellCell> out;
    out.reserve(cells);
    for (std::size_t cell = 0; cell < cells; ++cell) {
        DoubleWellCell c;
        c.sampler = opt.samplers[cell % ns];
        c.epsilon = opt.epsilons[cell / ns];
        c.reps = opt.reps;
        Vec t1, t2, tk;
        double dens = 0.0;
        for (std::size_t r = 0; r < opt.reps; ++r) {
            const auto& rep = reps[cell * opt.reps + r];
            t1.push_back(rep.temps.t_c1);
            t2.push_back(rep.temps.t_c2);
            tk.push_back(rep.temps.t_k);
            c.acceptance += rep.acceptance;
            dens += rep.density_error * rep.density_error;
            c.time_seconds += times[cell * opt.reps + r];
        }
        const double n = double(opt.reps);
        c.acceptance /= n;
        c.mean.t_c1 = std::accumulate(t1.begin(), t1.end(), 0.0) / n;
        c.mean.t_c2 = std::accumulate(t2.begin(), t2.end(), 0.0) / n;
        c.mean.t_k = std::accumulate(tk.begin(), tk.end(), 0.0) / n;
        c.rmse.t_c1 = rmse_over_reps(t1, 1.0);
        c.rmse.t_c2 = rmse_over_reps(t2, 1.0);
        c.rmse.t_k = rmse_over_reps(tk, 1.0);
        c.density_error = std::sqrt(dens / n);
        out.push_back(std::move(c));
    }
    return out;
}

namespace {

std::shared_ptr<const Whitener> make_whitener(const TargetModel& model, bool precondition)
{
    if (!precondition)
        return std::make_shared<Whitener>(identity_whitener(model.dim()));
    return std::make_shared<Whitener>(build_whitener_from_precision(preconditioner_precision(model)));
}

}  // namespace

LatentProblem make_latent_problem(LatentKind kind, Vec x_true, Vec y, bool precondition,
                                  std::size_t cox_m)
{
    LatentProblem p;
    p.kind = kind;
    if (kind == LatentKind::SV) {
        p.model = std::make_shared<SvModel>(y, SvParams{});
    } else {
        if (cox_m * cox_m != y.size())
            throw InvalidParams("cox observations must fill an m x m grid");
        CoxParams cp;
        cp.m = cox_m;
        p.model = std::make_shared<CoxModel>(y, cp);
    }
    p.whitener = make_whitener(*p.model, precondition);
    p.x_true = std::move(x_true);
    p.y = std::move(y);
    return p;
}

LatentProblem make_sv_problem(std::size_t t_len, std::uint64_t seed, bool precondition,
                              const SvParams& params)
{
    Rng rng(seed, 0);
    SvData d = simulate_sv(t_len, params, rng);
    LatentProblem p;
    p.kind = LatentKind::SV;
    p.model = std::make_shared<SvModel>(d.y, params);
    p.whitener = make_whitener(*p.model, precondition);
    p.x_true = std::move(d.x_true);
    p.y = std::move(d.y);
    return p;
}

LatentProblem make_cox_problem(std::size_t m, std::uint64_t seed, bool precondition,
                               CoxParams params)
{
    params.m = m;
    Rng rng(seed, 0);
    CoxData d = simulate_cox(params, rng);
    LatentProblem p;
    p.kind = LatentKind::Cox;
    p.model = std::make_shared<CoxModel>(d.y, params);
    p.whitener = make_whitener(*p.model, precondition);
    p.x_true = std::move(d.x_true);
    p.y = std::move(d.y);
    return p;
}

LatentRep run_latent_rep(const LatentProblem& problem, const SamplerSpec& spec,
                         const LatentOptions& opt, Rng& rng, ChainRecord* chain)
{
    if (opt.draws < 2)
        throw InvalidParams("latent runs need draws >= 2");
    const WhitenedTarget target(*problem.model, problem.whitener);
    const Whitener& w = *problem.whitener;
    const std::size_t n = target.dim();

    Vec x0(n);
    for (auto& v : x0)
        v = rng.normal();
    ChainState s;
    s.x = w.to_whitened(x0);
    s.u.resize(n);
    for (auto& v : s.u)
        v = rng.normal();

    LatentRep rep;
    const auto start = Clock::now();
    auto factory = [&](double e) { return make_kernel(spec, e, opt.eta, Tuning::Optimal); };
    if (opt.epsilon) {
        rep.epsilon = *opt.epsilon;
        auto kernel = factory(rep.epsilon);
        double sum = 0.0;
        for (std::size_t i = 0; i < opt.burnin; ++i)
            sum += guarded_step(*kernel, target, s, rng).alpha;
        rep.validation_acceptance = opt.burnin ? sum / double(opt.burnin) : 0.0;
    } else {
        if (opt.burnin < 10)
            throw InvalidParams("tuning epsilon needs burnin >= 10");
        AutotuneOptions ao;
        ao.target_rate = opt.target_rate;
        ao.n_validate = opt.burnin / 5;
        ao.n_adapt = opt.burnin - ao.n_validate;
        const AutotuneResult res = autotune_epsilon(factory, target, s, rng, ao);
        rep.epsilon = res.epsilon;
        rep.validation_acceptance = res.validation_acceptance;
    }

    auto kernel = factory(rep.epsilon);
    ChainRecord rec;
    rec.k = n;
    rec.draws.reserve(n * opt.draws);
    rec.momenta.reserve(n * opt.draws);
    rep.moments.assign(n, ChainMoments{});
    Vec xo = w.to_original(s.x);
    std::size_t acc = 0;
    for (std::size_t i = 0; i < opt.draws; ++i) {
        const StepInfo info = guarded_step(*kernel, target, s, rng);
        if (info.accepted) {
            xo = w.to_original(s.x);
            ++acc;
        }
        rec.push(xo, s.u, info.accepted, info.delta_g);
        for (std::size_t j = 0; j < n; ++j)
            rep.moments[j].add(xo[j]);
    }
    rep.time_seconds = seconds_since(start);
    rep.acceptance = double(acc) / double(opt.draws);

    Vec ess(n);
    for (std::size_t j = 0; j < n; ++j) {
        try {
            ess[j] = ess_bartlett(rec.coordinate(j), opt.ess_cutoff, j == 0);
        } catch (const ZeroVariance&) {
            ess[j] = 0.0;
        }
    }
    rep.ess1 = summarize(ess);
    if (chain)
        *chain = std::move(rec);
    return rep;
}

std::uint64_t latent_stream(std::size_t sampler_index) { return 1 + sampler_index; }

LatentSummary summarize_latent(const SamplerSpec& spec, std::vector<LatentRep> reps)
{
    if (reps.empty())
        throw InvalidParams("summary needs at least one rep");
    LatentSummary out;
    out.sampler = spec;
    const double m = double(reps.size());
    for (const auto& r : reps) {
        out.epsilon += r.epsilon / m;
        out.acceptance += r.acceptance / m;
        out.time_seconds += r.time_seconds / m;
        out.ess1.min += r.ess1.min / m;
        out.ess1.median += r.ess1.median / m;
        out.ess1.max += r.ess1.max / m;
    }
    if (reps.size() >= 2) {
        const std::size_t n = reps.front().moments.size();
        Vec ess2;
        std::vector<ChainMoments> col(reps.size());
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t r = 0; r < reps.size(); ++r)
                col[r] = reps[r].moments.at(j);
            try {
                ess2.push_back(ess_multichain(col));
            } catch (const DegenerateBetween&) {
                // identical chain means carry no between-chain information
            }
        }
        if (!ess2.empty())
            out.ess2 = summarize(ess2);
    }
    out.reps = std::move(reps);
    return out;
}

std::vector<LatentSummary> run_latent(const LatentProblem& problem, const LatentOptions& opt,
                                      std::size_t keep_chains, const LatentRepHook& hook)
{
    if (opt.reps == 0 || opt.samplers.empty())
        throw InvalidParams("latent runs need reps and samplers");
    const std::size_t ns = opt.samplers.size();
    std::vector<LatentRep> reps(ns * opt.reps);
    std::mutex hook_mutex;
    parallel_for(ns * opt.reps, opt.threads, [&](std::size_t task) {
        const std::size_t si = task / opt.reps, r = task % opt.reps;
        Rng rng(opt.seed + r, latent_stream(si));
        ChainRecord chain;
        const bool keep = r < keep_chains && hook;
        reps[task] = run_latent_rep(problem, opt.samplers[si], opt, rng, keep ? &chain : nullptr);
        reps[task].rep = r;
        if (hook) {
            std::lock_guard<std::mutex> lock(hook_mutex);
            hook(si, reps[task], keep ? &chain : nullptr);
        }
    });
    std::vector<LatentSummary> out;
    for (std::size_t si = 0; si < ns; ++si) {
        std::vector<LatentRep> mine(reps.begin() + std::ptrdiff_t(si * opt.reps),
                                    reps.begin() + std::ptrdiff_t((si + 1) * opt.reps));
        out.push_back(summarize_latent(opt.samplers[si], std::move(mine)));
    }
    return out;
}

}  // namespace hams
