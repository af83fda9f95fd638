#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hams/core.hpp"
#include "hams/diagnostics.hpp"
#include "hams/hams.hpp"
#include "hams/kernel.hpp"
#include "hams/metropolized.hpp"
#include "hams/precondition.hpp"
#include "hams/targets.hpp"

namespace hams {

enum class SamplerKind { HamsA, HamsB, HamsK, MaBaoab, MaAboba, MaBp };

struct SamplerSpec {
    SamplerKind kind = SamplerKind::HamsA;
    int k = 1;  // HAMS-k only

    // HAMS-A, HAMS-B, HAMS-<k>, MA-BAOAB, MA-ABOBA, MA-BP
    std::string label() const;
    bool is_hams() const;
};

// Accepts hams-a, hams-b, hams-k (with k), hams-<digit>, ma-baoab, ma-aboba, ma-bp
// and the bare integrator names baoab, aboba, bp.
SamplerSpec parse_sampler(const std::string& name, int k = 1);

// HAMS-A, HAMS-1, HAMS-2, HAMS-3, HAMS-B, MA-BAOAB, MA-ABOBA, MA-BP
std::vector<SamplerSpec> standard_samplers();

// Friction: every sampler follows a fixed friction eta (HAMS-B uses it as eta1).
// Optimal: spectral-radius defaults that leave epsilon as the only parameter.
enum class Tuning { Friction, Optimal };

std::unique_ptr<Kernel> make_kernel(const SamplerSpec& spec, double epsilon, double eta,
                                    Tuning tuning);

// kernel.step with a proposal whose potential overflows counted as a rejection
// (momentum negated, alpha = 0).
StepInfo guarded_step(Kernel& kernel, const TargetModel& target, ChainState& state, Rng& rng);

using KernelFactory = std::function<std::unique_ptr<Kernel>(double epsilon)>;

struct AutotuneOptions {
    double target_rate = 0.7;
    std::size_t n_adapt = 4000;
    std::size_t n_validate = 1000;
    double eps0 = 0.1;
    double eps_min = 1e-3;
    double eps_max = 0.999;
    double tolerance = 0.05;
    double fail_margin = 0.15;
    // extra adaptation rounds when the validation window misses by > tolerance
    std::size_t max_retries = 2;
};

struct AutotuneResult {
    double epsilon = 0.0;
    // acceptance over the trailing 20% of the final validation run
    double validation_acceptance = 0.0;
    bool at_clamp = false;
    bool within_tolerance = false;
    std::size_t steps = 0;
};

// Robbins-Monro on log epsilon driven by the per-step acceptance probability,
// then a fixed-epsilon validation run. Advances state in place. Throws
// TuningFailed when the trailing acceptance misses the target by more than
// fail_margin, unless epsilon sits at a clamp the target cannot pull it from.
AutotuneResult autotune_epsilon(const KernelFactory& factory, const TargetModel& target,
                                ChainState& state, Rng& rng, const AutotuneOptions& opt = {});

// Runs fn(i) for i in [0, n) on up to threads workers (0 = hardware count).
// The first exception by index is rethrown after all workers join.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

// ---- double well ----

struct DoubleWellOptions {
    Vec epsilons = {0.04, 0.08, 0.12, 0.16, 0.20, 0.24, 0.28, 0.32};
    double eta = 1.0;
    std::size_t reps = 200;
    std::size_t draws = 10000;
    std::size_t burnin = 0;
    std::uint64_t seed = 1;
    std::vector<SamplerSpec> samplers = standard_samplers();
    unsigned threads = 0;
};

struct DoubleWellRep {
    Temperatures temps;
    double density_error = 0.0;
    double acceptance = 0.0;
};

// One chain from (x, u) ~ U[-1, 1]^2. When chain is given it receives the draws.
DoubleWellRep run_double_well_rep(const SamplerSpec& spec, double epsilon, double eta,
                                  std::size_t burnin, std::size_t draws, Rng& rng,
                                  ChainRecord* chain = nullptr);

struct DoubleWellCell {
    SamplerSpec sampler;
    double epsilon = 0.0;
    std::size_t reps = 0;
    double acceptance = 0.0;
    Temperatures mean;
    Temperatures rmse;
    // root mean square over reps of the per-rep bin error
    double density_error = 0.0;
    double time_seconds = 0.0;
};

// Rep r of cell (e, s) uses Rng(seed + r, 1 + e * samplers + s).
std::uint64_t double_well_stream(std::size_t eps_index, std::size_t sampler_index,
                                 std::size_t n_samplers);

using DoubleWellRepHook = std::function<void(std::size_t eps_index, std::size_t sampler_index,
                                             std::size_t rep, const DoubleWellRep&)>;

std::vector<DoubleWellCell> run_double_well(const DoubleWellOptions& opt,
                                            const DoubleWellRepHook& hook = {});

// ---- latent-variable models ----

enum class LatentKind { SV, Cox };

struct LatentProblem {
    LatentKind kind = LatentKind::SV;
    std::shared_ptr<const TargetModel> model;
    std::shared_ptr<const Whitener> whitener;
    Vec x_true;
    Vec y;
};

// Data are simulated from Rng(seed, 0).
LatentProblem make_sv_problem(std::size_t t_len, std::uint64_t seed, bool precondition,
                              const SvParams& params = {});
LatentProblem make_cox_problem(std::size_t m, std::uint64_t seed, bool precondition,
                               CoxParams params = {});
// Uses the given observations instead of simulating.
LatentProblem make_latent_problem(LatentKind kind, Vec x_true, Vec y, bool precondition,
                                  std::size_t cox_m = 16);

struct LatentOptions {
    std::size_t reps = 20;
    std::size_t burnin = 5000;
    std::size_t draws = 5000;
    std::uint64_t seed = 1;
    // nullopt tunes epsilon during burn-in
    std::optional<double> epsilon;
    double target_rate = 0.7;
    double eta = 1.0;
    std::size_t ess_cutoff = default_ess_cutoff;
    std::vector<SamplerSpec> samplers = standard_samplers();
    unsigned threads = 0;
};

struct LatentRep {
    std::size_t rep = 0;
    double epsilon = 0.0;
    double validation_acceptance = 0.0;
    double acceptance = 0.0;
    double time_seconds = 0.0;
    EssSummary ess1;
    std::vector<ChainMoments> moments;
};

// One chain: x ~ N(0, I), u ~ N(0, I), burn-in with tuning, then draws. ESS
// and moments refer to the original coordinates; zero-variance coordinates
// get ESS 0.
LatentRep run_latent_rep(const LatentProblem& problem, const SamplerSpec& spec,
                         const LatentOptions& opt, Rng& rng, ChainRecord* chain = nullptr);

// Rep r of sampler s uses Rng(seed + r, 1 + s).
std::uint64_t latent_stream(std::size_t sampler_index);

struct LatentSummary {
    SamplerSpec sampler;
    std::vector<LatentRep> reps;
    double epsilon = 0.0;
    double acceptance = 0.0;
    double time_seconds = 0.0;
    // rep means of the per-rep min / median / max
    EssSummary ess1;
    // over coordinates; unset with fewer than two reps
    std::optional<EssSummary> ess2;
};

LatentSummary summarize_latent(const SamplerSpec& spec, std::vector<LatentRep> reps);

using LatentRepHook =
    std::function<void(std::size_t sampler_index, const LatentRep& rep, ChainRecord* chain)>;

// keep_chains: number of leading reps whose chains are handed to the hook.
std::vector<LatentSummary> run_latent(const LatentProblem& problem, const LatentOptions& opt,
                                      std::size_t keep_chains = 0,
                                      const LatentRepHook& hook = {});

}  // namespace hams
