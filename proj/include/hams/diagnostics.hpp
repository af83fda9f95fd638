#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hams/core.hpp"
#include "hams/targets.hpp"

namespace hams {

inline constexpr std::size_t default_ess_cutoff = 3000;

// Draws and momenta stored row-major (steps x k).
struct ChainRecord {
    std::size_t k = 0;
    std::vector<double> draws;
    std::vector<double> momenta;
    std::vector<std::uint8_t> accepted;
    Vec delta_g;

    std::size_t steps() const { return k == 0 ? 0 : draws.size() / k; }
    void push(const Vec& x, const Vec& u, bool acc, double dg);
    double acceptance_rate() const;
    Vec coordinate(std::size_t j) const;
    Vec momentum(std::size_t j) const;
};

// Single-chain ESS with a Bartlett-tapered sum of biased sample
// autocorrelations up to lag L. Shorter chains use L = n - 1 and, when
// warn is set, print a note to stderr.
double ess_bartlett(const Vec& series, std::size_t cutoff = default_ess_cutoff, bool warn = true);

struct EssSummary {
    double min = 0.0;
    double median = 0.0;
    double max = 0.0;
};
EssSummary summarize(Vec values);

// ESS over coordinates of a chain.
Vec ess_per_coordinate(const ChainRecord& chain, std::size_t cutoff = default_ess_cutoff);

// Running mean and centered sum of squares of one chain coordinate.
struct ChainMoments {
    std::size_t n = 0;
    double mean = 0.0;
    double ss = 0.0;

    void add(double v);
};

// n W / B from m chains of equal length n; throws DegenerateBetween if B ~ 0.
double ess_multichain(const std::vector<Vec>& chains);
double ess_multichain(const std::vector<ChainMoments>& chains);

struct Temperatures {
    double t_c1 = 0.0;
    double t_c2 = 0.0;
    double t_k = 0.0;
};

// Sample-mean estimators of E[x U'], E[U'^2] / E[U''] and E[u^2] for a
// univariate model, multiplied by scale (the model temperature when the
// model potential already includes the 1/T factor).
Temperatures temperatures(const Vec& xs, const Vec& us, const TargetModel& model,
                          double scale = 1.0);

// Mean absolute difference between empirical and exact masses of 16 equal
// bins on [-2, 2]; exact masses by adaptive quadrature normalized on [-10, 10].
double density_bin_error(const Vec& samples, const TargetModel& model);
// Same error against precomputed masses of equal bins on [lo, hi].
double density_bin_error(const Vec& samples, const Vec& truth, double lo, double hi);
Vec exact_bin_masses(const TargetModel& model, double lo = -2.0, double hi = 2.0,
                     std::size_t bins = 16);

double rmse_over_reps(const Vec& estimates, double truth);

void write_chain_csv(const std::string& path, const ChainRecord& chain);
ChainRecord read_chain_csv(const std::string& path);

}  // namespace hams
