#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "hams/analytic.hpp"
#include "hams/hams.hpp"
#include "hams/integrators.hpp"
#include "hams/matching.hpp"

namespace hams {

// One row of the analytic table. epsilon and k are NaN for rows given by a1.
struct TheoryRow {
    double epsilon = 0.0;
    double k = 0.0;
    double gamma = 1.0;
    HamsCoeffs coeffs;
    double var_x = 0.0;
    double expected_delta_g = 0.0;
    double expected_acceptance = 0.0;
    double rho_min = 0.0;
};

// HAMS-k coefficients at the radius optimum (k = 0 is HAMS-A) for every
// (epsilon, k, gamma) combination.
std::vector<TheoryRow> theory_table(const Vec& epsilons, const Vec& ks, const Vec& gammas);

// Row for a bare a1, completed with the singular-A optimum a3 = (sqrt2 - sqrt a1)^2.
TheoryRow theory_row_for_a1(double a1, double gamma);

void write_theory_csv(std::ostream& os, const std::vector<TheoryRow>& rows);

struct MatchRow {
    IntegratorKind kind = IntegratorKind::GJF;
    Variant variant = Variant::Modified;
    double epsilon = 0.0;
    double eta = 0.0;
    double gamma = 1.0;
    MatchReport report;
    // Covariance-gap ratio for VEC and the shifted kinds, phi-gap ratio for
    // GJF, BAOAB and IL, NaN for BP (exact in both).
    double order_ratio = 0.0;
};

MatchRow match_row(IntegratorKind kind, Variant variant, double epsilon, double eta, double gamma);

void write_match_csv(std::ostream& os, const std::vector<MatchRow>& rows);

struct SuiteResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

// N(0, I) in five dimensions, HAMS-A, HAMS-B and HAMS-1/2/3 presets at
// eps in {0.1, 0.5, 0.9}: max |dG| over steps <= 1e-9.
SuiteResult suite_rejection_free(std::uint64_t seed, std::size_t steps = 10000);

// Random coefficients, states and noise: the forward map at (x*, -u*) with
// noise -Z* returns (x0, -u0) within 1e-12 relative.
SuiteResult suite_involution(std::uint64_t seed, std::size_t cases = 1000);

// Proposal-only chain at gamma = 2, a1 = 0.2 matches the closed-form variance
// within 4 batch-means standard errors; Lyapunov grid agrees within 1e-10.
SuiteResult suite_stationary_variance(std::uint64_t seed, std::size_t steps = 1000000);

// Metropolized chain at gamma = 2 (a3 = 1, a2 = sqrt(a1) / 2) reproduces the
// expected acceptance within 0.005 for a1 in {0.2, 0.5, 1.0}.
SuiteResult suite_acceptance_identity(std::uint64_t seed, std::size_t steps = 1000000);

std::vector<SuiteResult> gaussian_validate(std::uint64_t seed);

}  // namespace hams
