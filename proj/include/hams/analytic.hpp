#pragma once

#include <array>

#include "hams/hams.hpp"
#include "hams/integrators.hpp"
#include "hams/metropolized.hpp"

namespace hams {

// VAR(1) form of the HAMS proposal under a univariate Gaussian with precision gamma.
LinearKernel var_kernel(const HamsCoeffs& coeffs, double gamma);

// Stationary covariance V = M V M^T + S of a LinearKernel, row-major 2x2.
// Throws Degenerate when the 3x3 linear system is singular.
std::array<double, 4> lyapunov_stationary(const LinearKernel& k);

// (a1 - 2) / (gamma (a1 gamma - 2))
double stationary_variance_closed(double a1, double gamma);

// a1^3 gamma (gamma - 1)^2 / (2 (2 - a1))
double expected_delta_g(double a1, double gamma);
// 1 - (2/pi) arctan(sqrt(E[dG] / 2))
double acceptance_from_delta_g(double mean_delta_g);
double expected_acceptance(double a1, double gamma);

double expected_delta_g_ma(MaKind kind, double epsilon, double eta, double gamma);
double expected_acceptance_ma(MaKind kind, double epsilon, double eta, double gamma);

// Largest eigenvalue modulus of the VAR matrix at gamma = 1.
double spectral_radius(const HamsCoeffs& coeffs);

struct RadiusOptimum {
    double free_coord = 0.0;  // a3* for optimal_a3, a1* for optimal_a1
    double a2 = 0.0;
    double rho_min = 0.0;
};

// Minimizes the radius over (a2, a3) with a1 and nu = a2^2 / a3 fixed.
// Requires 0 < a1 < 2 and nu <= a1 <= 1 + nu.
RadiusOptimum optimal_a3(double a1, double nu);
// Minimizes over (a1, a2) with a3 and nu~ = a2^2 / (2 - a1) fixed.
// Requires 0 < a3 < 2 and nu~ <= 2 - a3 <= 1 + nu~.
RadiusOptimum optimal_a1(double a3, double nu_tilde);

// Friction implied by the radius optimum: eta2 for HAMS-A, eta1 for HAMS-B.
double implied_eta2_hams_a(double epsilon);
double implied_eta1_hams_b(double epsilon);

// P[X > 0, Y > 0] for standard bivariate normal with correlation tau.
double quadrant_probability(double tau);

}  // namespace hams
