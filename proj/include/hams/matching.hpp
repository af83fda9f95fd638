#pragma once

#include "hams/hams.hpp"
#include "hams/integrators.hpp"

namespace hams {

// HAMS coefficients reproducing the modified GJF, BAOAB, IL, BP or VEC update
// (phi is the integrator's own gradient coefficient, not the HAMS default).
HamsCoeffs hams_coeffs_for(IntegratorKind kind, double epsilon, double eta);

// Shifted HAMS coefficients for modified ABOBA, SPV or Mannella's leapfrog.
ShiftedHamsCoeffs shifted_coeffs_for(IntegratorKind kind, double epsilon, double eta);

bool is_shifted_kind(IntegratorKind kind);

struct MatchReport {
    // max |M_integrator - M_hams|
    double drift_diff = 0.0;
    // max |S_integrator - S_hams|
    double cov_diff = 0.0;
    // |phi - a2 / (2 - a1)|, zero for shifted kinds
    double phi_diff = 0.0;
    // |b - eps / 2|, zero for unshifted kinds
    double b_diff = 0.0;
};

MatchReport verify_match(IntegratorKind kind, Variant variant, double epsilon, double eta,
                         double gamma);

// cov_diff at eps divided by cov_diff at eps / 2 (modified variant).
double cov_order_ratio(IntegratorKind kind, double epsilon, double eta, double gamma);
// phi_diff at eps divided by phi_diff at eps / 2.
double phi_order_ratio(IntegratorKind kind, double epsilon, double eta);

}  // namespace hams
