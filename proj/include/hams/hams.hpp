#pragma once

#include <array>
#include <string>

#include "hams/core.hpp"
#include "hams/kernel.hpp"
#include "hams/targets.hpp"

namespace hams {

// Scalars of the block matrix A = [[a1, a2], [a2, a3]] (times identity) and
// the gradient-correction coefficient phi of the momentum update.
struct HamsCoeffs {
    double a1 = 0.0;
    double a2 = 0.0;
    double a3 = 0.0;
    double phi = 0.0;
};

// Checks 0 <= A <= 2I up to tol; throws InvalidParams otherwise.
void validate(const HamsCoeffs& c, double tol = 1e-12);
bool is_valid(const HamsCoeffs& c, double tol = 1e-12);

// Per-coordinate covariance 2A - A^2 of the noise pair.
Cov2x2 noise_cov(const HamsCoeffs& c);

double default_phi(double a1, double a2);
bool has_default_phi(const HamsCoeffs& c);

struct SdeParams {
    double epsilon = 0.0;
    double c1 = 1.0;
    double c2 = 1.0;
};

// exp(-eta * epsilon / 2)
inline double carryover(double eta, double epsilon) { return std::exp(-0.5 * eta * epsilon); }

HamsCoeffs coeffs_from_sde(const SdeParams& p);

HamsCoeffs hams_a_coeffs(double epsilon, double eta2);
HamsCoeffs hams_b_coeffs(double epsilon, double eta1);
// c1 = exp(-k eps^2 / 2) with c2 at the spectral-radius optimum, floored at 1/2.
HamsCoeffs hams_k_coeffs(double epsilon, double k);
// c1 = exp(-k eps^2 / 2) with c2 = exp(-eta2 eps / 2).
HamsCoeffs hams_k_friction_coeffs(double epsilon, double k, double eta2);
// HAMS-A / HAMS-B at the spectral-radius optimum for their singular family.
HamsCoeffs hams_a_optimal(double epsilon);
HamsCoeffs hams_b_optimal(double epsilon);

// c2 of the HAMS-A optimum, (sqrt2 - sqrt(a1))^2 / (1 + sqrt(1 - eps^2)).
double optimal_carryover(double epsilon);

struct ProposalOutcome {
    PhaseState proposed;
    NoisePair z_forward;
    NoisePair z_backward;
    double delta_g = 0.0;
    double log_ratio = 0.0;
};

// Deterministic part of the proposal given explicit noise.
ProposalOutcome propose_with_noise(const TargetModel& target, const PhaseState& state,
                                   const HamsCoeffs& coeffs, const NoisePair& z);

ProposalOutcome propose(const TargetModel& target, const PhaseState& state,
                        const HamsCoeffs& coeffs, Rng& rng);

// Closed-form difference of G valid for phi = a2 / (2 - a1).
double delta_g_default(const TargetModel& target, const Vec& x0, const Vec& u0, const Vec& z1,
                       const Vec& grad0, const Vec& xstar, const Vec& gradstar, double a1,
                       double a2);

// Same formula with the potentials supplied.
double delta_g_default_from(double u0_pot, double ustar_pot, const Vec& u0, const Vec& z1,
                            const Vec& grad0, const Vec& gradstar, double a1, double a2);

// G(x*, u*, Z*) - G(x0, u0, Z0) with G = H + Z^T (2A - A^2)^{-1} Z / 2.
double delta_g_general(const TargetModel& target, const PhaseState& initial,
                       const ProposalOutcome& outcome, const HamsCoeffs& coeffs);

// One full accept/reject step; evaluates the gradient at the current state.
StepInfo step(const TargetModel& target, PhaseState& state, const HamsCoeffs& coeffs, Rng& rng);

// Cached-gradient HAMS kernel. With the default phi the update follows the
// accepted-momentum form, so a step costs one potential+gradient evaluation.
class HamsKernel : public Kernel {
public:
    explicit HamsKernel(HamsCoeffs coeffs, std::string label = "hams");

    StepInfo step(const TargetModel& target, ChainState& state, Rng& rng) override;
    std::string name() const override { return label_; }

    const HamsCoeffs& coeffs() const { return c_; }

private:
    HamsCoeffs c_;
    Factor2x2 factor_;
    bool default_phi_;
    std::string label_;
    Vec z1_, z2_, xi_, xs_, gs_, xt_;
};

struct ShiftedHamsCoeffs {
    double a1 = 0.0;
    double a2 = 0.0;
    double a3 = 0.0;
    double b = 0.0;
};

// A * [[1, b], [0, 1]] as a row-major 2x2.
std::array<double, 4> shifted_a_tilde(const ShiftedHamsCoeffs& sc);

PhaseState shifted_propose_with_noise(const TargetModel& target, const PhaseState& state,
                                      const ShiftedHamsCoeffs& sc, const NoisePair& z);

PhaseState shifted_propose(const TargetModel& target, const PhaseState& state,
                           const ShiftedHamsCoeffs& sc, Rng& rng);

}  // namespace hams
