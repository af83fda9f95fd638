#pragma once

#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <valarray>

#include "hams/core.hpp"
#include "hams/hams.hpp"
#include "hams/targets.hpp"

namespace hams {

enum class IntegratorKind { GJF, BAOAB, ABOBA, IL, BP, VEC, SPV, MANNELLA };

// Raw is the update as published; Modified is the rescaled/modified form that
// lines up with (shifted) HAMS.
enum class Variant { Raw, Modified };

std::string to_string(IntegratorKind kind);
std::string to_string(Variant variant);
IntegratorKind parse_kind(const std::string& s);
Variant parse_variant(const std::string& s);
const std::array<IntegratorKind, 8>& all_kinds();

// Exact one-step conditional law under U(x) = gamma x^2 / 2, per coordinate:
// (x*, u*) = M (x0, u0) + noise with covariance S. Both row-major.
struct LinearKernel {
    std::array<double, 4> M{};
    std::array<double, 4> S{};
};

// Affine function of (x0, u0, n1..n4) with n_k iid standard normal. Running an
// update on this type under a linear gradient yields its LinearKernel.
struct Affine {
    static constexpr std::size_t size = 6;
    std::array<double, size> c{};

    static Affine basis(std::size_t i)
    {
        Affine a;
        a.c[i] = 1.0;
        return a;
    }
};

inline Affine operator+(Affine a, const Affine& b)
{
    for (std::size_t i = 0; i < Affine::size; ++i)
        a.c[i] += b.c[i];
    return a;
}
inline Affine operator-(Affine a, const Affine& b)
{
    for (std::size_t i = 0; i < Affine::size; ++i)
        a.c[i] -= b.c[i];
    return a;
}
inline Affine operator-(Affine a)
{
    for (auto& v : a.c)
        v = -v;
    return a;
}
inline Affine operator*(double s, Affine a)
{
    for (auto& v : a.c)
        v *= s;
    return a;
}
inline Affine operator*(Affine a, double s) { return s * a; }

namespace detail {

void check_step_params(IntegratorKind kind, Variant variant, double eps, double eta);

// (1 - exp(-eta eps)) / eta, equal to eps at eta = 0.
inline double friction_gain(double eta, double eps)
{
    return eta > 0.0 ? -std::expm1(-eta * eps) / eta : eps;
}

// Position half-step coefficient b of modified SPV.
double spv_shift(double eps, double eta);

// eps / (1 + sqrt(1 - eps^2)) = (1 - sqrt(1 - eps^2)) / eps
inline double half_step_modified(double eps) { return eps / (1.0 + std::sqrt(1.0 - eps * eps)); }

// One update of (x, u) in place. grad(v) returns the gradient at v and
// noise() a fresh standard normal of the same shape, drawn in the order the
// update consumes them.
template <class V, class Grad, class Noise>
void advance(IntegratorKind kind, Variant variant, double eps, double eta, V& x, V& u,
             const Grad& grad, Noise& noise)
{
    const bool mod = variant == Variant::Modified;
    const double c = std::exp(-eta * eps);
    switch (kind) {
    case IntegratorKind::GJF: {
        const double d = 2.0 + eta * eps;
        const double r = mod ? std::sqrt(4.0 - eps * eps) : 2.0;
        const V g0 = grad(x);
        const V w = std::sqrt(2.0 * eta * eps) * noise();
        const V xs = x - (eps * eps / d) * g0 + (eps * r / d) * u + (eps / d) * w;
        const V gs = grad(xs);
        const V us = ((2.0 - eta * eps) / d) * u + ((eta * eps * eps - 2.0 * eps) / (r * d)) * g0
                     - (eps / r) * gs + (4.0 / (r * d)) * w;
        x = xs;
        u = us;
        return;
    }
    case IntegratorKind::BAOAB: {
        const double r = mod ? std::sqrt(4.0 - eps * eps) : 2.0;
        const double kick = eps / r;
        const double drift = eps * r / 4.0;
        const double sd = 2.0 * std::sqrt(1.0 - c * c) / r;
        const V ut = u - kick * grad(x);
        const V xt = x + drift * ut;
        const V utt = c * ut + sd * noise();
        const V xs = xt + drift * utt;
        u = utt - kick * grad(xs);
        x = xs;
        return;
    }
    case IntegratorKind::IL: {
        const double ct = -std::expm1(-eta * eps);
        const double r = mod ? std::sqrt(4.0 - eps * eps) : 2.0;
        const V g0 = grad(x);
        const V uh = (r / 2.0) * u + (eps / 2.0) * g0;
        const V ut = uh - eps * g0;
        const V utt = -ct * ut + std::sqrt(ct * (2.0 - ct)) * noise();
        const V xs = x + eps * (ut + 0.5 * utt);
        const V uh1 = ut + utt;
        u = (2.0 / r) * (uh1 - (eps / 2.0) * grad(xs));
        x = xs;
        return;
    }
    case IntegratorKind::BP: {
        const double kick = mod ? half_step_modified(eps) : eps / 2.0;
        const double sc = std::sqrt(c);
        const double sd = std::sqrt(1.0 - c);
        const V up = sc * u + sd * noise();
        const V ut = up - kick * grad(x);
        const V xs = x + eps * ut;
        const V um = ut - kick * grad(xs);
        u = sc * um + sd * noise();
        x = xs;
        return;
    }
    case IntegratorKind::VEC: {
        const double e15 = std::pow(eps, 1.5);
        const double p = std::sqrt(2.0 * eta) * e15 / 2.0;
        const double q = std::sqrt(6.0 * eta) * e15 / 6.0;
        const double r1 = std::sqrt(2.0 * eta * eps) / 2.0 * (2.0 - eta * eps);
        const double t = -std::sqrt(6.0) / 6.0 * std::pow(eta * eps, 1.5);
        const double g0c = (eta * eps * eps - eps) / 2.0 - (mod ? eps * eps * eps / 4.0 : 0.0);
        const V g0 = grad(x);
        const V w1 = noise();
        const V w2 = noise();
        const V xs = x - (eps * eps / 2.0) * g0 + ((2.0 * eps - eta * eps * eps) / 2.0) * u + p * w1
                     + q * w2;
        const V gs = grad(xs);
        u = (1.0 - eta * eps + eta * eta * eps * eps / 2.0) * u + g0c * g0 - (eps / 2.0) * gs
            + r1 * w1 + t * w2;
        x = xs;
        return;
    }
    case IntegratorKind::ABOBA: {
        const double b = mod ? half_step_modified(eps) : eps / 2.0;
        const V xt = x + b * u;
        const V gt = grad(xt);
        const V ut = u - (eps / 2.0) * gt;
        const V utt = c * ut + std::sqrt(1.0 - c * c) * noise();
        u = utt - (eps / 2.0) * gt;
        x = xt + b * u;
        return;
    }
    case IntegratorKind::SPV: {
        const double b = mod ? spv_shift(eps, eta) : eps / 2.0;
        const V xt = x + b * u;
        const V gt = grad(xt);
        u = c * u - friction_gain(eta, eps) * gt + std::sqrt(1.0 - c * c) * noise();
        x = xt + b * u;
        return;
    }
    case IntegratorKind::MANNELLA: {
        const double b = mod ? half_step_modified(eps) : eps / 2.0;
        const double c1 = (2.0 - eta * eps) / 2.0;
        const double c2 = 2.0 / (2.0 + eta * eps);
        const V xt = x + b * u;
        const V gt = grad(xt);
        const V w = std::sqrt(eps) * noise();
        u = c2 * (c1 * u - eps * gt + std::sqrt(2.0 * eta) * w);
        x = xt + b * u;
        return;
    }
    }
}

}  // namespace detail

// One un-Metropolized step of the chosen integrator.
PhaseState integrator_step(IntegratorKind kind, Variant variant, const TargetModel& target,
                           const PhaseState& state, double epsilon, double eta, Rng& rng);

// Same step for a univariate Gaussian with precision gamma, on scalars.
// Returns (x*, u*).
std::pair<double, double> integrator_step_gaussian(IntegratorKind kind, Variant variant,
                                                   double gamma, double x, double u,
                                                   double epsilon, double eta, Rng& rng);

LinearKernel linearize(IntegratorKind kind, Variant variant, double epsilon, double eta,
                       double gamma);
LinearKernel linearize(const HamsCoeffs& coeffs, double gamma);
LinearKernel linearize(const ShiftedHamsCoeffs& coeffs, double gamma);

double max_abs_diff(const LinearKernel& a, const LinearKernel& b);

}  // namespace hams
