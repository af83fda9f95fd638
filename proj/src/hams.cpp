#include "hams/hams.hpp"

#include <algorithm>
#include <cmath>

namespace hams {

void refresh_cache(const TargetModel& target, ChainState& state)
{
    if (state.cached && state.grad.size() == state.x.size())
        return;
    state.U = target.evaluate(state.x, state.grad);
    state.cached = true;
}

bool is_valid(const HamsCoeffs& c, double tol)
{
    const auto finite = std::isfinite(c.a1) && std::isfinite(c.a2) && std::isfinite(c.a3) &&
                        std::isfinite(c.phi);
    return finite && c.a1 >= -tol && c.a1 <= 2.0 + tol && c.a3 >= -tol && c.a3 <= 2.0 + tol &&
           c.a1 * c.a3 >= c.a2 * c.a2 - tol &&
           (2.0 - c.a1) * (2.0 - c.a3) >= c.a2 * c.a2 - tol;
}

void validate(const HamsCoeffs& c, double tol)
{
    if (!is_valid(c, tol))
        throw InvalidParams("coefficients violate 0 <= A <= 2I");
}

Cov2x2 noise_cov(const HamsCoeffs& c)
{
    Cov2x2 v;
    v.v11 = 2.0 * c.a1 - c.a1 * c.a1 - c.a2 * c.a2;
    v.v12 = 2.0 * c.a2 - c.a1 * c.a2 - c.a2 * c.a3;
    v.v22 = 2.0 * c.a3 - c.a3 * c.a3 - c.a2 * c.a2;
    return v;
}

double default_phi(double a1, double a2)
{
    if (a1 >= 2.0 - 1e-12)
        throw Degenerate("default phi needs a1 < 2");
    return a2 / (2.0 - a1);
}

bool has_default_phi(const HamsCoeffs& c)
{
    return c.a1 < 2.0 - 1e-12 && std::abs(c.phi - c.a2 / (2.0 - c.a1)) <= 1e-12;
}

HamsCoeffs coeffs_from_sde(const SdeParams& p)
{
    if (!(p.epsilon > 0.0 && p.epsilon <= 1.0) || !(p.c1 > 0.0 && p.c1 <= 1.0) ||
        !(p.c2 > 0.0 && p.c2 <= 1.0))
        throw InvalidParams("sde parameters out of range");
    const double s = std::sqrt(1.0 - p.epsilon * p.epsilon);
    HamsCoeffs c;
    c.a1 = 2.0 - p.c1 * (1.0 + s);
    c.a3 = p.c2 * (1.0 + s);
    c.a2 = p.epsilon * std::sqrt(p.c1 * p.c2);
    c.phi = default_phi(c.a1, c.a2);
    validate(c);
    return c;
}

namespace {

void check_eps(double epsilon, double eta)
{
    if (!(epsilon > 0.0 && epsilon <= 1.0) || !(eta >= 0.0))
        throw InvalidParams("need epsilon in (0, 1] and eta >= 0");
}

}  // namespace

HamsCoeffs hams_a_coeffs(double epsilon, double eta2)
{
    check_eps(epsilon, eta2);
    return coeffs_from_sde({epsilon, 1.0, carryover(eta2, epsilon)});
}

HamsCoeffs hams_b_coeffs(double epsilon, double eta1)
{
    check_eps(epsilon, eta1);
    return coeffs_from_sde({epsilon, carryover(eta1, epsilon), 1.0});
}

HamsCoeffs hams_k_coeffs(double epsilon, double k)
{
    if (!(epsilon > 0.0 && epsilon < 1.0) || !(k >= 0.0))
        throw InvalidParams("hams-k needs epsilon in (0, 1) and k >= 0");
    const double s = std::sqrt(1.0 - epsilon * epsilon);
    const double c1 = std::exp(-0.5 * k * epsilon * epsilon);
    const double bracket = 3.0 - s - 2.0 * std::sqrt(2.0) * epsilon / std::sqrt(1.0 + s);
    const double c2 = std::max(0.5, bracket * c1 / (1.0 + s));
    return coeffs_from_sde({epsilon, c1, c2});
}

HamsCoeffs hams_k_friction_coeffs(double epsilon, double k, double eta2)
{
    check_eps(epsilon, eta2);
    if (!(k >= 0.0))
        throw InvalidParams("hams-k needs k >= 0");
    return coeffs_from_sde(
        {epsilon, std::exp(-0.5 * k * epsilon * epsilon), carryover(eta2, epsilon)});
}

double optimal_carryover(double epsilon)
{
    if (!(epsilon > 0.0 && epsilon <= 1.0))
        throw InvalidParams("need epsilon in (0, 1]");
    const double s = std::sqrt(1.0 - epsilon * epsilon);
    return (3.0 - s) / (1.0 + s) - 2.0 * std::sqrt(2.0) * epsilon * std::pow(1.0 + s, -1.5);
}

HamsCoeffs hams_a_optimal(double epsilon)
{
    return coeffs_from_sde({epsilon, 1.0, optimal_carryover(epsilon)});
}

HamsCoeffs hams_b_optimal(double epsilon)
{
    // mirror image of the HAMS-A optimum: swap the roles of a1 and 2 - a3
    return coeffs_from_sde({epsilon, optimal_carryover(epsilon), 1.0});
}

ProposalOutcome propose_with_noise(const TargetModel& target, const PhaseState& state,
                                   const HamsCoeffs& c, const NoisePair& z)
{
    const std::size_t k = state.x.size();
    if (state.u.size() != k || k != target.dim() || z.z1.size() != k || z.z2.size() != k)
        throw InvalidParams("propose: dimension mismatch");

    Vec g0;
    const double u0_pot = target.evaluate(state.x, g0);

    ProposalOutcome out;
    out.z_forward = z;
    Vec zt1(k), zt2(k);
    out.proposed.x.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        zt1[i] = z.z1[i] - c.a1 * g0[i] + c.a2 * state.u[i];
        zt2[i] = z.z2[i] - c.a2 * g0[i] + c.a3 * state.u[i];
        out.proposed.x[i] = state.x[i] + zt1[i];
    }
    Vec gs;
    const double us_pot = target.evaluate(out.proposed.x, gs);
    out.proposed.u.resize(k);
    out.z_backward = {Vec(k), Vec(k)};
    for (std::size_t i = 0; i < k; ++i) {
        const double us = -state.u[i] + zt2[i] + c.phi * (zt1[i] + g0[i] - gs[i]);
        out.proposed.u[i] = us;
        out.z_backward.z1[i] = zt1[i] - c.a1 * gs[i] - c.a2 * us;
        out.z_backward.z2[i] = zt2[i] - c.a2 * gs[i] - c.a3 * us;
    }

    if (has_default_phi(c))
        out.delta_g = delta_g_default_from(u0_pot, us_pot, state.u, z.z1, g0, gs, c.a1, c.a2);
    else
        out.delta_g = delta_g_general(target, state, out, c);
    out.log_ratio = -out.delta_g;
    return out;
}

ProposalOutcome propose(const TargetModel& target, const PhaseState& state,
                        const HamsCoeffs& coeffs, Rng& rng)
{
    const Factor2x2 f = factor_cov2(noise_cov(coeffs));
    const NoisePair z = sample_noise_pair(f, state.x.size(), rng);
    return propose_with_noise(target, state, coeffs, z);
}

double delta_g_default_from(double u0_pot, double ustar_pot, const Vec& u0, const Vec& z1,
                            const Vec& grad0, const Vec& gradstar, double a1, double a2)
{
    if (a1 >= 2.0 - 1e-12)
        throw Degenerate("delta_g_default needs a1 < 2");
    double s = 0.0;
    for (std::size_t i = 0; i < u0.size(); ++i) {
        const double gsum = grad0[i] + gradstar[i];
        s += gsum * (a1 * gsum - 2.0 * (a2 * u0[i] + z1[i]));
    }
    return ustar_pot - u0_pot + s / (2.0 * (2.0 - a1));
}

double delta_g_default(const TargetModel& target, const Vec& x0, const Vec& u0, const Vec& z1,
                       const Vec& grad0, const Vec& xstar, const Vec& gradstar, double a1,
                       double a2)
{
    return delta_g_default_from(target.potential(x0), target.potential(xstar), u0, z1, grad0,
                                gradstar, a1, a2);
}

double delta_g_general(const TargetModel& target, const PhaseState& initial,
                       const ProposalOutcome& outcome, const HamsCoeffs& coeffs)
{
    const Cov2x2 v = noise_cov(coeffs);
    const double det = v.v11 * v.v22 - v.v12 * v.v12;
    if (v.v11 < 1e-10 || det / v.v11 < 1e-10)
        throw SingularCovariance("2A - A^2 is singular; use the default phi");
    auto quad = [&](const NoisePair& z) {
        double q = 0.0;
        for (std::size_t i = 0; i < z.z1.size(); ++i)
            q += v.v22 * z.z1[i] * z.z1[i] - 2.0 * v.v12 * z.z1[i] * z.z2[i] +
                 v.v11 * z.z2[i] * z.z2[i];
        return q / det;
    };
    const double g0 = target.potential(initial.x) + 0.5 * norm2(initial.u) +
                      0.5 * quad(outcome.z_forward);
    const double g1 = target.potential(outcome.proposed.x) + 0.5 * norm2(outcome.proposed.u) +
                      0.5 * quad(outcome.z_backward);
    return g1 - g0;
}

StepInfo step(const TargetModel& target, PhaseState& state, const HamsCoeffs& coeffs, Rng& rng)
{
    HamsKernel kernel(coeffs);
    ChainState cs{state.x, state.u, 0.0, {}, false};
    const StepInfo info = kernel.step(target, cs, rng);
    state.x = std::move(cs.x);
    state.u = std::move(cs.u);
    return info;
}

HamsKernel::HamsKernel(HamsCoeffs coeffs, std::string label)
    : c_((validate(coeffs), coeffs)), factor_(factor_cov2(noise_cov(coeffs))),
      default_phi_(has_default_phi(coeffs)), label_(std::move(label))
{
    if (!default_phi_) {
        const Cov2x2 v = noise_cov(c_);
        if (v.v11 < 1e-10 || (v.v11 * v.v22 - v.v12 * v.v12) / v.v11 < 1e-10)
            throw SingularCovariance("non-default phi requires nonsingular 2A - A^2");
    }
}

StepInfo HamsKernel::step(const TargetModel& target, ChainState& s, Rng& rng)
{
    refresh_cache(target, s);
    const std::size_t k = s.x.size();
    z1_.resize(k);
    z2_.resize(k);

    const double w = rng.uniform();
    sample_noise_pair_into(factor_, rng, z1_, z2_);

    StepInfo info;
    if (!default_phi_) {
        const PhaseState st{s.x, s.u};
        ProposalOutcome out = propose_with_noise(target, st, c_, {z1_, z2_});
        info.delta_g = out.delta_g;
        info.alpha = accept_probability(info.delta_g);
        info.accepted = w < info.alpha;
        if (info.accepted) {
            s.x = std::move(out.proposed.x);
            s.u = std::move(out.proposed.u);
            s.cached = false;
            refresh_cache(target, s);
        } else {
            for (auto& v : s.u)
                v = -v;
        }
        return info;
    }

    const double a1 = c_.a1, a2 = c_.a2, a3 = c_.a3;
    xi_.resize(k);
    xs_.resize(k);
    xt_.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        xi_[i] = a2 * s.u[i] + z1_[i];
        xs_[i] = s.x[i] - a1 * s.grad[i] + xi_[i];
    }
    const double us_pot = target.evaluate(xs_, gs_);
    double inner = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        xt_[i] = gs_[i] + s.grad[i];
        inner += xt_[i] * (xi_[i] - 0.5 * a1 * xt_[i]);
    }
    info.delta_g = us_pot - s.U - inner / (2.0 - a1);
    info.alpha = accept_probability(info.delta_g);
    info.accepted = w < info.alpha;
    if (info.accepted) {
        const double cu = (a1 + a2 * a2 + 2.0 * a3 - a1 * a3 - 2.0) / (2.0 - a1);
        const double cg = a2 / (2.0 - a1);
        for (std::size_t i = 0; i < k; ++i)
            s.u[i] = cu * s.u[i] - cg * xt_[i] + cg * z1_[i] + z2_[i];
        s.x.swap(xs_);
        s.grad.swap(gs_);
        s.U = us_pot;
    } else {
        for (auto& v : s.u)
            v = -v;
    }
    return info;
}

std::array<double, 4> shifted_a_tilde(const ShiftedHamsCoeffs& sc)
{
    return {sc.a1, sc.a1 * sc.b + sc.a2, sc.a2, sc.a2 * sc.b + sc.a3};
}

PhaseState shifted_propose_with_noise(const TargetModel& target, const PhaseState& state,
                                      const ShiftedHamsCoeffs& sc, const NoisePair& z)
{
    validate({sc.a1, sc.a2, sc.a3, 0.0});
    const std::size_t k = state.x.size();
    Vec xt(k);
    for (std::size_t i = 0; i < k; ++i)
        xt[i] = state.x[i] + sc.b * state.u[i];
    const Vec g = target.gradient(xt);
    const auto at = shifted_a_tilde(sc);
    PhaseState out{Vec(k), Vec(k)};
    for (std::size_t i = 0; i < k; ++i) {
        // (x*, u*) = (x0, -u0) - At (g, -u0) + Z
        out.x[i] = state.x[i] - at[0] * g[i] + at[1] * state.u[i] + z.z1[i];
        out.u[i] = -state.u[i] - at[2] * g[i] + at[3] * state.u[i] + z.z2[i];
    }
    return out;
}

PhaseState shifted_propose(const TargetModel& target, const PhaseState& state,
                           const ShiftedHamsCoeffs& sc, Rng& rng)
{
    const Factor2x2 f = factor_cov2(noise_cov({sc.a1, sc.a2, sc.a3, 0.0}));
    const NoisePair z = sample_noise_pair(f, state.x.size(), rng);
    return shifted_propose_with_noise(target, state, sc, z);
}

}  // namespace hams
