#include "hams/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hams {

LinearKernel var_kernel(const HamsCoeffs& coeffs, double gamma) { return linearize(coeffs, gamma); }

std::array<double, 4> lyapunov_stationary(const LinearKernel& k)
{
    const double m00 = k.M[0], m01 = k.M[1], m10 = k.M[2], m11 = k.M[3];
    // Unknowns (v11, v12, v22) of the symmetric solution.
    double a[3][4] = {
        {1.0 - m00 * m00, -2.0 * m00 * m01, -m01 * m01, k.S[0]},
        {-m00 * m10, 1.0 - (m00 * m11 + m01 * m10), -m01 * m11, k.S[1]},
        {-m10 * m10, -2.0 * m10 * m11, 1.0 - m11 * m11, k.S[3]},
    };
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col]))
                piv = r;
        if (std::abs(a[piv][col]) < 1e-14)
            throw Degenerate("Lyapunov system is singular");
        std::swap(a[col], a[piv]);
        for (int r = 0; r < 3; ++r) {
            if (r == col)
                continue;
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 4; ++c)
                a[r][c] -= f * a[col][c];
        }
    }
    const double v11 = a[0][3] / a[0][0];
    const double v12 = a[1][3] / a[1][1];
    const double v22 = a[2][3] / a[2][2];
    return {v11, v12, v12, v22};
}

double stationary_variance_closed(double a1, double gamma)
{
    const double den = a1 * gamma - 2.0;
    if (std::abs(den) < 1e-12)
        throw Degenerate("a1 gamma = 2: stationary variance undefined");
    return (a1 - 2.0) / (gamma * den);
}

double expected_delta_g(double a1, double gamma)
{
    if (!(a1 > 0.0 && a1 < 2.0) || !(gamma > 0.0))
        throw InvalidParams("expected_delta_g needs 0 < a1 < 2 and gamma > 0");
    return a1 * a1 * a1 * gamma * (gamma - 1.0) * (gamma - 1.0) / (2.0 * (2.0 - a1));
}

double acceptance_from_delta_g(double mean_delta_g)
{
    if (!(mean_delta_g >= 0.0))
        throw InvalidParams("mean Delta G must be nonnegative");
    return 1.0 - 2.0 / std::numbers::pi * std::atan(std::sqrt(mean_delta_g / 2.0));
}

double expected_acceptance(double a1, double gamma)
{
    return acceptance_from_delta_g(expected_delta_g(a1, gamma));
}

double expected_delta_g_ma(MaKind kind, double eps, double eta, double gamma)
{
    if (!(eps > 0.0) || !(eta >= 0.0) || !(gamma > 0.0))
        throw InvalidParams("expected_delta_g_ma: invalid parameters");
    const double c = std::exp(-eta * eps);
    const double e2 = eps * eps;
    switch (kind) {
    case MaKind::BAOAB:
    case MaKind::ABOBA:
        return gamma * gamma * e2 * e2 * (1.0 + c) * (4.0 - 4.0 * c + (1.0 + c) * gamma * e2) / 128.0;
    case MaKind::BP:
        return gamma * gamma * gamma * e2 * e2 * e2 / 32.0;
    }
    throw InvalidParams("unknown Metropolized kind");
}

double expected_acceptance_ma(MaKind kind, double eps, double eta, double gamma)
{
    return acceptance_from_delta_g(expected_delta_g_ma(kind, eps, eta, gamma));
}

double spectral_radius(const HamsCoeffs& c)
{
    validate(c);
    const double tr = c.a3 - c.a1;
    const double det = (1.0 - c.a1) * (c.a3 - 1.0) + c.a2 * c.a2;
    const double s = c.a1 + c.a3 - 2.0;
    const double disc = s * s - 4.0 * c.a2 * c.a2;
    if (disc >= -1e-12) {
        const double r = std::sqrt(std::max(disc, 0.0));
        return std::max(std::abs(tr + r), std::abs(tr - r)) / 2.0;
    }
    return std::sqrt(std::max(det, 0.0));
}

RadiusOptimum optimal_a3(double a1, double nu)
{
    if (!(a1 > 0.0 && a1 < 2.0) || !(nu >= 0.0) || !(nu <= a1 + 1e-12) || !(a1 <= 1.0 + nu + 1e-12))
        throw ConstraintViolation("optimal_a3 needs 0 < a1 < 2 and nu <= a1 <= 1 + nu");
    const double r = std::sqrt(nu + 2.0 - a1) - std::sqrt(nu);
    RadiusOptimum o;
    o.free_coord = r * r;
    o.a2 = std::sqrt(nu * o.free_coord);
    o.rho_min = std::abs(o.free_coord - a1) / 2.0;
    return o;
}

RadiusOptimum optimal_a1(double a3, double nu_tilde)
{
    const double b = 2.0 - a3;
    if (!(a3 > 0.0 && a3 < 2.0) || !(nu_tilde >= 0.0) || !(nu_tilde <= b + 1e-12) ||
        !(b <= 1.0 + nu_tilde + 1e-12))
        throw ConstraintViolation("optimal_a1 needs 0 < a3 < 2 and nu~ <= 2 - a3 <= 1 + nu~");
    const double r = std::sqrt(nu_tilde + a3) - std::sqrt(nu_tilde);
    RadiusOptimum o;
    o.free_coord = 2.0 - r * r;
    o.a2 = std::sqrt(nu_tilde * r * r);
    o.rho_min = std::abs(a3 - o.free_coord) / 2.0;
    return o;
}

double implied_eta2_hams_a(double eps)
{
    if (!(eps > 0.0 && eps < 1.0))
        throw InvalidParams("implied_eta2_hams_a needs 0 < eps < 1");
    const double s = std::sqrt(1.0 - eps * eps);
    const double a1 = 1.0 - s;
    const RadiusOptimum o = optimal_a3(a1, a1);
    return -2.0 * std::log(o.free_coord / (1.0 + s)) / eps;
}

double implied_eta1_hams_b(double eps)
{
    if (!(eps > 0.0 && eps < 1.0))
        throw InvalidParams("implied_eta1_hams_b needs 0 < eps < 1");
    const double s = std::sqrt(1.0 - eps * eps);
    const double a3 = 1.0 + s;
    const RadiusOptimum o = optimal_a1(a3, 2.0 - a3);
    return -2.0 * std::log((2.0 - o.free_coord) / (1.0 + s)) / eps;
}

double quadrant_probability(double tau)
{
    if (!(std::abs(tau) <= 1.0))
        throw InvalidParams("correlation must lie in [-1, 1]");
    return 0.25 + std::asin(tau) / (2.0 * std::numbers::pi);
}

}  // namespace hams
