#include "hams/matching.hpp"

#include <algorithm>
#include <cmath>

namespace hams {

bool is_shifted_kind(IntegratorKind kind)
{
    return kind == IntegratorKind::ABOBA || kind == IntegratorKind::SPV ||
           kind == IntegratorKind::MANNELLA;
}

HamsCoeffs hams_coeffs_for(IntegratorKind kind, double eps, double eta)
{
    detail::check_step_params(kind, Variant::Modified, eps, eta);
    const double c = std::exp(-eta * eps);
    const double r = std::sqrt(4.0 - eps * eps);
    HamsCoeffs h;
    switch (kind) {
    case IntegratorKind::GJF: {
        const double d = 2.0 + eta * eps;
        h = {eps * eps / d, eps * r / d, r * r / d, eps / r};
        break;
    }
    case IntegratorKind::BAOAB:
    case IntegratorKind::IL:
        h = {eps * eps / 4.0 * (1.0 + c), eps * r / 4.0 * (1.0 + c),
             (1.0 + c) * (1.0 - eps * eps / 4.0), eps / r};
        break;
    case IntegratorKind::BP: {
        const double s = std::sqrt(1.0 - eps * eps);
        h = {1.0 - s, eps * std::sqrt(c), 1.0 + c * s, std::sqrt(c) * eps / (1.0 + s)};
        break;
    }
    case IntegratorKind::VEC:
        h = {eps * eps / 2.0, eps - eta * eps * eps / 2.0,
             2.0 - eps / 4.0 * (2.0 - eta * eps) * (2.0 * eta + eps), eps / 2.0};
        break;
    default:
        throw InvalidParams("hams_coeffs_for: " + to_string(kind) + " needs shifted HAMS");
    }
    validate(h);
    return h;
}

ShiftedHamsCoeffs shifted_coeffs_for(IntegratorKind kind, double eps, double eta)
{
    detail::check_step_params(kind, Variant::Modified, eps, eta);
    const double c = std::exp(-eta * eps);
    ShiftedHamsCoeffs sc;
    switch (kind) {
    case IntegratorKind::ABOBA: {
        const double s = std::sqrt(1.0 - eps * eps);
        sc = {0.5 * (1.0 + c) * (1.0 - s), 0.5 * eps * (1.0 + c), 0.5 * (1.0 + c) * (1.0 + s),
              detail::half_step_modified(eps)};
        break;
    }
    case IntegratorKind::SPV: {
        const double q = detail::friction_gain(eta, eps);
        const double rad = std::max(0.0, (1.0 + c) * (1.0 + c) - 4.0 * q * q);
        const double d = std::sqrt(rad);
        sc = {0.5 * (1.0 + c - d), q, 0.5 * (1.0 + c + d), detail::spv_shift(eps, eta)};
        break;
    }
    case IntegratorKind::MANNELLA: {
        const double s = std::sqrt(1.0 - eps * eps);
        const double d = 2.0 + eta * eps;
        sc = {2.0 * (1.0 - s) / d, 2.0 * eps / d, 2.0 * (1.0 + s) / d,
              detail::half_step_modified(eps)};
        break;
    }
    default:
        throw InvalidParams("shifted_coeffs_for: " + to_string(kind) + " is not a shifted kind");
    }
    validate(HamsCoeffs{sc.a1, sc.a2, sc.a3, 0.0});
    return sc;
}

MatchReport verify_match(IntegratorKind kind, Variant variant, double eps, double eta,
                         double gamma)
{
    const LinearKernel li = linearize(kind, variant, eps, eta, gamma);
    LinearKernel lh;
    MatchReport rep;
    if (is_shifted_kind(kind)) {
        const ShiftedHamsCoeffs sc = shifted_coeffs_for(kind, eps, eta);
        lh = linearize(sc, gamma);
        rep.b_diff = std::abs(sc.b - eps / 2.0);
    } else {
        const HamsCoeffs h = hams_coeffs_for(kind, eps, eta);
        lh = linearize(h, gamma);
        rep.phi_diff = std::abs(h.phi - default_phi(h.a1, h.a2));
    }
    for (std::size_t i = 0; i < 4; ++i) {
        rep.drift_diff = std::max(rep.drift_diff, std::abs(li.M[i] - lh.M[i]));
        rep.cov_diff = std::max(rep.cov_diff, std::abs(li.S[i] - lh.S[i]));
    }
    return rep;
}

double cov_order_ratio(IntegratorKind kind, double eps, double eta, double gamma)
{
    const double a = verify_match(kind, Variant::Modified, eps, eta, gamma).cov_diff;
    const double b = verify_match(kind, Variant::Modified, eps / 2.0, eta, gamma).cov_diff;
    if (b == 0.0)
        throw Degenerate("covariance difference vanishes at eps / 2");
    return a / b;
}

double phi_order_ratio(IntegratorKind kind, double eps, double eta)
{
    const HamsCoeffs h1 = hams_coeffs_for(kind, eps, eta);
    const HamsCoeffs h2 = hams_coeffs_for(kind, eps / 2.0, eta);
    const double a = std::abs(h1.phi - default_phi(h1.a1, h1.a2));
    const double b = std::abs(h2.phi - default_phi(h2.a1, h2.a2));
    if (b == 0.0)
        throw Degenerate("phi difference vanishes at eps / 2");
    return a / b;
}

}  // namespace hams
