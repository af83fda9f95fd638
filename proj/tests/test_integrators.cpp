#include <cmath>

#include "doctest.h"
#include "hams/integrators.hpp"
#include "hams/targets.hpp"

using namespace hams;

namespace {

// Velocity Verlet on U = gamma x^2 / 2.
std::pair<double, double> velocity_verlet(double x, double u, double eps, double gamma)
{
    const double xs = x - 0.5 * eps * eps * gamma * x + eps * u;
    const double us = u - 0.5 * eps * (gamma * x + gamma * xs);
    return {xs, us};
}

// Position Verlet (drift-kick-drift) on the same target.
std::pair<double, double> position_verlet(double x, double u, double eps, double gamma)
{
    const double xt = x + 0.5 * eps * u;
    const double us = u - eps * gamma * xt;
    return {xt + 0.5 * eps * us, us};
}

}  // namespace

TEST_SUITE("langevin_integrators")
{
    TEST_CASE("names round trip")
    {
        for (auto k : all_kinds())
            CHECK(parse_kind(to_string(k)) == k);
        CHECK(parse_variant("raw") == Variant::Raw);
        CHECK(parse_variant("modified") == Variant::Modified);
        CHECK_THROWS(parse_kind("nope"));
    }

    TEST_CASE("zero friction reduces to leapfrog")
    {
        Rng rng(1);
        const double eps = 0.3, gamma = 1.7;
        for (int i = 0; i < 20; ++i) {
            const double x = rng.normal(), u = rng.normal();
            const auto vv = velocity_verlet(x, u, eps, gamma);
            for (auto kind : {IntegratorKind::BAOAB, IntegratorKind::BP, IntegratorKind::IL}) {
                const auto r = integrator_step_gaussian(kind, Variant::Raw, gamma, x, u, eps, 0.0, rng);
                CHECK(r.first == doctest::Approx(vv.first).epsilon(1e-12));
                CHECK(r.second == doctest::Approx(vv.second).epsilon(1e-12));
            }
            const auto pv = position_verlet(x, u, eps, gamma);
            const auto ra =
                integrator_step_gaussian(IntegratorKind::ABOBA, Variant::Raw, gamma, x, u, eps, 0.0, rng);
            CHECK(ra.first == doctest::Approx(pv.first).epsilon(1e-12));
            CHECK(ra.second == doctest::Approx(pv.second).epsilon(1e-12));
        }
        for (auto kind : {IntegratorKind::BAOAB, IntegratorKind::BP, IntegratorKind::IL,
                          IntegratorKind::ABOBA}) {
            const auto lk = linearize(kind, Variant::Raw, eps, 0.0, gamma);
            for (double s : lk.S)
                CHECK(std::fabs(s) < 1e-12);
        }
        const auto lb = linearize(IntegratorKind::BAOAB, Variant::Raw, eps, 0.0, gamma);
        const auto lbp = linearize(IntegratorKind::BP, Variant::Raw, eps, 0.0, gamma);
        const auto lil = linearize(IntegratorKind::IL, Variant::Raw, eps, 0.0, gamma);
        CHECK(max_abs_diff(lb, lbp) < 1e-12);
        CHECK(max_abs_diff(lb, lil) < 1e-12);
    }

    TEST_CASE("step on a generic target agrees with the scalar path")
    {
        GaussianTarget g(1.3, 1);
        for (auto kind : all_kinds())
            for (auto variant : {Variant::Raw, Variant::Modified}) {
                Rng r1(2), r2(2);
                const auto a = integrator_step(kind, variant, g, {{0.4}, {-0.9}}, 0.3, 0.8, r1);
                const auto b = integrator_step_gaussian(kind, variant, 1.3, 0.4, -0.9, 0.3, 0.8, r2);
                CHECK(a.x[0] == doctest::Approx(b.first).epsilon(1e-13));
                CHECK(a.u[0] == doctest::Approx(b.second).epsilon(1e-13));
            }
    }

    TEST_CASE("linearization examples")
    {
        const auto h = linearize(HamsCoeffs{0.2, 0.6, 1.8, 1.0 / 3.0}, 1.0);
        CHECK(h.M[0] == doctest::Approx(0.8));
        CHECK(h.M[1] == doctest::Approx(0.6));
        CHECK(h.M[2] == doctest::Approx(-0.6));
        CHECK(h.M[3] == doctest::Approx(0.8));
        for (double s : h.S)
            CHECK(std::fabs(s) < 1e-12);

        const auto bp = linearize(IntegratorKind::BP, Variant::Raw, 0.6, 1.0, 1.0);
        CHECK(bp.M[0] == doctest::Approx(0.82).epsilon(1e-12));

        const auto gjf = linearize(IntegratorKind::GJF, Variant::Raw, 0.3, 1.0, 1.0);
        // W ~ N(0, 2 eta eps) enters x* with weight eps / (2 + eta eps)
        CHECK(std::fabs(gjf.S[0] - 2 * 1.0 * 0.3 * std::pow(0.3 / 2.3, 2)) < 1e-12);
        CHECK(std::fabs(gjf.S[0] - 0.0102079) < 1e-7);
    }

    TEST_CASE("Mannella coefficients")
    {
        // x0 = 0, u0 = 1 on a flat-gradient-free check: gamma -> 0 isolates c2 * c1
        const auto lk = linearize(IntegratorKind::MANNELLA, Variant::Raw, 0.2, 1.0, 1e-300);
        CHECK(lk.M[3] == doctest::Approx(0.9 * 2.0 / 2.2).epsilon(1e-12));
        CHECK(2.0 / 2.2 == doctest::Approx(0.909091).epsilon(1e-6));
    }

    TEST_CASE("rescaled BAOAB and full-step IL are the same kernel")
    {
        for (double eps : {0.1, 0.3, 0.6, 0.9})
            for (double eta : {0.5, 1.0, 2.0})
                for (double gamma : {0.5, 1.0, 2.5}) {
                    const auto a = linearize(IntegratorKind::BAOAB, Variant::Modified, eps, eta, gamma);
                    const auto b = linearize(IntegratorKind::IL, Variant::Modified, eps, eta, gamma);
                    CHECK(max_abs_diff(a, b) < 1e-12);
                }
    }

    TEST_CASE("linearization matches Monte Carlo one-step moments")
    {
        const double eps = 0.3, eta = 1.0, gamma = 1.5, x0 = 0.7, u0 = -0.4;
        const std::size_t n = 1000000;
        Rng rng(3);
        for (auto kind : all_kinds())
            for (auto variant : {Variant::Raw, Variant::Modified}) {
                CAPTURE(to_string(kind));
                CAPTURE(to_string(variant));
                const auto lk = linearize(kind, variant, eps, eta, gamma);
                double mx = 0, mu = 0, sxx = 0, sxu = 0, suu = 0;
                const double ex = lk.M[0] * x0 + lk.M[1] * u0;
                const double eu = lk.M[2] * x0 + lk.M[3] * u0;
                for (std::size_t i = 0; i < n; ++i) {
                    const auto r = integrator_step_gaussian(kind, variant, gamma, x0, u0, eps, eta, rng);
                    const double dx = r.first - ex, du = r.second - eu;
                    mx += dx;
                    mu += du;
                    sxx += dx * dx;
                    sxu += dx * du;
                    suu += du * du;
                }
                const double s00 = lk.S[0], s01 = lk.S[1], s11 = lk.S[3];
                CHECK(std::fabs(mx / n) < 4 * std::sqrt(s00 / n));
                CHECK(std::fabs(mu / n) < 4 * std::sqrt(s11 / n));
                CHECK(std::fabs(sxx / n - s00) < 4 * std::sqrt(2 * s00 * s00 / n));
                CHECK(std::fabs(suu / n - s11) < 4 * std::sqrt(2 * s11 * s11 / n));
                CHECK(std::fabs(sxu / n - s01) < 4 * std::sqrt((s00 * s11 + s01 * s01) / n));
                CHECK(lk.S[1] == lk.S[2]);
            }
    }

    TEST_CASE("parameter checks")
    {
        Rng rng(4);
        CHECK_THROWS_AS(integrator_step_gaussian(IntegratorKind::BP, Variant::Modified, 1, 0, 0,
                                                 1.5, 1, rng),
                        InvalidParams);
        CHECK_THROWS_AS(integrator_step_gaussian(IntegratorKind::GJF, Variant::Raw, 1, 0, 0,
                                                 -0.1, 1, rng),
                        InvalidParams);
        CHECK_THROWS_AS(integrator_step_gaussian(IntegratorKind::GJF, Variant::Raw, 1, 0, 0,
                                                 0.1, -1, rng),
                        InvalidParams);
        // SPV at zero friction uses the eps limit of the friction gain
        CHECK(detail::friction_gain(0.0, 0.3) == 0.3);
        CHECK_NOTHROW(linearize(IntegratorKind::SPV, Variant::Modified, 0.3, 0.0, 1.0));
    }
}
