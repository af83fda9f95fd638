#include <cmath>
#include <set>

#include "doctest.h"
#include "hams/core.hpp"
#include "hams/hams.hpp"
#include "hams/targets.hpp"

using namespace hams;

TEST_SUITE("core")
{
    TEST_CASE("rng streams are reproducible and distinct")
    {
        Rng a(42, 3), b(42, 3), c(42, 4), d(43, 3);
        std::set<std::uint64_t> seen;
        bool all_equal = true, differs_stream = false, differs_seed = false;
        for (int i = 0; i < 1000; ++i) {
            const auto va = a(), vb = b(), vc = c(), vd = d();
            all_equal = all_equal && va == vb;
            differs_stream = differs_stream || va != vc;
            differs_seed = differs_seed || va != vd;
            seen.insert(va);
        }
        CHECK(all_equal);
        CHECK(differs_stream);
        CHECK(differs_seed);
        CHECK(seen.size() == 1000);
    }

    TEST_CASE("uniform and normal moments")
    {
        Rng rng(1);
        const int n = 200000;
        double su = 0, sn = 0, sn2 = 0;
        for (int i = 0; i < n; ++i) {
            const double u = rng.uniform();
            REQUIRE(u >= 0.0);
            REQUIRE(u < 1.0);
            su += u;
            const double z = rng.normal();
            sn += z;
            sn2 += z * z;
        }
        CHECK(std::fabs(su / n - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
        CHECK(std::fabs(sn / n) < 4 / std::sqrt(double(n)));
        CHECK(std::fabs(sn2 / n - 1.0) < 4 * std::sqrt(2.0 / n));
    }

    TEST_CASE("independent streams are uncorrelated")
    {
        Rng a(9, 1), b(9, 2);
        const int n = 100000;
        double s = 0;
        for (int i = 0; i < n; ++i)
            s += a.normal() * b.normal();
        CHECK(std::fabs(s / n) < 4 / std::sqrt(double(n)));
    }

    TEST_CASE("factor_cov2 identity, rank one and errors")
    {
        const auto f = factor_cov2({1, 0, 1});
        CHECK(f.f11 == 1.0);
        CHECK(f.f21 == 0.0);
        CHECK(f.f22 == 1.0);

        const auto r = factor_cov2({1, 1, 1});
        CHECK(r.f11 == 1.0);
        CHECK(r.f21 == 1.0);
        CHECK(r.f22 == 0.0);
        CHECK_FALSE(r.second_column_active());

        CHECK_THROWS_AS(factor_cov2({1, 2, 1}), NotPSD);
        CHECK_THROWS_AS(factor_cov2({-1, 0, 1}), NotPSD);
    }

    TEST_CASE("factor_cov2 of a singular HAMS covariance")
    {
        // c1 = 1, c2 = exp(-0.6) at eps = 0.6
        const double a1 = 0.2, a3 = std::exp(-0.6) * 1.8, a2 = std::sqrt(a1 * a3);
        const Cov2x2 cov{2 * a1 - a1 * a1 - a2 * a2, 2 * a2 - a1 * a2 - a2 * a3,
                         2 * a3 - a2 * a2 - a3 * a3};
        CHECK(cov.v11 == doctest::Approx(0.162428).epsilon(1e-6));
        const auto f = factor_cov2(cov);
        CHECK(std::fabs(f.f11 * f.f11 - cov.v11) < 1e-12);
        CHECK(std::fabs(f.f11 * f.f21 - cov.v12) < 1e-12);
        CHECK(std::fabs(f.f21 * f.f21 + f.f22 * f.f22 - cov.v22) < 1e-12);
    }

    TEST_CASE("factor_cov2 never fails on valid coefficients")
    {
        Rng rng(5);
        int checked = 0;
        for (int i = 0; i < 20000; ++i) {
            HamsCoeffs c{2 * rng.uniform(), 2 * rng.uniform() - 1, 2 * rng.uniform(), 0};
            if (!is_valid(c))
                continue;
            ++checked;
            CHECK_NOTHROW(factor_cov2(noise_cov(c)));
        }
        CHECK(checked > 1000);
        for (double eps : {0.05, 0.3, 0.6, 0.95}) {
            CHECK_NOTHROW(factor_cov2(noise_cov(hams_a_optimal(eps))));
            CHECK_NOTHROW(factor_cov2(noise_cov(hams_b_optimal(eps))));
            CHECK_NOTHROW(factor_cov2(noise_cov(hams_k_coeffs(eps, 2))));
        }
    }

    TEST_CASE("noise pair sampling")
    {
        Rng rng(11);
        const auto zero = sample_noise_pair(Factor2x2{}, 4, rng);
        for (int i = 0; i < 4; ++i) {
            CHECK(zero.z1[i] == 0.0);
            CHECK(zero.z2[i] == 0.0);
        }
        const auto rank1 = sample_noise_pair(factor_cov2({1, 1, 1}), 50, rng);
        for (int i = 0; i < 50; ++i)
            CHECK(rank1.z1[i] == rank1.z2[i]);

        // empirical covariance of a generic pair within 4 standard errors
        const Cov2x2 cov{0.7, -0.3, 0.5};
        const auto f = factor_cov2(cov);
        const std::size_t n = 1000000;
        const auto z = sample_noise_pair(f, n, rng);
        double s11 = 0, s12 = 0, s22 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            s11 += z.z1[i] * z.z1[i];
            s12 += z.z1[i] * z.z2[i];
            s22 += z.z2[i] * z.z2[i];
        }
        const double se11 = std::sqrt(2 * cov.v11 * cov.v11 / n);
        const double se22 = std::sqrt(2 * cov.v22 * cov.v22 / n);
        const double se12 = std::sqrt((cov.v11 * cov.v22 + cov.v12 * cov.v12) / n);
        CHECK(std::fabs(s11 / n - cov.v11) < 4 * se11);
        CHECK(std::fabs(s12 / n - cov.v12) < 4 * se12);
        CHECK(std::fabs(s22 / n - cov.v22) < 4 * se22);
    }

    TEST_CASE("identity noise factor gives identity covariance")
    {
        Rng rng(12);
        const std::size_t n = 1000000;
        const auto z = sample_noise_pair(factor_cov2({1, 0, 1}), n, rng);
        double s11 = 0, s12 = 0, s22 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            s11 += z.z1[i] * z.z1[i];
            s12 += z.z1[i] * z.z2[i];
            s22 += z.z2[i] * z.z2[i];
        }
        CHECK(std::fabs(s11 / n - 1) < 0.01);
        CHECK(std::fabs(s12 / n) < 0.01);
        CHECK(std::fabs(s22 / n - 1) < 0.01);
    }

    TEST_CASE("cholesky small cases")
    {
        const Cholesky id(Matrix::identity(3));
        CHECK(max_abs_diff(id.lower(), Matrix::identity(3)) == 0.0);

        Matrix m(2, 2);
        m(0, 0) = 4;
        m(0, 1) = m(1, 0) = 2;
        m(1, 1) = 3;
        const Cholesky ch(m);
        CHECK(ch.lower()(0, 0) == doctest::Approx(2.0));
        CHECK(ch.lower()(0, 1) == 0.0);
        CHECK(ch.lower()(1, 0) == doctest::Approx(1.0));
        CHECK(ch.lower()(1, 1) == doctest::Approx(std::sqrt(2.0)));

        const Vec x = ch.solve({1, 2});
        const Vec back = m.multiply(x);
        CHECK(back[0] == doctest::Approx(1.0));
        CHECK(back[1] == doctest::Approx(2.0));

        Matrix bad(2, 2);
        bad(0, 0) = 1;
        bad(0, 1) = bad(1, 0) = 2;
        bad(1, 1) = 1;
        CHECK_THROWS_AS(chol_dense(bad), NotPD);
    }

    TEST_CASE("cholesky of a long tridiagonal precision")
    {
        SvModel sv(Vec(1000, 0.1), SvParams{});
        const Matrix p = sv.precision_dense();
        const Cholesky ch(p);
        CHECK(max_abs_diff(ch.reconstruct(), p) <= 1e-9 * p.max_abs());

        // triangular solves against multiplication
        Rng rng(3);
        Vec b(1000);
        for (auto& v : b)
            v = rng.normal();
        Vec y = b;
        ch.solve_lower(y);
        ch.multiply_lower(y);
        double err = 0;
        for (std::size_t i = 0; i < b.size(); ++i)
            err = std::max(err, std::fabs(y[i] - b[i]));
        CHECK(err < 1e-9);
        y = b;
        ch.solve_upper(y);
        ch.multiply_upper(y);
        err = 0;
        for (std::size_t i = 0; i < b.size(); ++i)
            err = std::max(err, std::fabs(y[i] - b[i]));
        CHECK(err < 1e-9);
    }

    TEST_CASE("cholesky inverse of a dense random SPD matrix")
    {
        Rng rng(8);
        const std::size_t n = 30;
        Matrix g(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                g(i, j) = rng.normal();
        Matrix m = g.multiply(g.transpose());
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) += n;
        const Cholesky ch(m);
        CHECK(max_abs_diff(ch.reconstruct(), m) <= 1e-9 * m.max_abs());
        CHECK(max_abs_diff(m.multiply(ch.inverse()), Matrix::identity(n)) < 1e-10);
    }
}
