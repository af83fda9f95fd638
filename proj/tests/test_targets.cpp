#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "hams/targets.hpp"

using namespace hams;

namespace {

Vec random_vec(std::size_t n, Rng& rng, double scale = 1.0)
{
    Vec v(n);
    for (auto& x : v)
        x = scale * rng.normal();
    return v;
}

// -2 log of the AR(1) prior up to constants, straight from the recursion.
double ar1_quadratic(const Vec& x, const SvParams& p)
{
    const double s2 = p.sigma * p.sigma;
    double q = x[0] * x[0] * (1 - p.varphi * p.varphi) / s2;
    for (std::size_t t = 1; t < x.size(); ++t) {
        const double r = x[t] - p.varphi * x[t - 1];
        q += r * r / s2;
    }
    return q;
}

}  // namespace

TEST_SUITE("targets")
{
    TEST_CASE("trivial potentials")
    {
        DoubleWellTarget dw;
        const auto e = evaluate(dw, {0.0});
        CHECK(e.U == 1.0);
        CHECK(e.grad[0] == 1.0);
        CHECK(dw.potential({-1.0}) == -1.0);
        CHECK(dw.potential({1.0}) == 1.0);

        GaussianTarget g(2.0, 2);
        const auto eg = evaluate(g, {1.0, -1.0});
        CHECK(eg.U == 2.0);
        CHECK(eg.grad[0] == 2.0);
        CHECK(eg.grad[1] == -2.0);
    }

    TEST_CASE("gradients agree with finite differences")
    {
        Rng rng(21);
        SvParams sp;
        SvModel sv(random_vec(30, rng, 0.5), sp);
        CoxParams cp;
        cp.m = 4;
        Vec counts(16);
        for (auto& c : counts)
            c = std::floor(3 * rng.uniform());
        CoxModel cox(counts, cp);
        DoubleWellTarget dw(0.7);
        GaussianTarget gauss(3.0, 5);
        Matrix prec = Matrix::identity(3);
        prec(0, 1) = prec(1, 0) = 0.4;
        PrecisionGaussianTarget pg(prec);

        for (int i = 0; i < 20; ++i) {
            CHECK(gradient_fd_error(sv, random_vec(30, rng, 0.5)) < 1e-5);
            CHECK(gradient_fd_error(cox, random_vec(16, rng, 0.5)) < 1e-5);
            CHECK(gradient_fd_error(dw, random_vec(1, rng)) < 1e-5);
            CHECK(gradient_fd_error(gauss, random_vec(5, rng)) < 1e-5);
            CHECK(gradient_fd_error(pg, random_vec(3, rng)) < 1e-5);
        }

        SvModel small({0.1, 0.2, 0.3}, SvParams{0.65, 0.15, 0.98});
        CHECK(gradient_fd_error(small, {0.0, 0.0, 0.0}) < 1e-5);
    }

    TEST_CASE("SV gradient closed form")
    {
        const SvParams p{0.65, 0.15, 0.98};
        const Vec y{0.3, -0.5, 1.1, 0.05};
        SvModel sv(y, p);
        const Vec x{0.2, -0.4, 0.1, 0.7};
        const Vec g = sv.gradient(x);
        Vec cx;
        sv.precision_times(x, cx);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double expect =
                cx[i] - 0.5 * y[i] * y[i] * std::exp(-x[i]) / (p.beta * p.beta) + 0.5;
            CHECK(g[i] == doctest::Approx(expect).epsilon(1e-12));
        }
    }

    TEST_CASE("SV precision matches the AR(1) recursion")
    {
        Rng rng(2);
        for (std::size_t t_len : {2, 7, 50}) {
            for (double varphi : {0.0, 0.5, 0.98}) {
                SvParams p{0.65, 0.15, varphi};
                SvModel sv(Vec(t_len, 1.0), p);
                const Vec x = random_vec(t_len, rng, 0.3);
                Vec cx;
                sv.precision_times(x, cx);
                double q = 0;
                for (std::size_t i = 0; i < t_len; ++i)
                    q += x[i] * cx[i];
                const double oracle = ar1_quadratic(x, p);
                CHECK(std::fabs(q - oracle) <= 1e-9 * std::max(1.0, std::fabs(oracle)));
            }
        }
    }

    TEST_CASE("simulate_sv")
    {
        Rng rng(4);
        SvParams tiny{0.65, 1e-12, 0.98};
        Rng r1(10), r2(10);
        const auto d = simulate_sv(20, tiny, r1);
        for (double v : d.x_true)
            CHECK(std::fabs(v) < 1e-9);
        // y_t = beta * z_t: replay the normals
        r2.normal();
        for (int t = 1; t < 20; ++t)
            r2.normal();
        for (int t = 0; t < 20; ++t)
            CHECK(d.y[t] == doctest::Approx(0.65 * r2.normal()).epsilon(1e-9));

        Rng a(77), b(77);
        const auto da = simulate_sv(50, SvParams{}, a);
        const auto db = simulate_sv(50, SvParams{}, b);
        CHECK(da.x_true == db.x_true);
        CHECK(da.y == db.y);

        // E[x_t^2] = sigma^2 / (1 - varphi^2) at stationarity
        double acc = 0;
        const int reps = 200;
        for (int r = 0; r < reps; ++r) {
            const auto s = simulate_sv(1000, SvParams{}, rng);
            double m2 = 0;
            for (double v : s.x_true)
                m2 += v * v;
            acc += m2 / 1000;
        }
        const double target = 0.15 * 0.15 / (1 - 0.98 * 0.98);
        CHECK(target == doctest::Approx(0.5682).epsilon(1e-3));
        CHECK(std::fabs(acc / reps - target) < 0.1 * target);

        CHECK_THROWS_AS(simulate_sv(10, SvParams{0.65, 0.15, 1.0}, rng), InvalidParams);
    }

    TEST_CASE("cox covariance and simulation")
    {
        CoxParams p;
        p.m = 4;
        const Matrix c = cox_covariance(p);
        for (std::size_t i = 0; i < 16; ++i) {
            CHECK(c(i, i) == p.sigma2);
            for (std::size_t j = 0; j < 16; ++j)
                CHECK(c(i, j) == c(j, i));
        }
        // neighbours at unit distance
        CHECK(c(0, 1) == doctest::Approx(p.sigma2 * std::exp(-1.0 / (4 * p.beta))));
        CHECK(c(0, 5) == doctest::Approx(p.sigma2 * std::exp(-std::sqrt(2.0) / (4 * p.beta))));

        Rng rng(6);
        const auto d = simulate_cox(p, rng);
        for (double y : d.y) {
            CHECK(y >= 0);
            CHECK(y == std::floor(y));
        }
    }

    TEST_CASE("cox degenerate field gives Poisson(exp(mu) / n) counts")
    {
        CoxParams p;
        p.m = 2;
        p.sigma2 = 1e-12;
        Rng rng(8);
        double sum = 0, maxabs = 0;
        const int reps = 2000;
        for (int r = 0; r < reps; ++r) {
            const auto d = simulate_cox(p, rng);
            for (std::size_t i = 0; i < 4; ++i) {
                sum += d.y[i];
                maxabs = std::max(maxabs, std::fabs(d.x_true[i]));
            }
        }
        const double lam = std::exp(p.mu) / 4;
        CHECK(maxabs < 1e-4);
        CHECK(std::fabs(sum / (4.0 * reps) - lam) < 4 * std::sqrt(lam / (4.0 * reps)));
    }

    TEST_CASE("cox field statistics")
    {
        Rng rng(9);
        CoxParams p;
        p.m = 16;
        double mean_y = 0;
        for (int r = 0; r < 20; ++r) {
            const auto d = simulate_cox(p, rng);
            for (double y : d.y)
                mean_y += y;
        }
        mean_y /= 20.0 * 256;
        const double lognormal_mean = std::exp(p.mu + p.sigma2 / 2) / 256;
        CHECK(std::fabs(mean_y - lognormal_mean) < 0.5 * lognormal_mean);

        // nearest-neighbour correlation on a smoother field
        CoxParams q;
        q.m = 8;
        q.beta = 0.5;
        double cov = 0;
        std::size_t pairs = 0;
        for (int r = 0; r < 300; ++r) {
            const auto d = simulate_cox(q, rng);
            for (std::size_t i = 0; i < 8; ++i)
                for (std::size_t j = 0; j + 1 < 8; ++j) {
                    cov += d.x_true[i * 8 + j] * d.x_true[i * 8 + j + 1];
                    ++pairs;
                }
        }
        const double corr = cov / double(pairs) / q.sigma2;
        const double expect = std::exp(-1.0 / (8 * 0.5));
        CHECK(std::fabs(corr - expect) < 0.1 * expect);
    }

    TEST_CASE("cox potential at truth and the posterior mode")
    {
        CoxParams p;
        p.m = 4;
        Rng rng(13);
        const auto d = simulate_cox(p, rng);
        CoxModel model(d.y, p);
        CHECK(std::isfinite(model.potential(d.x_true)));

        // damped Newton with the exact Hessian C^{-1} + diag(lambda)
        Vec x(16, 0.0);
        for (int it = 0; it < 50; ++it) {
            Vec g = model.gradient(x);
            Matrix h = model.precision();
            Vec hd;
            model.hessian_diag(x, hd);
            for (std::size_t i = 0; i < 16; ++i)
                h(i, i) = hd[i];
            const Vec step = Cholesky(h).solve(g);
            double t = 1.0;
            const double u0 = model.potential(x);
            while (t > 1e-8) {
                Vec xn = x;
                for (std::size_t i = 0; i < 16; ++i)
                    xn[i] -= t * step[i];
                if (model.potential(xn) <= u0) {
                    x = xn;
                    break;
                }
                t *= 0.5;
            }
        }
        const Vec g = model.gradient(x);
        CHECK(std::sqrt(norm2(g)) < 1e-6);
    }

    TEST_CASE("overflow raises NonFinite")
    {
        SvModel sv({1.0, 1.0}, SvParams{});
        CHECK_THROWS_AS(sv.potential({-800.0, 0.0}), NonFinite);
        CoxParams p;
        p.m = 2;
        CoxModel cox(Vec(4, 1.0), p);
        CHECK_THROWS_AS(cox.potential({800.0, 0, 0, 0}), NonFinite);
    }

    TEST_CASE("preconditioner matrices")
    {
        SvParams p{0.65, 0.15, 0.0};
        SvModel iid(Vec(6, 0.2), p);
        const Matrix s = preconditioner_matrix(iid);
        const double expect = 1.0 / (1.0 / (0.15 * 0.15) + 0.5);
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t j = 0; j < 6; ++j)
                CHECK(s(i, j) == doctest::Approx(i == j ? expect : 0.0).epsilon(1e-12));

        SvModel sv(Vec(5, 0.2), SvParams{0.65, 0.15, 0.98});
        Matrix prec = sv.precision_dense();
        for (std::size_t i = 0; i < 5; ++i)
            prec(i, i) += 0.5;
        CHECK(max_abs_diff(preconditioner_matrix(sv).multiply(prec), Matrix::identity(5)) < 1e-9);

        CoxParams cp;
        cp.m = 4;
        CoxModel cox(Vec(16, 1.0), cp);
        const Matrix sc = preconditioner_matrix(cox);
        for (std::size_t i = 0; i < 16; ++i)
            for (std::size_t j = 0; j < 16; ++j)
                CHECK(sc(i, j) == doctest::Approx(sc(j, i)).epsilon(1e-12));
        Matrix cprec = cox.precision();
        for (std::size_t i = 0; i < 16; ++i)
            cprec(i, i) += (cp.sigma2 / 2 + cp.mu) / 16.0;
        CHECK(max_abs_diff(sc.multiply(cprec), Matrix::identity(16)) < 1e-9);
        CHECK_NOTHROW(Cholesky{sc});

        CHECK_THROWS_AS(preconditioner_matrix(DoubleWellTarget{}), Unsupported);
    }

    TEST_CASE("data csv round trip")
    {
        const auto path = std::filesystem::temp_directory_path() / "hams_data_roundtrip.csv";
        const Vec x{0.5, -1.25, 3.0}, y{1, 0, 7};
        write_data_csv(path.string(), x, y);
        Vec xr, yr;
        read_data_csv(path.string(), xr, yr);
        CHECK(xr == x);
        CHECK(yr == y);
        std::filesystem::remove(path);
    }
}
