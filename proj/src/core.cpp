#include "hams/core.hpp"

#include <algorithm>
#include <cmath>

namespace hams {

namespace {

std::uint64_t splitmix64(std::uint64_t& x)
{
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream)
{
    if (stream >= max_stream)
        throw InvalidParams("rng stream id too large");
    std::uint64_t x = seed;
    for (auto& s : s_)
        s = splitmix64(x);
    for (std::uint64_t r = 0; r < stream; ++r)
        jump();
}

Rng::result_type Rng::operator()()
{
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

void Rng::jump()
{
    static constexpr std::uint64_t poly[] = {0x180ec6d33cfd0abaULL, 0xd5a61266f0c9392cULL,
                                             0xa9582618e03fc9aaULL, 0x39abdc4529b1661cULL};
    std::uint64_t t[4] = {0, 0, 0, 0};
    for (std::uint64_t p : poly) {
        for (int b = 0; b < 64; ++b) {
            if (p & (std::uint64_t(1) << b)) {
                for (int i = 0; i < 4; ++i)
                    t[i] ^= s_[i];
            }
            (*this)();
        }
    }
    for (int i = 0; i < 4; ++i)
        s_[i] = t[i];
}

double Rng::uniform() { return double((*this)() >> 11) * 0x1.0p-53; }

double Rng::normal() { return normal_(*this); }

Factor2x2 factor_cov2(const Cov2x2& c)
{
    if (c.v11 < -psd_tolerance || c.v22 < -psd_tolerance ||
        c.v11 * c.v22 - c.v12 * c.v12 < -psd_tolerance)
        throw NotPSD("2x2 covariance is not positive semidefinite");

    Factor2x2 f;
    if (c.v11 < psd_tolerance) {
        // first pivot vanishes: z1 is degenerate, the noise lives in z2 only
        f.f22 = std::sqrt(std::max(c.v22, 0.0));
        return f;
    }
    f.f11 = std::sqrt(c.v11);
    f.f21 = c.v12 / f.f11;
    const double pivot = c.v22 - f.f21 * f.f21;
    f.f22 = pivot < psd_tolerance ? 0.0 : std::sqrt(pivot);
    return f;
}

void sample_noise_pair_into(const Factor2x2& f, Rng& rng, Vec& z1, Vec& z2)
{
    const bool c1 = f.first_column_active();
    const bool c2 = f.second_column_active();
    for (std::size_t i = 0; i < z1.size(); ++i) {
        const double e1 = c1 ? rng.normal() : 0.0;
        const double e2 = c2 ? rng.normal() : 0.0;
        z1[i] = f.f11 * e1;
        z2[i] = f.f21 * e1 + f.f22 * e2;
    }
}

NoisePair sample_noise_pair(const Factor2x2& factor, std::size_t k, Rng& rng)
{
    NoisePair z{Vec(k), Vec(k)};
    sample_noise_pair_into(factor, rng, z.z1, z.z2);
    return z;
}

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), a_(rows * cols, fill)
{
}

Matrix Matrix::identity(std::size_t n)
{
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        m(i, i) = 1.0;
    return m;
}

void Matrix::multiply_into(const Vec& v, Vec& out) const
{
    out.assign(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        const double* r = row(i);
        double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
        std::size_t j = 0;
        for (; j + 4 <= cols_; j += 4) {
            s0 += r[j] * v[j];
            s1 += r[j + 1] * v[j + 1];
            s2 += r[j + 2] * v[j + 2];
            s3 += r[j + 3] * v[j + 3];
        }
        for (; j < cols_; ++j)
            s0 += r[j] * v[j];
        out[i] = (s0 + s1) + (s2 + s3);
    }
}

Vec Matrix::multiply(const Vec& v) const
{
    Vec out;
    multiply_into(v, out);
    return out;
}

Matrix Matrix::multiply(const Matrix& o) const
{
    Matrix out(rows_, o.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = 0; k < cols_; ++k) {
            const double a = (*this)(i, k);
            if (a == 0.0)
                continue;
            for (std::size_t j = 0; j < o.cols_; ++j)
                out(i, j) += a * o(k, j);
        }
    return out;
}

Matrix Matrix::transpose() const
{
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j)
            t(j, i) = (*this)(i, j);
    return t;
}

double Matrix::max_abs() const
{
    double m = 0.0;
    for (double v : a_)
        m = std::max(m, std::abs(v));
    return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            m = std::max(m, std::abs(a(i, j) - b(i, j)));
    return m;
}

Cholesky::Cholesky(const Matrix& m) : l_(m.rows(), m.rows()), first_(m.rows(), 0)
{
    const std::size_t n = m.rows();
    if (m.cols() != n)
        throw InvalidParams("cholesky: matrix is not square");
    const double scale = std::max(m.max_abs(), 1e-300);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(m(i, j) - m(j, i)) > 1e-10 * scale)
                throw InvalidParams("cholesky: matrix is not symmetric");

    for (std::size_t i = 0; i < n; ++i) {
        std::size_t f = 0;
        while (f < i && m(i, f) == 0.0)
            ++f;
        first_[i] = f;
    }

    for (std::size_t i = 0; i < n; ++i) {
        double* li = l_.row(i);
        for (std::size_t j = first_[i]; j <= i; ++j) {
            const double* lj = l_.row(j);
            double s = m(i, j);
            for (std::size_t k = std::max(first_[i], first_[j]); k < j; ++k)
                s -= li[k] * lj[k];
            if (j < i) {
                li[j] = s / lj[j];
            } else {
                if (!(s > 0.0))
                    throw NotPD("cholesky: nonpositive pivot at row " + std::to_string(i));
                li[i] = std::sqrt(s);
            }
        }
    }
}

void Cholesky::solve_lower(Vec& b) const
{
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
        const double* li = l_.row(i);
        double s = b[i];
        for (std::size_t k = first_[i]; k < i; ++k)
            s -= li[k] * b[k];
        b[i] = s / li[i];
    }
}

void Cholesky::solve_upper(Vec& b) const
{
    const std::size_t n = size();
    for (std::size_t i = n; i-- > 0;) {
        const double* li = l_.row(i);
        b[i] /= li[i];
        const double bi = b[i];
        for (std::size_t k = first_[i]; k < i; ++k)
            b[k] -= li[k] * bi;
    }
}

Vec Cholesky::solve(const Vec& b) const
{
    Vec y = b;
    solve_lower(y);
    solve_upper(y);
    return y;
}

void Cholesky::multiply_upper(Vec& b) const
{
    const std::size_t n = size();
    Vec out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* li = l_.row(i);
        for (std::size_t k = first_[i]; k <= i; ++k)
            out[k] += li[k] * b[i];
    }
    b.swap(out);
}

void Cholesky::multiply_lower(Vec& b) const
{
    const std::size_t n = size();
    Vec out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* li = l_.row(i);
        double s = 0.0;
        for (std::size_t k = first_[i]; k <= i; ++k)
            s += li[k] * b[k];
        out[i] = s;
    }
    b.swap(out);
}

Matrix Cholesky::inverse() const
{
    const std::size_t n = size();
    Matrix inv(n, n);
    Vec e(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::fill(e.begin(), e.end(), 0.0);
        e[j] = 1.0;
        solve_lower(e);
        solve_upper(e);
        for (std::size_t i = 0; i < n; ++i)
            inv(i, j) = e[i];
    }
    // symmetrize away rounding asymmetry
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) {
            const double v = 0.5 * (inv(i, j) + inv(j, i));
            inv(i, j) = v;
            inv(j, i) = v;
        }
    return inv;
}

Matrix Cholesky::reconstruct() const { return l_.multiply(l_.transpose()); }

Cholesky chol_dense(const Matrix& m) { return Cholesky(m); }

}  // namespace hams
