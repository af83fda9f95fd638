#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace hams {

using Vec = std::vector<double>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define HAMS_DEFINE_ERROR(name) \
    class name : public Error { \
    public: \
        using Error::Error; \
    }

HAMS_DEFINE_ERROR(NotPSD);
HAMS_DEFINE_ERROR(NotPD);
HAMS_DEFINE_ERROR(NonFinite);
HAMS_DEFINE_ERROR(Degenerate);
HAMS_DEFINE_ERROR(InvalidParams);
HAMS_DEFINE_ERROR(SingularCovariance);
HAMS_DEFINE_ERROR(ConstraintViolation);
HAMS_DEFINE_ERROR(Unsupported);
HAMS_DEFINE_ERROR(ZeroVariance);
HAMS_DEFINE_ERROR(DegenerateBetween);
HAMS_DEFINE_ERROR(TuningFailed);

#undef HAMS_DEFINE_ERROR

// xoshiro256** seeded through splitmix64. Stream r is the base sequence
// advanced by r jumps of 2^128 draws, so streams never overlap in practice.
class Rng {
public:
    using result_type = std::uint64_t;

    static constexpr std::uint64_t max_stream = 1u << 20;

    explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type(0); }

    result_type operator()();

    // Uniform on [0, 1) with 53 random bits.
    double uniform();
    double normal();

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    void jump();

    std::uint64_t s_[4];
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::normal_distribution<double> normal_;
};

struct PhaseState {
    Vec x;
    Vec u;
};

struct NoisePair {
    Vec z1;
    Vec z2;
};

struct Cov2x2 {
    double v11 = 0.0;
    double v12 = 0.0;
    double v22 = 0.0;
};

// Lower-triangular F with F F^T = cov. A zero column marks a rank-deficient
// direction; no normal draw is spent on it.
struct Factor2x2 {
    double f11 = 0.0;
    double f21 = 0.0;
    double f22 = 0.0;

    bool first_column_active() const { return f11 != 0.0 || f21 != 0.0; }
    bool second_column_active() const { return f22 != 0.0; }
};

inline constexpr double psd_tolerance = 1e-12;

Factor2x2 factor_cov2(const Cov2x2& cov);

NoisePair sample_noise_pair(const Factor2x2& factor, std::size_t k, Rng& rng);

// Fills z1, z2 (already sized) coordinate by coordinate, drawing the first
// column's normal before the second for each coordinate.
void sample_noise_pair_into(const Factor2x2& factor, Rng& rng, Vec& z1, Vec& z2);

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    const double* row(std::size_t i) const { return a_.data() + i * cols_; }
    double* row(std::size_t i) { return a_.data() + i * cols_; }

    Vec multiply(const Vec& v) const;
    void multiply_into(const Vec& v, Vec& out) const;
    Matrix multiply(const Matrix& other) const;
    Matrix transpose() const;

    double max_abs() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> a_;
};

double max_abs_diff(const Matrix& a, const Matrix& b);

// Unblocked row-oriented Cholesky. The row envelope (first nonzero column) of
// the input is preserved by the factor, so banded inputs give banded solves.
class Cholesky {
public:
    explicit Cholesky(const Matrix& m);

    const Matrix& lower() const { return l_; }
    std::size_t size() const { return l_.rows(); }

    // In place: b <- L^{-1} b.
    void solve_lower(Vec& b) const;
    // In place: b <- L^{-T} b.
    void solve_upper(Vec& b) const;
    // Returns M^{-1} b.
    Vec solve(const Vec& b) const;
    // b <- L^T b and b <- L b.
    void multiply_upper(Vec& b) const;
    void multiply_lower(Vec& b) const;

    Matrix inverse() const;
    Matrix reconstruct() const;

private:
    Matrix l_;
    std::vector<std::size_t> first_;
};

Cholesky chol_dense(const Matrix& m);

inline double dot(const Vec& a, const Vec& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return dot(a, a); }

}  // namespace hams
