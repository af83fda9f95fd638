#pragma once

#include <cmath>
#include <memory>
#include <string>

#include "hams/core.hpp"

namespace hams {

// Potential/gradient contract for pi(x) proportional to exp(-U(x)).
class TargetModel {
public:
    virtual ~TargetModel() = default;

    virtual std::size_t dim() const = 0;
    virtual double potential(const Vec& x) const = 0;
    // Returns U(x) and writes the gradient into grad (resized as needed).
    virtual double evaluate(const Vec& x, Vec& grad) const = 0;

    virtual bool has_hessian_diag() const { return false; }
    virtual void hessian_diag(const Vec& x, Vec& h) const;

    Vec gradient(const Vec& x) const
    {
        Vec g;
        evaluate(x, g);
        return g;
    }
};

struct Evaluation {
    double U;
    Vec grad;
};

Evaluation evaluate(const TargetModel& model, const Vec& x);

// Arguments of exp above this bound signal a divergent chain.
inline constexpr double exp_guard = 700.0;

inline double guarded_exp(double a)
{
    if (!(a <= exp_guard))
        throw NonFinite("exponent argument beyond guard");
    return std::exp(a);
}

class GaussianTarget : public TargetModel {
public:
    GaussianTarget(double gamma, std::size_t dim);

    std::size_t dim() const override { return dim_; }
    double potential(const Vec& x) const override;
    double evaluate(const Vec& x, Vec& grad) const override;
    bool has_hessian_diag() const override { return true; }
    void hessian_diag(const Vec& x, Vec& h) const override;

    double gamma() const { return gamma_; }

private:
    double gamma_;
    std::size_t dim_;
};

// Zero-mean Gaussian with a dense precision matrix.
class PrecisionGaussianTarget : public TargetModel {
public:
    explicit PrecisionGaussianTarget(Matrix precision);

    std::size_t dim() const override { return p_.rows(); }
    double potential(const Vec& x) const override;
    double evaluate(const Vec& x, Vec& grad) const override;

    const Matrix& precision() const { return p_; }

private:
    Matrix p_;
};

class DoubleWellTarget : public TargetModel {
public:
    explicit DoubleWellTarget(double temperature = 1.0);

    std::size_t dim() const override { return 1; }
    double potential(const Vec& x) const override;
    double evaluate(const Vec& x, Vec& grad) const override;
    bool has_hessian_diag() const override { return true; }
    void hessian_diag(const Vec& x, Vec& h) const override;

    double temperature() const { return t_; }
    double u(double x) const { return ((x * x - 1.0) * (x * x - 1.0) + x) / t_; }
    double du(double x) const { return (4.0 * x * (x * x - 1.0) + 1.0) / t_; }
    double d2u(double x) const { return (12.0 * x * x - 4.0) / t_; }

private:
    double t_;
};

struct SvParams {
    double beta = 0.65;
    double sigma = 0.15;
    double varphi = 0.98;
};

struct SvData {
    Vec x_true;
    Vec y;
};

class SvModel : public TargetModel {
public:
    SvModel(Vec y, SvParams params);

    std::size_t dim() const override { return y_.size(); }
    double potential(const Vec& x) const override;
    double evaluate(const Vec& x, Vec& grad) const override;
    bool has_hessian_diag() const override { return true; }
    void hessian_diag(const Vec& x, Vec& h) const override;

    const SvParams& params() const { return p_; }
    const Vec& y() const { return y_; }
    // Tridiagonal AR(1) precision: diagonal and first off-diagonal.
    const Vec& precision_diag() const { return diag_; }
    double precision_off() const { return off_; }

    void precision_times(const Vec& x, Vec& out) const;
    Matrix precision_dense() const;

private:
    Vec y_;
    Vec y2_;
    SvParams p_;
    Vec diag_;
    double off_;
};

SvData simulate_sv(std::size_t t_len, const SvParams& params, Rng& rng);

struct CoxParams {
    std::size_t m = 16;
    double sigma2 = 1.91;
    double beta = 1.0 / 33.0;
    double mu = std::log(126.0) - 0.955;
};

struct CoxData {
    Vec x_true;
    Vec y;
};

Matrix cox_covariance(const CoxParams& params);

class CoxModel : public TargetModel {
public:
    CoxModel(Vec y, CoxParams params);

    std::size_t dim() const override { return y_.size(); }
    double potential(const Vec& x) const override;
    double evaluate(const Vec& x, Vec& grad) const override;
    bool has_hessian_diag() const override { return true; }
    void hessian_diag(const Vec& x, Vec& h) const override;

    const CoxParams& params() const { return p_; }
    const Vec& y() const { return y_; }
    const Matrix& covariance() const { return c_; }
    const Matrix& precision() const { return prec_; }

private:
    Vec y_;
    CoxParams p_;
    Matrix c_;
    Matrix prec_;
};

CoxData simulate_cox(const CoxParams& params, Rng& rng);

// Sigma-hat for preconditioning (SV and Cox only).
Matrix preconditioner_matrix(const TargetModel& model);
// Its inverse, built without inverting Sigma-hat (tridiagonal for SV).
Matrix preconditioner_precision(const TargetModel& model);

// CSV with columns index, x_true, y.
void write_data_csv(const std::string& path, const Vec& x_true, const Vec& y);
void read_data_csv(const std::string& path, Vec& x_true, Vec& y);

// Largest relative deviation between the gradient and centered differences.
double gradient_fd_error(const TargetModel& model, const Vec& x, double step = 1e-5);

}  // namespace hams
