#include "hams/targets.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace hams {

void TargetModel::hessian_diag(const Vec&, Vec&) const
{
    throw Unsupported("model does not expose a Hessian diagonal");
}

Evaluation evaluate(const TargetModel& model, const Vec& x)
{
    if (x.size() != model.dim())
        throw InvalidParams("evaluate: dimension mismatch");
    Evaluation e;
    e.U = model.evaluate(x, e.grad);
    return e;
}

namespace {

void check_finite(double u)
{
    if (!std::isfinite(u))
        throw NonFinite("potential is not finite");
}

}  // namespace

GaussianTarget::GaussianTarget(double gamma, std::size_t dim) : gamma_(gamma), dim_(dim)
{
    if (!(gamma > 0.0) || dim == 0)
        throw InvalidParams("gaussian target needs gamma > 0 and dim >= 1");
}

double GaussianTarget::potential(const Vec& x) const { return 0.5 * gamma_ * norm2(x); }

double GaussianTarget::evaluate(const Vec& x, Vec& grad) const
{
    grad.resize(dim_);
    for (std::size_t i = 0; i < dim_; ++i)
        grad[i] = gamma_ * x[i];
    const double u = 0.5 * gamma_ * norm2(x);
    check_finite(u);
    return u;
}

void GaussianTarget::hessian_diag(const Vec&, Vec& h) const { h.assign(dim_, gamma_); }

PrecisionGaussianTarget::PrecisionGaussianTarget(Matrix precision) : p_(std::move(precision))
{
    Cholesky check(p_);
    (void)check;
}

double PrecisionGaussianTarget::potential(const Vec& x) const
{
    Vec px;
    p_.multiply_into(x, px);
    return 0.5 * dot(x, px);
}

double PrecisionGaussianTarget::evaluate(const Vec& x, Vec& grad) const
{
    p_.multiply_into(x, grad);
    const double u = 0.5 * dot(x, grad);
    check_finite(u);
    return u;
}

DoubleWellTarget::DoubleWellTarget(double temperature) : t_(temperature)
{
    if (!(temperature > 0.0))
        throw InvalidParams("double well needs T > 0");
}

double DoubleWellTarget::potential(const Vec& x) const
{
    const double v = u(x[0]);
    check_finite(v);
    return v;
}

double DoubleWellTarget::evaluate(const Vec& x, Vec& grad) const
{
    grad.resize(1);
    grad[0] = du(x[0]);
    return potential(x);
}

void DoubleWellTarget::hessian_diag(const Vec& x, Vec& h) const
{
    h.assign(1, d2u(x[0]));
}

SvModel::SvModel(Vec y, SvParams params) : y_(std::move(y)), p_(params)
{
    const std::size_t t = y_.size();
    if (t == 0)
        throw InvalidParams("sv model needs at least one observation");
    if (!(std::abs(p_.varphi) < 1.0) || !(p_.sigma > 0.0) || !(p_.beta > 0.0))
        throw InvalidParams("sv model parameters out of range");
    y2_.resize(t);
    for (std::size_t i = 0; i < t; ++i)
        y2_[i] = y_[i] * y_[i] / (p_.beta * p_.beta);
    const double s2 = p_.sigma * p_.sigma;
    diag_.assign(t, (1.0 + p_.varphi * p_.varphi) / s2);
    diag_.front() = 1.0 / s2;
    diag_.back() = 1.0 / s2;
    if (t == 1)
        diag_[0] = (1.0 - p_.varphi * p_.varphi) / s2;
    off_ = -p_.varphi / s2;
}

void SvModel::precision_times(const Vec& x, Vec& out) const
{
    const std::size_t t = x.size();
    out.resize(t);
    for (std::size_t i = 0; i < t; ++i) {
        double s = diag_[i] * x[i];
        if (i > 0)
            s += off_ * x[i - 1];
        if (i + 1 < t)
            s += off_ * x[i + 1];
        out[i] = s;
    }
}

Matrix SvModel::precision_dense() const
{
    const std::size_t t = dim();
    Matrix p(t, t);
    for (std::size_t i = 0; i < t; ++i) {
        p(i, i) = diag_[i];
        if (i + 1 < t) {
            p(i, i + 1) = off_;
            p(i + 1, i) = off_;
        }
    }
    return p;
}

double SvModel::potential(const Vec& x) const
{
    Vec px;
    return evaluate(x, px);
}

double SvModel::evaluate(const Vec& x, Vec& grad) const
{
    precision_times(x, grad);
    double quad = 0.0;
    double obs = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        quad += x[i] * grad[i];
        const double e = y2_[i] * guarded_exp(-x[i]);
        obs += x[i] + e;
        grad[i] += 0.5 - 0.5 * e;
    }
    const double u = 0.5 * quad + 0.5 * obs;
    check_finite(u);
    return u;
}

void SvModel::hessian_diag(const Vec& x, Vec& h) const
{
    h.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        h[i] = diag_[i] + 0.5 * y2_[i] * guarded_exp(-x[i]);
}

SvData simulate_sv(std::size_t t_len, const SvParams& p, Rng& rng)
{
    if (!(std::abs(p.varphi) < 1.0) || !(p.sigma > 0.0) || !(p.beta > 0.0) || t_len == 0)
        throw InvalidParams("simulate_sv parameters out of range");
    SvData d{Vec(t_len), Vec(t_len)};
    d.x_true[0] = p.sigma / std::sqrt(1.0 - p.varphi * p.varphi) * rng.normal();
    for (std::size_t t = 1; t < t_len; ++t)
        d.x_true[t] = p.varphi * d.x_true[t - 1] + p.sigma * rng.normal();
    for (std::size_t t = 0; t < t_len; ++t)
        d.y[t] = rng.normal() * p.beta * std::exp(0.5 * d.x_true[t]);
    return d;
}

Matrix cox_covariance(const CoxParams& p)
{
    if (p.m < 2 || !(p.sigma2 > 0.0) || !(p.beta > 0.0))
        throw InvalidParams("cox parameters out of range");
    const std::size_t m = p.m;
    const std::size_t n = m * m;
    Matrix c(n, n);
    const double scale = double(m) * p.beta;
    for (std::size_t a = 0; a < n; ++a) {
        const double ia = double(a / m), ja = double(a % m);
        for (std::size_t b = 0; b <= a; ++b) {
            const double ib = double(b / m), jb = double(b % m);
            const double d = std::sqrt((ia - ib) * (ia - ib) + (ja - jb) * (ja - jb));
            const double v = p.sigma2 * std::exp(-d / scale);
            c(a, b) = v;
            c(b, a) = v;
        }
    }
    return c;
}

namespace {

Cholesky jittered_cholesky(Matrix c, double sigma2)
{
    try {
        return Cholesky(c);
    } catch (const NotPD&) {
        for (std::size_t i = 0; i < c.rows(); ++i)
            c(i, i) += 1e-10 * sigma2;
        return Cholesky(c);
    }
}

}  // namespace

CoxModel::CoxModel(Vec y, CoxParams params)
    : y_(std::move(y)), p_(params), c_(cox_covariance(params))
{
    if (y_.size() != p_.m * p_.m)
        throw InvalidParams("cox model: count vector has wrong length");
    prec_ = jittered_cholesky(c_, p_.sigma2).inverse();
}

double CoxModel::potential(const Vec& x) const
{
    Vec g;
    return evaluate(x, g);
}

double CoxModel::evaluate(const Vec& x, Vec& grad) const
{
    prec_.multiply_into(x, grad);
    const double inv_n = 1.0 / double(x.size());
    double quad = 0.0;
    double lik = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        quad += x[i] * grad[i];
        const double lam = inv_n * guarded_exp(x[i] + p_.mu);
        lik += y_[i] * x[i] - lam;
        grad[i] += lam - y_[i];
    }
    const double u = 0.5 * quad - lik;
    check_finite(u);
    return u;
}

void CoxModel::hessian_diag(const Vec& x, Vec& h) const
{
    const double inv_n = 1.0 / double(x.size());
    h.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        h[i] = prec_(i, i) + inv_n * guarded_exp(x[i] + p_.mu);
}

CoxData simulate_cox(const CoxParams& p, Rng& rng)
{
    const Matrix c = cox_covariance(p);
    const Cholesky l = jittered_cholesky(c, p.sigma2);
    const std::size_t n = c.rows();
    CoxData d{Vec(n), Vec(n)};
    for (auto& v : d.x_true)
        v = rng.normal();
    l.multiply_lower(d.x_true);
    const double inv_n = 1.0 / double(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::poisson_distribution<long> pois(inv_n * std::exp(d.x_true[i] + p.mu));
        d.y[i] = double(pois(rng));
    }
    return d;
}

Matrix preconditioner_precision(const TargetModel& model)
{
    if (auto sv = dynamic_cast<const SvModel*>(&model)) {
        Matrix p = sv->precision_dense();
        for (std::size_t i = 0; i < p.rows(); ++i)
            p(i, i) += 0.5;
        return p;
    }
    if (auto cox = dynamic_cast<const CoxModel*>(&model)) {
        Matrix p = cox->precision();
        const double shift = (0.5 * cox->params().sigma2 + cox->params().mu) / double(p.rows());
        for (std::size_t i = 0; i < p.rows(); ++i)
            p(i, i) += shift;
        return p;
    }
    throw Unsupported("no preconditioner defined for this model");
}

Matrix preconditioner_matrix(const TargetModel& model)
{
    return Cholesky(preconditioner_precision(model)).inverse();
}

void write_data_csv(const std::string& path, const Vec& x_true, const Vec& y)
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot open " + path);
    out << "index,x_true,y\n" << std::setprecision(17);
    for (std::size_t i = 0; i < y.size(); ++i)
        out << i << ',' << x_true[i] << ',' << y[i] << '\n';
}

void read_data_csv(const std::string& path, Vec& x_true, Vec& y)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open " + path);
    std::string line;
    std::getline(in, line);
    x_true.clear();
    y.clear();
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::stringstream ss(line);
        std::string a, b, c;
        std::getline(ss, a, ',');
        std::getline(ss, b, ',');
        std::getline(ss, c, ',');
        x_true.push_back(std::stod(b));
        y.push_back(std::stod(c));
    }
}

double gradient_fd_error(const TargetModel& model, const Vec& x, double step)
{
    const Vec g = model.gradient(x);
    Vec xp = x;
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = step * std::max(1.0, std::abs(x[i]));
        xp[i] = x[i] + h;
        const double up = model.potential(xp);
        xp[i] = x[i] - h;
        const double um = model.potential(xp);
        xp[i] = x[i];
        const double fd = (up - um) / (2.0 * h);
        const double err = std::abs(fd - g[i]) / std::max(1.0, std::abs(g[i]));
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace hams
