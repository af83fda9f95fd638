#include "hams/precondition.hpp"

namespace hams {

Vec Whitener::to_whitened(const Vec& x) const
{
    Vec y = x;
    l_.multiply_upper(y);
    return y;
}

Vec Whitener::to_original(const Vec& x_hat) const
{
    Vec y = x_hat;
    l_.solve_upper(y);
    return y;
}

Whitener build_whitener(const Matrix& sigma_hat)
{
    return Whitener(Cholesky(Cholesky(sigma_hat).inverse()));
}

Whitener build_whitener_from_precision(const Matrix& precision)
{
    return Whitener(Cholesky(precision));
}

Whitener identity_whitener(std::size_t dim) { return Whitener(Cholesky(Matrix::identity(dim))); }

WhitenedTarget::WhitenedTarget(const TargetModel& base, std::shared_ptr<const Whitener> w)
    : base_(base), w_(std::move(w))
{
    if (!w_ || w_->dim() != base_.dim())
        throw InvalidParams("whitener dimension does not match the target");
}

double WhitenedTarget::potential(const Vec& x_hat) const
{
    return base_.potential(w_->to_original(x_hat));
}

double WhitenedTarget::evaluate(const Vec& x_hat, Vec& grad) const
{
    const double u = base_.evaluate(w_->to_original(x_hat), grad);
    w_->transport_gradient(grad);
    return u;
}

}  // namespace hams
