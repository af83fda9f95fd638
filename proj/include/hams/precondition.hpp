#pragma once

#include <memory>

#include "hams/core.hpp"
#include "hams/targets.hpp"

namespace hams {

// Lower-triangular L with L L^T = Sigma_hat^{-1}.
class Whitener {
public:
    explicit Whitener(Cholesky factor) : l_(std::move(factor)) {}

    std::size_t dim() const { return l_.size(); }
    const Cholesky& factor() const { return l_; }
    const Matrix& lower() const { return l_.lower(); }

    // x_hat = L^T x
    Vec to_whitened(const Vec& x) const;
    // x = L^{-T} x_hat
    Vec to_original(const Vec& x_hat) const;
    // In place g <- L^{-1} g (gradient transport).
    void transport_gradient(Vec& g) const { l_.solve_lower(g); }

private:
    Cholesky l_;
};

// From Sigma_hat; throws NotPD.
Whitener build_whitener(const Matrix& sigma_hat);
// From Sigma_hat^{-1} directly, which keeps banded precisions banded.
Whitener build_whitener_from_precision(const Matrix& precision);
Whitener identity_whitener(std::size_t dim);

// Target of x_hat = L^T x: U_hat(x_hat) = U(L^{-T} x_hat), grad = L^{-1} grad U.
class WhitenedTarget : public TargetModel {
public:
    WhitenedTarget(const TargetModel& base, std::shared_ptr<const Whitener> w);

    std::size_t dim() const override { return base_.dim(); }
    double potential(const Vec& x_hat) const override;
    double evaluate(const Vec& x_hat, Vec& grad) const override;

    const Whitener& whitener() const { return *w_; }
    const TargetModel& base() const { return base_; }

private:
    const TargetModel& base_;
    std::shared_ptr<const Whitener> w_;
};

}  // namespace hams
