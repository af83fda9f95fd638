#include "hams/integrators.hpp"

#include <algorithm>
#include <cctype>

namespace hams {

std::string to_string(IntegratorKind kind)
{
    switch (kind) {
    case IntegratorKind::GJF: return "GJF";
    case IntegratorKind::BAOAB: return "BAOAB";
    case IntegratorKind::ABOBA: return "ABOBA";
    case IntegratorKind::IL: return "IL";
    case IntegratorKind::BP: return "BP";
    case IntegratorKind::VEC: return "VEC";
    case IntegratorKind::SPV: return "SPV";
    case IntegratorKind::MANNELLA: return "MANNELLA";
    }
    return "?";
}

std::string to_string(Variant variant) { return variant == Variant::Raw ? "raw" : "modified"; }

IntegratorKind parse_kind(const std::string& s)
{
    std::string up = s;
    std::transform(up.begin(), up.end(), up.begin(), [](unsigned char ch) { return std::toupper(ch); });
    for (auto k : all_kinds())
        if (to_string(k) == up)
            return k;
    throw InvalidParams("unknown integrator kind: " + s);
}

Variant parse_variant(const std::string& s)
{
    if (s == "raw")
        return Variant::Raw;
    if (s == "modified" || s == "rescaled")
        return Variant::Modified;
    throw InvalidParams("unknown variant: " + s);
}

const std::array<IntegratorKind, 8>& all_kinds()
{
    static const std::array<IntegratorKind, 8> kinds = {
        IntegratorKind::GJF, IntegratorKind::BAOAB, IntegratorKind::ABOBA,
        IntegratorKind::IL,  IntegratorKind::BP,    IntegratorKind::VEC,
        IntegratorKind::SPV, IntegratorKind::MANNELLA};
    return kinds;
}

namespace detail {

void check_step_params(IntegratorKind kind, Variant variant, double eps, double eta)
{
    if (!(eps > 0.0) || !std::isfinite(eps))
        throw InvalidParams("integrator step size must be positive and finite");
    if (!(eta >= 0.0) || !std::isfinite(eta))
        throw InvalidParams("friction must be nonnegative and finite");
    if (variant == Variant::Raw)
        return;
    switch (kind) {
    case IntegratorKind::GJF:
    case IntegratorKind::BAOAB:
    case IntegratorKind::IL:
        if (!(eps < 2.0))
            throw InvalidParams("rescaled momentum needs eps < 2");
        break;
    case IntegratorKind::BP:
    case IntegratorKind::ABOBA:
    case IntegratorKind::MANNELLA:
        if (!(eps <= 1.0))
            throw InvalidParams("modified variant needs eps <= 1");
        break;
    case IntegratorKind::SPV:
        (void)spv_shift(eps, eta);
        break;
    case IntegratorKind::VEC:
        break;
    }
}

double spv_shift(double eps, double eta)
{
    if (eta == 0.0) {
        if (!(eps <= 1.0))
            throw InvalidParams("modified SPV needs eps <= 1 at zero friction");
        return half_step_modified(eps);
    }
    const double c = std::exp(-eta * eps);
    const double q = friction_gain(eta, eps);
    double rad = (1.0 + c) * (1.0 + c) - 4.0 * q * q;
    if (rad < -1e-12)
        throw InvalidParams("modified SPV shift: negative radicand");
    rad = std::max(rad, 0.0);
    return 2.0 * q / (1.0 + c + std::sqrt(rad));
}

}  // namespace detail

PhaseState integrator_step(IntegratorKind kind, Variant variant, const TargetModel& target,
                           const PhaseState& state, double epsilon, double eta, Rng& rng)
{
    detail::check_step_params(kind, variant, epsilon, eta);
    const std::size_t n = target.dim();
    if (state.x.size() != n || state.u.size() != n)
        throw InvalidParams("integrator_step: dimension mismatch");
    using VA = std::valarray<double>;
    VA x(state.x.data(), n);
    VA u(state.u.data(), n);
    Vec buf(n), g;
    auto grad = [&](const VA& v) {
        std::copy(std::begin(v), std::end(v), buf.begin());
        target.evaluate(buf, g);
        return VA(g.data(), n);
    };
    auto noise = [&]() {
        VA w(n);
        for (auto& v : w)
            v = rng.normal();
        return w;
    };
    detail::advance(kind, variant, epsilon, eta, x, u, grad, noise);
    return PhaseState{Vec(std::begin(x), std::end(x)), Vec(std::begin(u), std::end(u))};
}

std::pair<double, double> integrator_step_gaussian(IntegratorKind kind, Variant variant,
                                                   double gamma, double x, double u,
                                                   double epsilon, double eta, Rng& rng)
{
    detail::check_step_params(kind, variant, epsilon, eta);
    auto grad = [gamma](double v) { return gamma * v; };
    auto noise = [&rng]() { return rng.normal(); };
    detail::advance(kind, variant, epsilon, eta, x, u, grad, noise);
    return {x, u};
}

namespace {

LinearKernel from_affine(const Affine& x, const Affine& u)
{
    LinearKernel k;
    k.M = {x.c[0], x.c[1], u.c[0], u.c[1]};
    double sxx = 0.0, sxu = 0.0, suu = 0.0;
    for (std::size_t i = 2; i < Affine::size; ++i) {
        sxx += x.c[i] * x.c[i];
        sxu += x.c[i] * u.c[i];
        suu += u.c[i] * u.c[i];
    }
    k.S = {sxx, sxu, sxu, suu};
    return k;
}

}  // namespace

LinearKernel linearize(IntegratorKind kind, Variant variant, double epsilon, double eta,
                       double gamma)
{
    detail::check_step_params(kind, variant, epsilon, eta);
    if (!(gamma > 0.0))
        throw InvalidParams("linearize needs gamma > 0");
    Affine x = Affine::basis(0);
    Affine u = Affine::basis(1);
    std::size_t next = 2;
    auto grad = [gamma](const Affine& v) { return gamma * v; };
    auto noise = [&next]() {
        if (next >= Affine::size)
            throw Error("linearize: noise basis exhausted");
        return Affine::basis(next++);
    };
    detail::advance(kind, variant, epsilon, eta, x, u, grad, noise);
    return from_affine(x, u);
}

LinearKernel linearize(const HamsCoeffs& c, double gamma)
{
    validate(c);
    if (!(gamma > 0.0))
        throw InvalidParams("linearize needs gamma > 0");
    const double k = c.phi * (1.0 - gamma);
    const Cov2x2 v = noise_cov(c);
    LinearKernel out;
    out.M = {1.0 - c.a1 * gamma, c.a2, -c.a2 * gamma - k * c.a1 * gamma, c.a3 - 1.0 + k * c.a2};
    const double sxu = v.v12 + k * v.v11;
    out.S = {v.v11, sxu, sxu, v.v22 + 2.0 * k * v.v12 + k * k * v.v11};
    return out;
}

LinearKernel linearize(const ShiftedHamsCoeffs& c, double gamma)
{
    validate(HamsCoeffs{c.a1, c.a2, c.a3, 0.0});
    if (!(gamma > 0.0))
        throw InvalidParams("linearize needs gamma > 0");
    const Cov2x2 v = noise_cov(HamsCoeffs{c.a1, c.a2, c.a3, 0.0});
    LinearKernel out;
    out.M = {1.0 - c.a1 * gamma, c.b * c.a1 + c.a2 - c.a1 * gamma * c.b, -c.a2 * gamma,
             c.a3 + c.b * c.a2 - 1.0 - c.a2 * gamma * c.b};
    out.S = {v.v11, v.v12, v.v12, v.v22};
    return out;
}

double max_abs_diff(const LinearKernel& a, const LinearKernel& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        m = std::max(m, std::abs(a.M[i] - b.M[i]));
        m = std::max(m, std::abs(a.S[i] - b.S[i]));
    }
    return m;
}

}  // namespace hams
