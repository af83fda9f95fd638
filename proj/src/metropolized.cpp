#include "hams/metropolized.hpp"

#include <cmath>

namespace hams {

std::string to_string(MaKind kind)
{
    switch (kind) {
    case MaKind::BAOAB: return "BAOAB";
    case MaKind::ABOBA: return "ABOBA";
    case MaKind::BP: return "BP";
    }
    return "?";
}

MaKind parse_ma_kind(const std::string& s)
{
    if (s == "BAOAB" || s == "baoab")
        return MaKind::BAOAB;
    if (s == "ABOBA" || s == "aboba")
        return MaKind::ABOBA;
    if (s == "BP" || s == "bp")
        return MaKind::BP;
    throw InvalidParams("unknown Metropolized kind: " + s);
}

namespace {

void check_params(double eps, double c)
{
    if (!(eps > 0.0) || !std::isfinite(eps))
        throw InvalidParams("step size must be positive and finite");
    if (!(c >= 0.0 && c <= 1.0))
        throw InvalidParams("carryover must lie in [0, 1]");
}

void check_noise(MaKind kind, std::size_t k, const MaNoise& n)
{
    if (n.z1.size() != k || (kind == MaKind::BP && n.z2.size() != k))
        throw InvalidParams("noise dimension mismatch");
}

}  // namespace

MaProposal ma_propose_with_noise(MaKind kind, const TargetModel& target, const PhaseState& st,
                                 double eps, double c, const MaNoise& noise)
{
    check_params(eps, c);
    const std::size_t k = st.x.size();
    if (st.u.size() != k || target.dim() != k)
        throw InvalidParams("state dimension mismatch");
    check_noise(kind, k, noise);
    const Vec& x0 = st.x;
    const Vec& u0 = st.u;
    const Vec& z = noise.z1;
    MaProposal out{{Vec(k), Vec(k)}, 0.0};
    Vec& xs = out.proposed.x;
    Vec& us = out.proposed.u;
    const double sd = std::sqrt(1.0 - c * c);

    switch (kind) {
    case MaKind::BAOAB: {
        Vec g0;
        const double pot0 = target.evaluate(x0, g0);
        for (std::size_t i = 0; i < k; ++i)
            xs[i] = x0[i] - (1.0 + c) * eps * eps / 4.0 * g0[i] + (1.0 + c) * eps / 2.0 * u0[i]
                    + eps / 2.0 * sd * z[i];
        Vec gs;
        const double pots = target.evaluate(xs, gs);
        double t1 = 0.0, t0 = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            us[i] = c * u0[i] - eps / 2.0 * c * g0[i] - eps / 2.0 * gs[i] + sd * z[i];
            t1 += (eps / 2.0 * us[i] + eps * eps / 8.0 * gs[i]) * gs[i];
            t0 += (eps / 2.0 * u0[i] - eps * eps / 8.0 * g0[i]) * g0[i];
        }
        out.delta_g = pots - pot0 - t1 - t0;
        return out;
    }
    case MaKind::ABOBA: {
        Vec xt(k), gt;
        for (std::size_t i = 0; i < k; ++i)
            xt[i] = x0[i] + eps / 2.0 * u0[i];
        target.evaluate(xt, gt);
        const double pot0 = target.potential(x0);
        double t = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            xs[i] = x0[i] - (1.0 + c) * eps * eps / 4.0 * gt[i] + (1.0 + c) * eps / 2.0 * u0[i]
                    + eps / 2.0 * sd * z[i];
            us[i] = c * u0[i] - (1.0 + c) * eps / 2.0 * gt[i] + sd * z[i];
            t += (us[i] + u0[i]) * gt[i];
        }
        out.delta_g = target.potential(xs) - pot0 - eps / 2.0 * t;
        return out;
    }
    case MaKind::BP: {
        const double sc = std::sqrt(c);
        const double sn = std::sqrt(1.0 - c);
        Vec g0;
        const double pot0 = target.evaluate(x0, g0);
        Vec up(k);
        for (std::size_t i = 0; i < k; ++i) {
            up[i] = sc * u0[i] + sn * z[i];
            xs[i] = x0[i] + eps * (up[i] - eps / 2.0 * g0[i]);
        }
        Vec gs;
        const double pots = target.evaluate(xs, gs);
        double cross = 0.0, sq = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double um = up[i] - eps / 2.0 * (g0[i] + gs[i]);
            us[i] = sc * um + sn * noise.z2[i];
            cross += (xs[i] - x0[i]) * (gs[i] + g0[i]);
            sq += gs[i] * gs[i] - g0[i] * g0[i];
        }
        out.delta_g = pots - pot0 - 0.5 * cross + eps * eps / 8.0 * sq;
        return out;
    }
    }
    throw InvalidParams("unknown Metropolized kind");
}

StepInfo ma_step(MaKind kind, const TargetModel& target, PhaseState& state, double eps,
                 double eta, Rng& rng)
{
    if (!(eta >= 0.0))
        throw InvalidParams("friction must be nonnegative");
    const std::size_t k = state.x.size();
    const double w = rng.uniform();
    MaNoise n{Vec(k), {}};
    for (auto& v : n.z1)
        v = rng.normal();
    if (kind == MaKind::BP) {
        n.z2.resize(k);
        for (auto& v : n.z2)
            v = rng.normal();
    }
    MaProposal p = ma_propose_with_noise(kind, target, state, eps, std::exp(-eta * eps), n);
    StepInfo info;
    info.delta_g = p.delta_g;
    info.alpha = accept_probability(p.delta_g);
    info.accepted = w < info.alpha;
    if (info.accepted) {
        state = std::move(p.proposed);
    } else {
        for (auto& v : state.u)
            v = -v;
    }
    return info;
}

DeltaGCheck ma_delta_g_crosscheck(MaKind kind, const TargetModel& target, const PhaseState& st,
                                  double eps, double eta, const MaNoise& noise)
{
    const double c = std::exp(-eta * eps);
    if (!(c < 1.0))
        throw InvalidParams("cross-check needs positive friction");
    const MaProposal p = ma_propose_with_noise(kind, target, st, eps, c, noise);
    const Vec& x0 = st.x;
    const Vec& u0 = st.u;
    const Vec& xs = p.proposed.x;
    const Vec& us = p.proposed.u;
    const std::size_t k = x0.size();
    Vec g0, gs;
    const double pot0 = target.evaluate(x0, g0);
    const double pots = target.evaluate(xs, gs);
    double zf = norm2(noise.z1);
    double zb = 0.0;
    switch (kind) {
    case MaKind::BAOAB: {
        const double s = 1.0 / std::sqrt(1.0 - c * c);
        for (std::size_t i = 0; i < k; ++i) {
            const double v = -s * (c * us[i] - u0[i] + eps / 2.0 * g0[i] + eps / 2.0 * c * gs[i]);
            zb += v * v;
        }
        break;
    }
    case MaKind::ABOBA: {
        Vec xt(k);
        for (std::size_t i = 0; i < k; ++i)
            xt[i] = x0[i] + eps / 2.0 * u0[i];
        const Vec gt = target.gradient(xt);
        const double s = 1.0 / std::sqrt(1.0 - c * c);
        for (std::size_t i = 0; i < k; ++i) {
            const double v = -s * (c * us[i] - u0[i] + (1.0 + c) * eps / 2.0 * gt[i]);
            zb += v * v;
        }
        break;
    }
    case MaKind::BP: {
        zf += norm2(noise.z2);
        const double s = 1.0 / std::sqrt(1.0 - c);
        const double sc = std::sqrt(c);
        for (std::size_t i = 0; i < k; ++i) {
            const double v1 = -s * ((x0[i] - xs[i]) / eps + eps / 2.0 * gs[i] + sc * us[i]);
            const double v2 =
                -s * (sc * (xs[i] - x0[i]) / eps + eps * sc / 2.0 * g0[i] - u0[i]);
            zb += v1 * v1 + v2 * v2;
        }
        break;
    }
    }
    DeltaGCheck out;
    out.closed_form = p.delta_g;
    out.direct = (pots + 0.5 * norm2(us)) - (pot0 + 0.5 * norm2(u0)) + 0.5 * zb - 0.5 * zf;
    return out;
}

MaKernel::MaKernel(MaKind kind, double epsilon, double c, std::string label)
    : kind_(kind), eps_(epsilon), c_(c), label_(std::move(label))
{
    check_params(epsilon, c);
    if (label_.empty())
        label_ = "MA-" + to_string(kind);
}

MaKernel MaKernel::with_friction(MaKind kind, double epsilon, double eta, std::string label)
{
    if (!(eta >= 0.0))
        throw InvalidParams("friction must be nonnegative");
    return MaKernel(kind, epsilon, std::exp(-eta * epsilon), std::move(label));
}

StepInfo MaKernel::step(const TargetModel& target, ChainState& s, Rng& rng)
{
    const std::size_t k = s.x.size();
    const double eps = eps_, c = c_;
    const double sd = std::sqrt(1.0 - c * c);
    StepInfo info;

    if (kind_ == MaKind::ABOBA) {
        // Only U(x) is carried between steps; the gradient lives at x + eps u / 2.
        if (!s.cached) {
            s.U = target.potential(s.x);
            s.grad.clear();
            s.cached = true;
        }
        const double w = rng.uniform();
        z1_.resize(k);
        for (auto& v : z1_)
            v = rng.normal();
        xt_.resize(k);
        for (std::size_t i = 0; i < k; ++i)
            xt_[i] = s.x[i] + eps / 2.0 * s.u[i];
        target.evaluate(xt_, gt_);
        xs_.resize(k);
        us_.resize(k);
        double t = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            xs_[i] = s.x[i] - (1.0 + c) * eps * eps / 4.0 * gt_[i] + (1.0 + c) * eps / 2.0 * s.u[i]
                     + eps / 2.0 * sd * z1_[i];
            us_[i] = c * s.u[i] - (1.0 + c) * eps / 2.0 * gt_[i] + sd * z1_[i];
            t += (us_[i] + s.u[i]) * gt_[i];
        }
        const double pots = target.potential(xs_);
        info.delta_g = pots - s.U - eps / 2.0 * t;
        info.alpha = accept_probability(info.delta_g);
        info.accepted = w < info.alpha;
        if (info.accepted) {
            s.x.swap(xs_);
            s.u.swap(us_);
            s.U = pots;
        } else {
            for (auto& v : s.u)
                v = -v;
        }
        s.grad.clear();
        return info;
    }

    refresh_cache(target, s);
    const double w = rng.uniform();
    z1_.resize(k);
    for (auto& v : z1_)
        v = rng.normal();
    xs_.resize(k);

    if (kind_ == MaKind::BAOAB) {
        for (std::size_t i = 0; i < k; ++i)
            xs_[i] = s.x[i] - (1.0 + c) * eps * eps / 4.0 * s.grad[i]
                     + (1.0 + c) * eps / 2.0 * s.u[i] + eps / 2.0 * sd * z1_[i];
        const double pots = target.evaluate(xs_, gs_);
        us_.resize(k);
        double t1 = 0.0, t0 = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            us_[i] = c * s.u[i] - eps / 2.0 * c * s.grad[i] - eps / 2.0 * gs_[i] + sd * z1_[i];
            t1 += (eps / 2.0 * us_[i] + eps * eps / 8.0 * gs_[i]) * gs_[i];
            t0 += (eps / 2.0 * s.u[i] - eps * eps / 8.0 * s.grad[i]) * s.grad[i];
        }
        info.delta_g = pots - s.U - t1 - t0;
        info.alpha = accept_probability(info.delta_g);
        info.accepted = w < info.alpha;
        if (info.accepted) {
            s.x.swap(xs_);
            s.u.swap(us_);
            s.grad.swap(gs_);
            s.U = pots;
        } else {
            for (auto& v : s.u)
                v = -v;
        }
        return info;
    }

    // BP
    z2_.resize(k);
    for (auto& v : z2_)
        v = rng.normal();
    const double sc = std::sqrt(c);
    const double sn = std::sqrt(1.0 - c);
    up_.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        up_[i] = sc * s.u[i] + sn * z1_[i];
        xs_[i] = s.x[i] + eps * up_[i] - eps * eps / 2.0 * s.grad[i];
    }
    const double pots = target.evaluate(xs_, gs_);
    xt_.resize(k);
    double inner = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        xt_[i] = gs_[i] + s.grad[i];
        inner += xt_[i] * (2.0 * up_[i] - eps / 2.0 * xt_[i]);
    }
    info.delta_g = pots - s.U - eps / 4.0 * inner;
    info.alpha = accept_probability(info.delta_g);
    info.accepted = w < info.alpha;
    if (info.accepted) {
        for (std::size_t i = 0; i < k; ++i)
            s.u[i] = sc * (up_[i] - eps / 2.0 * xt_[i]) + sn * z2_[i];
        s.x.swap(xs_);
        s.grad.swap(gs_);
        s.U = pots;
    } else {
        for (auto& v : s.u)
            v = -v;
    }
    return info;
}

}  // namespace hams
