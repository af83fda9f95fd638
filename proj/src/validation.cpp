#include "hams/validation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "hams/kernel.hpp"
#include "hams/targets.hpp"

namespace hams {

namespace {

constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();

void put(std::ostream& os, double v)
{
    if (std::isfinite(v))
        os << v;
}

std::string fmt(double v)
{
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

// Singular-A completion of a1: a3 = (sqrt2 - sqrt a1)^2, a2 = sqrt(a1 a3).
HamsCoeffs singular_completion(double a1)
{
    if (!(a1 > 0.0 && a1 < 2.0))
        throw InvalidParams("a1 must lie in (0, 2)");
    const double a3 = std::pow(std::sqrt(2.0) - std::sqrt(a1), 2);
    HamsCoeffs c{a1, std::sqrt(a1 * a3), a3, 0.0};
    c.phi = default_phi(c.a1, c.a2);
    return c;
}

// Nonsingular completion a3 = 1, a2 = sqrt(a1) / 2. With one noise direction
// (singular A) the Metropolized chain at a1 = 1, gamma = 2 is not ergodic, so
// time averages need two.
HamsCoeffs generic_completion(double a1)
{
    if (!(a1 > 0.0 && a1 < 2.0))
        throw InvalidParams("a1 must lie in (0, 2)");
    HamsCoeffs c{a1, 0.5 * std::sqrt(a1), 1.0, 0.0};
    c.phi = default_phi(c.a1, c.a2);
    validate(c);
    return c;
}

TheoryRow fill_row(const HamsCoeffs& c, double gamma)
{
    TheoryRow r;
    r.gamma = gamma;
    r.coeffs = c;
    try {
        r.var_x = stationary_variance_closed(c.a1, gamma);
    } catch (const Degenerate&) {
        r.var_x = nan_v;
    }
    r.expected_delta_g = expected_delta_g(c.a1, gamma);
    r.expected_acceptance = expected_acceptance(c.a1, gamma);
    r.rho_min = spectral_radius(c);
    return r;
}

// Smooth non-Gaussian test potential with coupled coordinates:
// sum_i x_i^2 / 2 + log cosh(x_i) + x_i x_{i+1} / 10.
class LogCoshTarget : public TargetModel {
public:
    explicit LogCoshTarget(std::size_t dim) : dim_(dim) {}

    std::size_t dim() const override { return dim_; }
    double potential(const Vec& x) const override
    {
        Vec g;
        return evaluate(x, g);
    }
    double evaluate(const Vec& x, Vec& grad) const override
    {
        grad.assign(dim_, 0.0);
        double u = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            const double a = std::abs(x[i]);
            u += 0.5 * x[i] * x[i] + a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
            grad[i] += x[i] + std::tanh(x[i]);
            if (i + 1 < dim_) {
                u += 0.1 * x[i] * x[i + 1];
                grad[i] += 0.1 * x[i + 1];
                grad[i + 1] += 0.1 * x[i];
            }
        }
        return u;
    }

private:
    std::size_t dim_;
};

}  // namespace

std::vector<TheoryRow> theory_table(const Vec& epsilons, const Vec& ks, const Vec& gammas)
{
    std::vector<TheoryRow> rows;
    for (double e : epsilons)
        for (double k : ks)
            for (double g : gammas) {
                TheoryRow r = fill_row(hams_k_coeffs(e, k), g);
                r.epsilon = e;
                r.k = k;
                rows.push_back(r);
            }
    return rows;
}

TheoryRow theory_row_for_a1(double a1, double gamma)
{
    TheoryRow r = fill_row(singular_completion(a1), gamma);
    r.epsilon = nan_v;
    r.k = nan_v;
    return r;
}

void write_theory_csv(std::ostream& os, const std::vector<TheoryRow>& rows)
{
    os << "epsilon,k,gamma,a1,a2,a3,phi,var_x,expected_delta_g,expected_acceptance,rho_min\n";
    os << std::setprecision(10);
    for (const auto& r : rows) {
        put(os, r.epsilon);
        os << ',';
        put(os, r.k);
        os << ',' << r.gamma << ',' << r.coeffs.a1 << ',' << r.coeffs.a2 << ',' << r.coeffs.a3
           << ',' << r.coeffs.phi << ',';
        put(os, r.var_x);
        os << ',' << r.expected_delta_g << ',' << r.expected_acceptance << ',' << r.rho_min
           << '\n';
    }
}

MatchRow match_row(IntegratorKind kind, Variant variant, double epsilon, double eta, double gamma)
{
    MatchRow r;
    r.kind = kind;
    r.variant = variant;
    r.epsilon = epsilon;
    r.eta = eta;
    r.gamma = gamma;
    r.report = verify_match(kind, variant, epsilon, eta, gamma);
    r.order_ratio = nan_v;
    try {
        if (kind == IntegratorKind::VEC || is_shifted_kind(kind))
            r.order_ratio = cov_order_ratio(kind, epsilon, eta, gamma);
        else if (kind != IntegratorKind::BP)
            r.order_ratio = phi_order_ratio(kind, epsilon, eta);
    } catch (const Degenerate&) {
        r.order_ratio = nan_v;
    }
    return r;
}

void write_match_csv(std::ostream& os, const std::vector<MatchRow>& rows)
{
    os << "kind,variant,epsilon,eta,gamma,drift_diff,cov_diff,phi_diff,order_ratio\n";
    os << std::setprecision(10);
    for (const auto& r : rows) {
        os << to_string(r.kind) << ',' << to_string(r.variant) << ',' << r.epsilon << ',' << r.eta
           << ',' << r.gamma << ',' << r.report.drift_diff << ',' << r.report.cov_diff << ','
           << r.report.phi_diff << ',';
        put(os, r.order_ratio);
        os << '\n';
    }
}

SuiteResult suite_rejection_free(std::uint64_t seed, std::size_t steps)
{
    SuiteResult res{"rejection-free", true, ""};
    const GaussianTarget target(1.0, 5);
    double worst = 0.0;
    std::uint64_t stream = 0;
    for (double eps : {0.1, 0.5, 0.9}) {
        const std::vector<std::pair<std::string, HamsCoeffs>> presets = {
            {"HAMS-A", hams_a_optimal(eps)},   {"HAMS-B", hams_b_optimal(eps)},
            {"HAMS-1", hams_k_coeffs(eps, 1)}, {"HAMS-2", hams_k_coeffs(eps, 2)},
            {"HAMS-3", hams_k_coeffs(eps, 3)}};
        for (const auto& [name, c] : presets) {
            Rng rng(seed, stream++);
            HamsKernel kernel(c, name);
            ChainState s;
            s.x.resize(5);
            s.u.resize(5);
            for (auto& v : s.x)
                v = rng.normal();
            for (auto& v : s.u)
                v = rng.normal();
            double m = 0.0;
            std::size_t rejected = 0;
            for (std::size_t i = 0; i < steps; ++i) {
                const StepInfo info = kernel.step(target, s, rng);
                m = std::max(m, std::abs(info.delta_g));
                rejected += info.accepted ? 0 : 1;
            }
            worst = std::max(worst, m);
            if (m > 1e-9 || rejected > 0) {
                res.passed = false;
                res.detail += name + " eps=" + fmt(eps) + " max|dG|=" + fmt(m) + "; ";
            }
        }
    }
    res.detail += "max |dG| = " + fmt(worst);
    return res;
}

SuiteResult suite_involution(std::uint64_t seed, std::size_t cases)
{
    SuiteResult res{"involution", true, ""};
    Rng rng(seed, 0);
    const std::size_t k = 4;
    const LogCoshTarget target(k);
    double worst = 0.0;
    std::size_t done = 0;
    while (done < cases) {
        HamsCoeffs c;
        c.a1 = 0.05 + 1.9 * rng.uniform();
        c.a3 = 0.05 + 1.9 * rng.uniform();
        const double bound = std::sqrt(std::min(c.a1 * c.a3, (2.0 - c.a1) * (2.0 - c.a3)));
        c.a2 = (2.0 * rng.uniform() - 1.0) * 0.95 * bound;
        c.phi = 2.0 * rng.uniform() - 1.0;
        PhaseState st{Vec(k), Vec(k)};
        NoisePair z{Vec(k), Vec(k)};
        for (std::size_t i = 0; i < k; ++i) {
            st.x[i] = rng.normal();
            st.u[i] = rng.normal();
            z.z1[i] = rng.normal();
            z.z2[i] = rng.normal();
        }
        const ProposalOutcome fwd = propose_with_noise(target, st, c, z);
        PhaseState rev{fwd.proposed.x, fwd.proposed.u};
        NoisePair zb = fwd.z_backward;
        double scale = 1.0;
        for (std::size_t i = 0; i < k; ++i) {
            rev.u[i] = -rev.u[i];
            zb.z1[i] = -zb.z1[i];
            zb.z2[i] = -zb.z2[i];
            scale = std::max({scale, std::abs(st.x[i]), std::abs(st.u[i]),
                              std::abs(fwd.proposed.x[i]), std::abs(fwd.proposed.u[i])});
        }
        const ProposalOutcome back = propose_with_noise(target, rev, c, zb);
        double err = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            err = std::max(err, std::abs(back.proposed.x[i] - st.x[i]));
            err = std::max(err, std::abs(back.proposed.u[i] + st.u[i]));
        }
        worst = std::max(worst, err / scale);
        ++done;
    }
    res.passed = worst <= 1e-12;
    res.detail = "max relative error = " + fmt(worst) + " over " + std::to_string(cases) + " cases";
    return res;
}

SuiteResult suite_stationary_variance(std::uint64_t seed, std::size_t steps)
{
    SuiteResult res{"stationary-variance", true, ""};
    const double gamma = 2.0;
    const HamsCoeffs c = singular_completion(0.2);
    const double truth = stationary_variance_closed(c.a1, gamma);

    const GaussianTarget target(gamma, 1);
    Rng rng(seed, 0);
    const Factor2x2 f = factor_cov2(noise_cov(c));
    PhaseState st{{rng.normal() * std::sqrt(truth)}, {rng.normal()}};
    NoisePair z{Vec(1), Vec(1)};
    const std::size_t batches = 100;
    const std::size_t per = std::max<std::size_t>(steps / batches, 1);
    Vec means(batches, 0.0);
    for (std::size_t b = 0; b < batches; ++b) {
        for (std::size_t i = 0; i < per; ++i) {
            sample_noise_pair_into(f, rng, z.z1, z.z2);
            st = propose_with_noise(target, st, c, z).proposed;
            means[b] += st.x[0] * st.x[0];
        }
        means[b] /= double(per);
    }
    double mean = 0.0, var = 0.0;
    for (double m : means)
        mean += m / double(batches);
    for (double m : means)
        var += (m - mean) * (m - mean) / double(batches - 1);
    const double se = std::sqrt(var / double(batches));
    const bool mc_ok = std::abs(mean - truth) <= 4.0 * se;

    double grid_err = 0.0;
    for (double a1 : {0.1, 0.5, 1.0, 1.5, 1.9})
        for (double g : {0.5, 2.0, 5.0}) {
            const HamsCoeffs cc = singular_completion(a1);
            try {
                const auto v = lyapunov_stationary(var_kernel(cc, g));
                const double closed = stationary_variance_closed(a1, g);
                grid_err = std::max({grid_err, std::abs(v[0] - closed), std::abs(v[1]),
                                     std::abs(v[2]), std::abs(v[3] - 1.0)});
            } catch (const Degenerate&) {
                // a1 gamma = 2: no stationary solution
            }
        }
    res.passed = mc_ok && grid_err <= 1e-10;
    res.detail = "Var(x) = " + fmt(mean) + " +- " + fmt(se) + " vs " + fmt(truth) +
                 "; Lyapunov grid max error = " + fmt(grid_err);
    return res;
}

SuiteResult suite_acceptance_identity(std::uint64_t seed, std::size_t steps)
{
    SuiteResult res{"acceptance-identity", true, ""};
    const double gamma = 2.0;
    const GaussianTarget target(gamma, 1);
    std::uint64_t stream = 0;
    for (double a1 : {0.2, 0.5, 1.0}) {
        const HamsCoeffs c = generic_completion(a1);
        HamsKernel kernel(c);
        Rng rng(seed, stream++);
        ChainState s;
        s.x = {rng.normal() / std::sqrt(gamma)};
        s.u = {rng.normal()};
        std::size_t acc = 0;
        for (std::size_t i = 0; i < steps; ++i)
            acc += kernel.step(target, s, rng).accepted ? 1 : 0;
        const double emp = double(acc) / double(steps);
        const double th = expected_acceptance(a1, gamma);
        const bool ok = std::abs(emp - th) <= 0.005;
        res.passed = res.passed && ok;
        res.detail += "a1=" + fmt(a1) + ": " + fmt(emp) + " vs " + fmt(th) + (ok ? "" : " FAIL") +
                      "; ";
    }
    return res;
}

std::vector<SuiteResult> gaussian_validate(std::uint64_t seed)
{
    return {suite_rejection_free(seed), suite_involution(seed), suite_stationary_variance(seed),
            suite_acceptance_identity(seed)};
}

}  // namespace hams
