#include "hams/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace hams {

void ChainRecord::push(const Vec& x, const Vec& u, bool acc, double dg)
{
    if (k == 0)
        k = x.size();
    if (x.size() != k || u.size() != k)
        throw InvalidParams("chain record: dimension mismatch");
    draws.insert(draws.end(), x.begin(), x.end());
    momenta.insert(momenta.end(), u.begin(), u.end());
    accepted.push_back(acc ? 1 : 0);
    delta_g.push_back(dg);
}

double ChainRecord::acceptance_rate() const
{
    if (accepted.empty())
        return 0.0;
    std::size_t a = 0;
    for (auto v : accepted)
        a += v;
    return double(a) / double(accepted.size());
}

Vec ChainRecord::coordinate(std::size_t j) const
{
    const std::size_t n = steps();
    Vec out(n);
    for (std::size_t t = 0; t < n; ++t)
        out[t] = draws[t * k + j];
    return out;
}

Vec ChainRecord::momentum(std::size_t j) const
{
    const std::size_t n = momenta.size() / std::max<std::size_t>(k, 1);
    Vec out(n);
    for (std::size_t t = 0; t < n; ++t)
        out[t] = momenta[t * k + j];
    return out;
}

double ess_bartlett(const Vec& series, std::size_t cutoff, bool warn)
{
    const std::size_t n = series.size();
    if (n < 2)
        throw InvalidParams("ess_bartlett needs at least two draws");
    if (cutoff < 1)
        throw InvalidParams("ess_bartlett needs a cutoff >= 1");
    std::size_t L = cutoff;
    if (n <= L) {
        L = n - 1;
        if (warn)
            std::cerr << "warning: chain of length " << n << " shorter than ESS cutoff " << cutoff
                      << "; using " << L << '\n';
    }
    double mean = 0.0;
    for (double v : series)
        mean += v;
    mean /= double(n);
    Vec y(n);
    double c0 = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        y[t] = series[t] - mean;
        c0 += y[t] * y[t];
    }
    if (!(c0 > 1e-300 * double(n)))
        throw ZeroVariance("series has zero sample variance");

    // Sum over lags of the Bartlett weight times the lag-l cross product,
    // four lags at a time.
    const double* p = y.data();
    double weighted = 0.0;
    std::size_t l = 1;
    for (; l + 3 <= L; l += 4) {
        double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
        const std::size_t m = n - l - 3;
        for (std::size_t t = 0; t < m; ++t) {
            const double a = p[t];
            s0 += a * p[t + l];
            s1 += a * p[t + l + 1];
            s2 += a * p[t + l + 2];
            s3 += a * p[t + l + 3];
        }
        // Tails that the shortest lag range skipped.
        for (std::size_t t = m; t < n - l; ++t) {
            s0 += p[t] * p[t + l];
            if (t + l + 1 < n)
                s1 += p[t] * p[t + l + 1];
            if (t + l + 2 < n)
                s2 += p[t] * p[t + l + 2];
        }
        const double dl = double(L);
        weighted += (1.0 - double(l) / dl) * s0 + (1.0 - double(l + 1) / dl) * s1 +
                    (1.0 - double(l + 2) / dl) * s2 + (1.0 - double(l + 3) / dl) * s3;
    }
    for (; l <= L; ++l) {
        double s = 0.0;
        for (std::size_t t = 0; t + l < n; ++t)
            s += p[t] * p[t + l];
        weighted += (1.0 - double(l) / double(L)) * s;
    }
    double denom = 1.0 + 2.0 * weighted / c0;
    denom = std::max(denom, 1e-12);
    return double(n) / denom;
}

EssSummary summarize(Vec values)
{
    if (values.empty())
        throw InvalidParams("summarize needs at least one value");
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size();
    EssSummary s;
    s.min = values.front();
    s.max = values.back();
    s.median = m % 2 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
    return s;
}

Vec ess_per_coordinate(const ChainRecord& chain, std::size_t cutoff)
{
    Vec out(chain.k);
    for (std::size_t j = 0; j < chain.k; ++j)
        out[j] = ess_bartlett(chain.coordinate(j), cutoff, j == 0);
    return out;
}

void ChainMoments::add(double v)
{
    ++n;
    const double d = v - mean;
    mean += d / double(n);
    ss += d * (v - mean);
}

double ess_multichain(const std::vector<ChainMoments>& chains)
{
    const std::size_t m = chains.size();
    if (m < 2)
        throw InvalidParams("ess_multichain needs at least two chains");
    const std::size_t n = chains.front().n;
    if (n < 2)
        throw InvalidParams("ess_multichain needs chains of length >= 2");
    double grand = 0.0, within = 0.0;
    for (const auto& c : chains) {
        if (c.n != n)
            throw InvalidParams("ess_multichain needs chains of equal length");
        grand += c.mean;
        within += c.ss;
    }
    grand /= double(m);
    double between = 0.0;
    for (const auto& c : chains)
        between += (c.mean - grand) * (c.mean - grand);
    const double w = within / (double(m) * double(n - 1));
    const double b = double(n) * between / double(m - 1);
    if (b < 1e-300)
        throw DegenerateBetween("between-chain variance is zero");
    return double(n) * w / b;
}

double ess_multichain(const std::vector<Vec>& chains)
{
    std::vector<ChainMoments> mom(chains.size());
    for (std::size_t j = 0; j < chains.size(); ++j)
        for (double v : chains[j])
            mom[j].add(v);
    return ess_multichain(mom);
}

Temperatures temperatures(const Vec& xs, const Vec& us, const TargetModel& model, double scale)
{
    if (model.dim() != 1)
        throw InvalidParams("temperatures need a univariate model");
    if (!model.has_hessian_diag())
        throw Unsupported("temperatures need the Hessian diagonal");
    if (xs.empty() || us.empty())
        throw InvalidParams("temperatures need draws");
    double c1 = 0.0, g2 = 0.0, h = 0.0, k = 0.0;
    Vec x(1), g, hd;
    for (double v : xs) {
        x[0] = v;
        model.evaluate(x, g);
        model.hessian_diag(x, hd);
        c1 += v * g[0];
        g2 += g[0] * g[0];
        h += hd[0];
    }
    for (double v : us)
        k += v * v;
    const double n = double(xs.size());
    Temperatures t;
    t.t_c1 = scale * c1 / n;
    t.t_c2 = scale * g2 / h;
    t.t_k = scale * k / double(us.size());
    return t;
}

Vec exact_bin_masses(const TargetModel& model, double lo, double hi, std::size_t bins)
{
    if (model.dim() != 1)
        throw InvalidParams("bin masses need a univariate model");
    using boost::math::quadrature::gauss_kronrod;
    Vec x(1);
    auto dens = [&](double v) {
        x[0] = v;
        double u;
        try {
            u = model.potential(x);
        } catch (const NonFinite&) {
            return 0.0;
        }
        return std::exp(-u);
    };
    const double z = gauss_kronrod<double, 61>::integrate(dens, -10.0, 10.0, 30, 1e-10);
    if (!(z > 0.0) || !std::isfinite(z))
        throw Degenerate("normalizing constant is not positive and finite");
    Vec out(bins);
    const double w = (hi - lo) / double(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        const double a = lo + w * double(b);
        out[b] = gauss_kronrod<double, 61>::integrate(dens, a, a + w, 30, 1e-10) / z;
    }
    return out;
}

double density_bin_error(const Vec& samples, const TargetModel& model)
{
    return density_bin_error(samples, exact_bin_masses(model, -2.0, 2.0, 16), -2.0, 2.0);
}

double density_bin_error(const Vec& samples, const Vec& truth, double lo, double hi)
{
    const std::size_t bins = truth.size();
    if (samples.empty() || bins == 0)
        throw InvalidParams("density_bin_error needs samples and bins");
    Vec counts(bins, 0.0);
    const double w = (hi - lo) / double(bins);
    for (double v : samples) {
        if (!(v >= lo && v < hi))
            continue;
        const auto b = std::min<std::size_t>(bins - 1, std::size_t((v - lo) / w));
        counts[b] += 1.0;
    }
    double err = 0.0;
    for (std::size_t b = 0; b < bins; ++b)
        err += std::abs(counts[b] / double(samples.size()) - truth[b]);
    return err / double(bins);
}

double rmse_over_reps(const Vec& estimates, double truth)
{
    if (estimates.empty())
        throw InvalidParams("rmse_over_reps needs at least one estimate");
    double s = 0.0;
    for (double e : estimates)
        s += (e - truth) * (e - truth);
    return std::sqrt(s / double(estimates.size()));
}

void write_chain_csv(const std::string& path, const ChainRecord& c)
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot open " + path);
    out << "step";
    for (std::size_t j = 1; j <= c.k; ++j)
        out << ",x" << j;
    for (std::size_t j = 1; j <= c.k; ++j)
        out << ",u" << j;
    out << ",accepted,delta_g\n" << std::setprecision(17);
    const bool has_u = c.momenta.size() == c.draws.size();
    for (std::size_t t = 0; t < c.steps(); ++t) {
        out << t;
        for (std::size_t j = 0; j < c.k; ++j)
            out << ',' << c.draws[t * c.k + j];
        for (std::size_t j = 0; j < c.k; ++j)
            out << ',' << (has_u ? c.momenta[t * c.k + j] : 0.0);
        out << ',' << int(t < c.accepted.size() ? c.accepted[t] : 0) << ','
            << (t < c.delta_g.size() ? c.delta_g[t] : 0.0) << '\n';
    }
}

ChainRecord read_chain_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open " + path);
    std::string line;
    std::getline(in, line);
    std::size_t cols = std::count(line.begin(), line.end(), ',') + 1;
    if (cols < 5 || (cols - 3) % 2 != 0)
        throw InvalidParams("chain CSV header has an unexpected shape");
    ChainRecord c;
    c.k = (cols - 3) / 2;
    std::vector<double> row(cols);
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::stringstream ss(line);
        std::string cell;
        for (std::size_t i = 0; i < cols; ++i) {
            if (!std::getline(ss, cell, ','))
                throw InvalidParams("chain CSV row is short");
            row[i] = std::stod(cell);
        }
        c.draws.insert(c.draws.end(), row.begin() + 1, row.begin() + 1 + long(c.k));
        c.momenta.insert(c.momenta.end(), row.begin() + 1 + long(c.k),
                         row.begin() + 1 + 2 * long(c.k));
        c.accepted.push_back(row[cols - 2] != 0.0 ? 1 : 0);
        c.delta_g.push_back(row[cols - 1]);
    }
    return c;
}

}  // namespace hams
