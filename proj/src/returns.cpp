#include "igbm/returns.hpp"

#include "igbm/error.hpp"
#include "igbm/io.hpp"
#include "igbm/numerics.hpp"
#include "igbm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace igbm {

namespace {

double normal_pdf(double x, double mean, double var) {
    const double d = x - mean;
    return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

void require_gamma(const ModelParams& params, const char* who) {
    if (params.kappa_dist.is_fixed()) {
        throw ParameterError(std::string(who) + ": needs a Gamma kappa distribution");
    }
}

DensityCurve tabulate(std::span<const double> grid, const std::function<double(double)>& f) {
    DensityCurve c;
    c.grid.assign(grid.begin(), grid.end());
    c.density.reserve(grid.size());
    for (double x : grid) c.density.push_back(f(x));
    c.validate();
    return c;
}

}  // namespace

double kappa_expectation(const KappaDistribution& dist, const std::function<double(double)>& f,
                         double rel_tol) {
    dist.validate();
    if (dist.is_fixed()) return f(dist.kappa);
    const double nu = dist.nu, k0 = dist.kappa0;
    // kappa = k0 x, x = w^{1/nu}: x^{nu-1} e^{-x} dx / Gamma(nu) = e^{-x} dw / Gamma(nu+1)
    const double norm = std::exp(-log_gamma(nu + 1.0));
    auto g = [&](double w) {
        if (w <= 0.0) return 0.0;
        const double x = std::pow(w, 1.0 / nu);
        return std::exp(-x) * f(k0 * x);
    };
    // Beyond x_max the weight e^{-x} is below 1e-17 of the peak.
    const double x_max = nu + 40.0 + 10.0 * std::sqrt(nu);
    std::vector<double> breaks{0.0};
    for (double x : {1e-8, 1e-6, 1e-4, 1e-3, 1e-2, 0.03, 0.1, 0.3, 0.6, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0,
                     24.0, 32.0}) {
        if (x < x_max) breaks.push_back(std::pow(x, nu));
    }
    breaks.push_back(std::pow(x_max, nu));
    const double total = integrate_global(g, breaks, rel_tol, 1e-300);
    return norm * total;
}

double qs_return_density(double du, double tau, const ModelParams& params) {
    if (!(tau > 0.0)) throw ParameterError("quasi-stationary returns: tau must be positive");
    if (!(params.sigma > 0.0)) throw ParameterError("quasi-stationary returns: sigma must be positive");
    const double s2 = params.sigma * params.sigma;
    return kappa_expectation(params.kappa_dist, [&](double k) {
        return normal_pdf(du, 0.0, s2 / k * -std::expm1(-k * tau));
    });
}

DensityCurve qs_return_pdf(std::span<const double> grid, double tau, const ModelParams& params) {
    if (!(tau > 0.0)) throw ParameterError("quasi-stationary returns: tau must be positive");
    return tabulate(grid, [&](double du) { return qs_return_density(du, tau, params); });
}

double qs_return_density_asymptotic(double du, const ModelParams& params) {
    require_gamma(params, "asymptotic returns");
    const double nu = params.kappa_dist.nu, k0 = params.kappa_dist.kappa0;
    const double s2 = params.sigma * params.sigma;
    if (!(s2 > 0.0)) throw ParameterError("asymptotic returns: sigma must be positive");
    const double log_ratio = log_gamma(nu + 0.5) - log_gamma(nu);
    return std::sqrt(k0 / (2.0 * std::numbers::pi * s2)) *
           std::exp(log_ratio - (nu + 0.5) * std::log1p(k0 * du * du / (2.0 * s2)));
}

DensityCurve qs_return_pdf_asymptotic(std::span<const double> grid, const ModelParams& params) {
    return tabulate(grid, [&](double du) { return qs_return_density_asymptotic(du, params); });
}

double qs_return_variance(double tau, const ModelParams& params) {
    if (!(tau > 0.0)) throw ParameterError("return variance: tau must be positive");
    const double s2 = params.sigma * params.sigma;
    const auto& d = params.kappa_dist;
    if (d.is_fixed()) return s2 / d.kappa * -std::expm1(-d.kappa * tau);
    const double x = d.kappa0 * tau;
    if (std::abs(d.nu - 1.0) < 1e-6) return s2 / d.kappa0 * std::log1p(x);
    const double e = d.nu - 1.0;
    return s2 / (d.kappa0 * e) * -std::expm1(-e * std::log1p(x));
}

OrderParameters OpTable::at(double x, bool clamp) const {
    if (u0.empty()) throw ParameterError("order parameter table is empty");
    if (x < u0.front() || x > u0.back()) {
        if (!clamp) {
            throw ParameterError("order parameter table covers [" + format17(u0.front()) + ", " +
                                 format17(u0.back()) + "], asked for u0=" + format17(x));
        }
        OrderParameters op = x < u0.front() ? ops.front() : ops.back();
        op.u0 = x;
        return op;
    }
    auto it = std::upper_bound(u0.begin(), u0.end(), x);
    std::size_t hi = std::min<std::size_t>(it - u0.begin(), u0.size() - 1);
    std::size_t lo = hi == 0 ? 0 : hi - 1;
    OrderParameters op;
    op.u0 = x;
    if (hi == lo) {
        op = ops[lo];
        op.u0 = x;
        return op;
    }
    const double t = (x - u0[lo]) / (u0[hi] - u0[lo]);
    auto lerp = [&](double a, double b) { return a + t * (b - a); };
    op.m = lerp(ops[lo].m, ops[hi].m);
    op.q = lerp(ops[lo].q, ops[hi].q);
    op.chi = lerp(ops[lo].chi, ops[hi].chi);
    op.Chat0 = lerp(ops[lo].Chat0, ops[hi].Chat0);
    return op;
}

OpTable op_table(const ModelParams& params, std::span<const double> u0_grid, const ThetaGrid& grid,
                 const SolveControl& ctrl) {
    if (u0_grid.size() < 2) throw ParameterError("op_table: need at least two u0 nodes");
    for (std::size_t i = 1; i < u0_grid.size(); ++i) {
        if (!(u0_grid[i] > u0_grid[i - 1])) throw ParameterError("op_table: u0 grid must be increasing");
    }
    if (u0_grid.front() > -4.0 || u0_grid.back() < 4.0) {
        throw ParameterError("op_table: u0 grid must cover [-4, 4]");
    }
    OpTable t;
    t.u0.assign(u0_grid.begin(), u0_grid.end());
    t.ops.resize(t.u0.size());
    std::size_t centre = 0;
    for (std::size_t i = 1; i < t.u0.size(); ++i) {
        if (std::abs(t.u0[i]) < std::abs(t.u0[centre])) centre = i;
    }
    std::vector<std::string> failed;
    std::vector<bool> ok(t.u0.size(), false);
    auto solve_at = [&](std::size_t i, const std::optional<OrderParameters>& init) {
        SolveControl c = ctrl;
        if (init) c.init = init;
        try {
            t.ops[i] = solve_fixed_point(params, t.u0[i], grid, c);
            ok[i] = true;
        } catch (const ConvergenceError& e) {
            failed.push_back(format17(t.u0[i]));
        }
    };
    solve_at(centre, ctrl.init);
    std::optional<OrderParameters> last = ok[centre] ? std::optional(t.ops[centre]) : ctrl.init;
    for (std::size_t i = centre + 1; i < t.u0.size(); ++i) {
        solve_at(i, last);
        if (ok[i]) last = t.ops[i];
    }
    last = ok[centre] ? std::optional(t.ops[centre]) : ctrl.init;
    for (std::size_t i = centre; i-- > 0;) {
        solve_at(i, last);
        if (ok[i]) last = t.ops[i];
    }
    if (!failed.empty()) {
        std::string list;
        for (const auto& f : failed) list += (list.empty() ? "" : ", ") + f;
        throw ConvergenceError("op_table: no convergence at u0 = " + list, NAN, ctrl.max_iter);
    }
    return t;
}

SlowReturnResult slow_return_pdf(std::span<const double> grid, SlowScale scale, double tau,
                                 const ModelParams& params, const OpTable& table,
                                 const SlowReturnOptions& options) {
    params.validate();
    if (!(params.sigma > 0.0)) throw ParameterError("slow returns: sigma must be positive");
    if (table.u0.empty() || table.u0_min() > -4.0 || table.u0_max() < 4.0) {
        throw ParameterError("slow returns: order parameter table must cover u0 in [-4, 4]");
    }
    if (scale == SlowScale::intermediate && !(tau > 0.0)) {
        throw ParameterError("slow returns: tau must be positive on the intermediate scale");
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) throw ParameterError("slow returns: grid must be increasing");
    }
    if (options.n_u0 < 1 || !(options.cutoff_sd > 0.0)) throw ParameterError("slow returns: bad options");

    const double r = scale == SlowScale::intermediate ? std::exp(-params.gamma * tau) : 0.0;
    const double rc = std::sqrt(std::max(0.0, 1.0 - r * r));
    const ThetaGrid g = ThetaGrid::build(params, options.grid);
    const auto u0_rule = standard_normal_rule(options.n_u0);
    const std::size_t n = u0_rule.size();

    // Slow-factor values: the n first-time nodes, then n*n second-time nodes.
    std::vector<double> vals(n + n * n);
    std::vector<double> pair_w(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        vals[i] = u0_rule.nodes[i];
        for (std::size_t j = 0; j < n; ++j) {
            vals[n + i * n + j] = r * u0_rule.nodes[i] + rc * u0_rule.nodes[j];
            pair_w[i * n + j] = u0_rule.weights[i] * u0_rule.weights[j];
        }
    }
    std::vector<OrderParameters> ops(vals.size());
    std::vector<double> B(vals.size());
    const double J = params.coupling.J, J0 = params.coupling.J0, aJ2 = params.coupling.alpha * J * J;
    for (std::size_t v = 0; v < vals.size(); ++v) {
        ops[v] = table.at(vals[v], true);
        B[v] = std::sqrt(params.sigma_I2 + J * J * ops[v].q);
    }

    SlowReturnResult res;
    std::vector<bool> flagged(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const auto& a = ops[i];
            const auto& b = ops[n + i * n + j];
            const double qref = std::max(a.q, b.q);
            const double rel = qref > 0.0 ? std::abs(a.q - b.q) / qref : 0.0;
            res.max_q_rel_diff = std::max(res.max_q_rel_diff, rel);
            flagged[i * n + j] = rel > 1e-2;
            if (flagged[i * n + j]) res.flagged_weight += pair_w[i * n + j];
        }
    }

    const std::size_t nk = g.kappa_nodes.size();
    std::vector<std::vector<double>> partial(nk, std::vector<double>(grid.size(), 0.0));
    std::vector<double> neglected(nk, 0.0);
    parallel_for(nk, options.workers, [&](std::size_t k) {
        const double kappa = g.kappa_nodes[k];
        auto& dens = partial[k];
        std::vector<double> m_theta(vals.size()), s2(vals.size());
        for (std::size_t v = 0; v < vals.size(); ++v) {
            s2[v] = sigma_u2(kappa, ops[v].Chat0, params.sigma, J);
        }
        for (std::size_t zi = 0; zi < g.z_rule.size(); ++zi) {
            const double z = g.z_rule.nodes[zi];
            const double wkz = g.kappa_weights[k] * g.z_rule.weights[zi];
            for (std::size_t v = 0; v < vals.size(); ++v) {
                const double ub = member_ubar(z, kappa, ops[v], params, vals[v]);
                m_theta[v] = std::erf(ub / std::sqrt(1.0 + 2.0 * s2[v]));
            }
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    const std::size_t p = n + i * n + j;
                    const double mean = (J0 * (ops[i].m - ops[p].m) + params.sigma0 * (vals[i] - vals[p]) +
                                         aJ2 * (ops[i].chi * m_theta[i] - ops[p].chi * m_theta[p])) /
                                        kappa;
                    const double var = s2[i] + s2[p];
                    const double w = wkz * pair_w[i * n + j];
                    if (flagged[i * n + j]) {
                        const double d = (B[i] - B[p]) * z / kappa;
                        neglected[k] += w * d * d;
                    }
                    const double sd = std::sqrt(var);
                    const auto lo = std::lower_bound(grid.begin(), grid.end(), mean - options.cutoff_sd * sd);
                    const auto hi = std::upper_bound(lo, grid.end(), mean + options.cutoff_sd * sd);
                    const double c = w / std::sqrt(2.0 * std::numbers::pi * var);
                    for (auto it = lo; it != hi; ++it) {
                        const double d = *it - mean;
                        dens[it - grid.begin()] += c * std::exp(-0.5 * d * d / var);
                    }
                }
            }
        }
    });

    res.curve.grid.assign(grid.begin(), grid.end());
    res.curve.density.assign(grid.size(), 0.0);
    double neg = 0.0;
    for (std::size_t k = 0; k < nk; ++k) {
        for (std::size_t x = 0; x < grid.size(); ++x) res.curve.density[x] += partial[k][x];
        neg += neglected[k];
    }
    res.neglected_rms = res.flagged_weight > 0.0 ? std::sqrt(neg / res.flagged_weight) : 0.0;
    res.curve.validate();
    return res;
}

}  // namespace igbm
