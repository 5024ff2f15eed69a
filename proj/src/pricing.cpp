#include "igbm/pricing.hpp"

#include "igbm/error.hpp"
#include "igbm/io.hpp"
#include "igbm/numerics.hpp"
#include "igbm/parallel.hpp"
#include "igbm/returns.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace igbm {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double phi(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }
double Phi(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double sigma_I_checked(const ModelParams& params) {
    if (!(params.sigma_I2 > 0.0)) throw ParameterError("pricing: sigma_I must be positive");
    return std::sqrt(params.sigma_I2);
}

double noninteracting_member(double ubar, double kappa, double a, double sI) {
    return kappa / sI * phi((kappa * ubar - a) / sI);
}

DensityCurve tabulate(std::span<const double> grid, int workers, const std::function<double(double)>& f) {
    DensityCurve c;
    c.grid.assign(grid.begin(), grid.end());
    c.density.assign(grid.size(), 0.0);
    parallel_for(grid.size(), workers, [&](std::size_t i) { c.density[i] = f(grid[i]); });
    c.validate();
    return c;
}

}  // namespace

PricingCoefficients pricing_coefficients(double ubar, const ModelParams& params, double u0) {
    if (params.kappa_dist.is_fixed()) throw ParameterError("pricing: closed form needs a Gamma kappa law");
    const double sI = sigma_I_checked(params);
    const double k0 = params.kappa_dist.kappa0;
    const double a = params.I0 + params.sigma0 * u0;
    const double x = k0 * ubar / sI;
    return {x * x, 1.0 - k0 * ubar * a / params.sigma_I2};
}

double noninteracting_pricing_density(double ubar, const ModelParams& params, double u0) {
    const auto c = pricing_coefficients(ubar, params, u0);
    const double sI = std::sqrt(params.sigma_I2);
    const double nu = params.kappa_dist.nu, k0 = params.kappa_dist.kappa0;
    const double a = params.I0 + params.sigma0 * u0;
    const double pref = nu * k0 / (std::sqrt(2.0 * std::numbers::pi) * sI) * std::exp(-0.5 * a * a / params.sigma_I2);
    if (c.beta == 0.0) return pref;
    // exp(g^2/(4 beta)) D_p(g/sqrt(beta)) = exp(z^2/4) D_p(z), z = g/sqrt(beta)
    const double z = c.pricing_gamma / std::sqrt(c.beta);
    const double p = -(1.0 + nu);
    return pref * std::exp(0.5 * p * std::log(c.beta) + log_parabolic_cylinder_D_scaled(p, z));
}

DensityCurve noninteracting_pricing_pdf_closed(std::span<const double> grid, const ModelParams& params, double u0) {
    return tabulate(grid, 1, [&](double u) { return noninteracting_pricing_density(u, params, u0); });
}

double noninteracting_pricing_density_quadrature(double ubar, const ModelParams& params, double u0) {
    const double sI = sigma_I_checked(params);
    const double a = params.I0 + params.sigma0 * u0;
    return kappa_expectation(params.kappa_dist,
                             [&](double k) { return noninteracting_member(ubar, k, a, sI); }, 1e-12);
}

DensityCurve noninteracting_pricing_pdf_quadrature(std::span<const double> grid, const ModelParams& params,
                                                   double u0) {
    return tabulate(grid, 1, [&](double u) { return noninteracting_pricing_density_quadrature(u, params, u0); });
}

double interacting_pricing_density(double ubar, double kappa, const OrderParameters& op, const ModelParams& params,
                                   double u0) {
    const auto mc = member_coefficients(kappa, op, params, u0);
    if (!(mc.B > 0.0)) throw ParameterError("pricing: sigma_I^2 + J^2 q must be positive");
    if (mc.gap && std::abs(ubar) < mc.u_star) return 0.0;
    const double e = 2.0 / (mc.s * std::sqrt(std::numbers::pi)) * std::exp(-(ubar * ubar) / (mc.s * mc.s));
    const double zp = (kappa - mc.K * e) / mc.B;
    if (zp < -1e-12) {
        throw NumericalError("pricing: dz/dubar = " + format17(zp) + " < 0 on a reachable branch at ubar=" +
                             format17(ubar));
    }
    const double z = (kappa * ubar - mc.A - mc.K * std::erf(ubar / mc.s)) / mc.B;
    return phi(z) * std::max(zp, 0.0);
}

InteractingPricing interacting_pricing_pdf(std::span<const double> grid, const OrderParameters& op,
                                           const ModelParams& params, double u0, std::optional<double> kappa) {
    if (!kappa) {
        if (!params.kappa_dist.is_fixed()) {
            throw ParameterError("pricing: pass kappa or use a fixed kappa law for a single-member curve");
        }
        kappa = params.kappa_dist.kappa;
    }
    if (!std::isfinite(op.m) || !std::isfinite(op.q) || !std::isfinite(op.chi) || op.iterations <= 0) {
        throw ParameterError("pricing: order parameters are not a converged solution");
    }
    if (std::abs(op.u0 - u0) > 1e-12) {
        throw ParameterError("pricing: order parameters were solved at u0=" + format17(op.u0) + ", not " +
                             format17(u0));
    }
    if (grid.size() < 2) throw ParameterError("pricing: grid needs at least two points");
    const double k = *kappa;
    const auto mc = member_coefficients(k, op, params, u0);

    InteractingPricing out;
    out.curve.grid.assign(grid.begin(), grid.end());
    out.curve.density.reserve(grid.size());
    for (double u : grid) out.curve.density.push_back(interacting_pricing_density(u, k, op, params, u0));
    out.curve.validate();
    if (mc.gap) out.gap = std::pair{-mc.u_star, mc.u_star};

    // Mass of [a, b] in the z measure versus its ubar integral on the
    // reachable pieces; z(-u*) = z(u*) so the gap carries no z mass.
    const double a = grid.front(), b = grid.back();
    auto zof = [&](double u) { return (k * u - mc.A - mc.K * std::erf(u / mc.s)) / mc.B; };
    std::vector<std::pair<double, double>> pieces;
    if (mc.gap) {
        if (a < -mc.u_star) pieces.emplace_back(a, std::min(b, -mc.u_star));
        if (b > mc.u_star) pieces.emplace_back(std::max(a, mc.u_star), b);
    } else {
        pieces.emplace_back(a, b);
    }
    const auto gl = gauss_legendre(24, 0.0, 1.0);
    double quad = 0.0, exact = 0.0;
    for (auto [lo, hi] : pieces) {
        if (!(hi > lo)) continue;
        exact += Phi(zof(hi)) - Phi(zof(lo));
        // Panels of at most a quarter of the local scale s.
        const int panels = std::clamp(static_cast<int>(std::ceil((hi - lo) / (0.25 * mc.s))), 1, 20000);
        const double h = (hi - lo) / panels;
        for (int pn = 0; pn < panels; ++pn) {
            for (std::size_t i = 0; i < gl.size(); ++i) {
                const double u = lo + h * (pn + gl.nodes[i]);
                quad += h * gl.weights[i] * interacting_pricing_density(u, k, op, params, u0);
            }
        }
    }
    if (exact > 0.0) {
        out.renormalization = quad / exact;
        for (auto& d : out.curve.density) d /= out.renormalization;
    }
    return out;
}

DensityCurve market_pricing_pdf(std::span<const double> grid, const ModelParams& params, double u0,
                                const std::optional<OrderParameters>& op, int workers) {
    if (!op) {
        const double sI = sigma_I_checked(params);
        const double a = params.I0 + params.sigma0 * u0;
        return tabulate(grid, workers, [&](double u) {
            return kappa_expectation(params.kappa_dist, [&](double k) { return noninteracting_member(u, k, a, sI); },
                                     1e-10);
        });
    }
    if (std::abs(op->u0 - u0) > 1e-12) {
        throw ParameterError("pricing: order parameters were solved at u0=" + format17(op->u0) + ", not " +
                             format17(u0));
    }
    return tabulate(grid, workers, [&](double u) {
        return kappa_expectation(params.kappa_dist,
                                 [&](double k) { return interacting_pricing_density(u, k, *op, params, u0); }, 1e-9);
    });
}

}  // namespace igbm
