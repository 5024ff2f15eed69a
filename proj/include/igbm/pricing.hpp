#pragma once

#include "igbm/density.hpp"
#include "igbm/meanfield.hpp"
#include "igbm/params.hpp"

#include <optional>
#include <span>
#include <utility>

namespace igbm {

// beta = (kappa0 ubar / sigma_I)^2 and pricing_gamma = 1 - kappa0 ubar (I0 + sigma0 u0) / sigma_I^2.
struct PricingCoefficients {
    double beta;
    double pricing_gamma;
};
PricingCoefficients pricing_coefficients(double ubar, const ModelParams& params, double u0);

// Equilibrium log-price law without interactions, Gamma(kappa0, nu) mean reversion:
//   (nu kappa0 / sqrt(2 pi sigma_I^2)) exp(-(I0 + sigma0 u0)^2 / (2 sigma_I^2))
//     beta^{-(1+nu)/2} exp(g^2/(4 beta)) D_{-(1+nu)}(g / sqrt(beta)),  g = pricing_gamma.
// The last two factors are evaluated together in scaled form, so ubar -> 0
// reduces to the finite limit nu kappa0 / sqrt(2 pi sigma_I^2) exp(...).
double noninteracting_pricing_density(double ubar, const ModelParams& params, double u0);
DensityCurve noninteracting_pricing_pdf_closed(std::span<const double> grid, const ModelParams& params, double u0);

// Direct kappa average of Normal((I0 + sigma0 u0)/kappa, sigma_I^2/kappa^2).
double noninteracting_pricing_density_quadrature(double ubar, const ModelParams& params, double u0);
DensityCurve noninteracting_pricing_pdf_quadrature(std::span<const double> grid, const ModelParams& params,
                                                   double u0);

// Density of ubar for one member rate kappa: phi(z(ubar)) dz/dubar on the
// reachable set, zero inside the gap (-u*, u*) when the map jumps.
double interacting_pricing_density(double ubar, double kappa, const OrderParameters& op, const ModelParams& params,
                                   double u0);

struct InteractingPricing {
    DensityCurve curve;
    // Mass of the grid support by the z measure over its integral in ubar;
    // the curve has been divided by it.
    double renormalization = 1.0;
    // Excluded ubar interval, when the member map has a gap.
    std::optional<std::pair<double, double>> gap;
};

// Fixed kappa (the kappa of params, or `kappa` when given). `op` must be a
// converged solution at u0.
InteractingPricing interacting_pricing_pdf(std::span<const double> grid, const OrderParameters& op,
                                           const ModelParams& params, double u0,
                                           std::optional<double> kappa = std::nullopt);

// Kappa average over the full law of params (no floor). Without `op` the
// non-interacting family is averaged.
DensityCurve market_pricing_pdf(std::span<const double> grid, const ModelParams& params, double u0,
                                const std::optional<OrderParameters>& op, int workers = 1);

}  // namespace igbm
