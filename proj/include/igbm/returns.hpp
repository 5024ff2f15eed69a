#pragma once

#include "igbm/density.hpp"
#include "igbm/meanfield.hpp"
#include "igbm/params.hpp"

#include <functional>
#include <span>
#include <vector>

namespace igbm {

// E_kappa[f(kappa)] over the full kappa law (no floor). Gamma laws are
// integrated adaptively after kappa = kappa0 w^{1/nu}, which removes the
// kappa^{nu-1} endpoint behaviour.
double kappa_expectation(const KappaDistribution& dist, const std::function<double(double)>& f,
                         double rel_tol = 1e-11);

// Quasi-stationary returns over a separation tau: each member is
// Normal(0, (sigma^2/kappa)(1 - e^{-kappa tau})), averaged over kappa.
double qs_return_density(double du, double tau, const ModelParams& params);
DensityCurve qs_return_pdf(std::span<const double> grid, double tau, const ModelParams& params);

// Large-separation closed form for Gamma(kappa0, nu) mean reversion:
// sqrt(kappa0/(2 pi sigma^2)) Gamma(nu+1/2)/Gamma(nu) (1 + kappa0 du^2/(2 sigma^2))^{-(nu+1/2)}.
double qs_return_density_asymptotic(double du, const ModelParams& params);
DensityCurve qs_return_pdf_asymptotic(std::span<const double> grid, const ModelParams& params);

// <(du)^2> in closed form; the log law is used for |nu - 1| < 1e-6.
double qs_return_variance(double tau, const ModelParams& params);

// Order parameters tabulated over the slow factor.
struct OpTable {
    std::vector<double> u0;
    std::vector<OrderParameters> ops;

    double u0_min() const { return u0.front(); }
    double u0_max() const { return u0.back(); }
    // Linear interpolation of m, q, chi, Chat0. Outside the table this throws
    // ParameterError unless `clamp`, which then holds the end values.
    OrderParameters at(double u0, bool clamp = false) const;
};

// Solves at every node (ascending grid that must contain [-4, 4]), warm
// starting outward from the node closest to zero. Throws ConvergenceError
// naming every failed node.
OpTable op_table(const ModelParams& params, std::span<const double> u0_grid, const ThetaGrid& grid,
                 const SolveControl& ctrl = {});

enum class SlowScale { intermediate, long_time };

struct SlowReturnOptions {
    int n_u0 = 32;  // Gauss-Hermite nodes per slow-factor value
    ThetaGridOptions grid{.n_z = 48};
    // Gaussian kernels are summed within this many standard deviations.
    double cutoff_sd = 10.0;
    int workers = 1;
};

struct SlowReturnResult {
    DensityCurve curve;
    // Largest |q_t - q_t'| / q over the slow-factor pairs.
    double max_q_rel_diff = 0.0;
    // RMS of the frozen-noise term (B_t - B_t') z / kappa that the mean
    // difference leaves out, over pairs with |q_t - q_t'| / q > 1e-2.
    double neglected_rms = 0.0;
    double flagged_weight = 0.0;  // probability mass of those pairs
};

// Returns between two slow-factor values with correlation r = e^{-gamma tau}
// (intermediate) or r = 0 (long_time). Each member contributes
// Normal(du_bar, sigma_u^2(t) + sigma_u^2(t')) with
//   du_bar = [J0 (m_t - m_t') + sigma0 (u0 - u0') + alpha J^2 (chi_t m_t,theta - chi_t' m_t',theta)] / kappa.
SlowReturnResult slow_return_pdf(std::span<const double> grid, SlowScale scale, double tau,
                                 const ModelParams& params, const OpTable& table,
                                 const SlowReturnOptions& options = {});

}  // namespace igbm
