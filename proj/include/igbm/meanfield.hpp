#pragma once

#include "igbm/numerics.hpp"
#include "igbm/params.hpp"

#include <optional>
#include <string>
#include <vector>

namespace igbm {

// Mean-field state at one value of the slow factor.
struct OrderParameters {
    double m = 0.0;
    double q = 0.0;
    double chi = 0.0;
    double Chat0 = 0.0;
    // q(tau) tabulated on tau (tau[0] = 0); empty unless requested.
    std::vector<double> tau;
    std::vector<double> q_tau;
    double u0 = 0.0;
    int iterations = 0;
    double residual = 0.0;
    // Set when a solution with chi < 0 was produced.
    bool chi_negative = false;
};

// (sigma^2 + J^2 Chat0) / (2 kappa)
double sigma_u2(double kappa, double Chat0, double sigma, double J);
// (sigma^2 e^{-kappa tau} + J^2 Chat0) / (sigma^2 + J^2 Chat0)
double rho_u(double tau, double kappa, double Chat0, double sigma, double J);

enum class Stability { stable, unstable };

struct UbarRoot {
    double ubar;
    Stability stability;
};

// All real roots of
//   kappa u = J0 m + I0 + sqrt(sigma_I^2 + J^2 q) z + alpha J^2 chi erf(u / s) + sigma0 u0,
// s = sqrt(1 + 2 sigma_u^2), ascending, each tagged stable iff dz/du > 0.
std::vector<UbarRoot> solve_ubar(double z, double kappa, const OrderParameters& op,
                                 const ModelParams& params, double u0);

// The root a member with frozen noise z settles on: the only root without a
// gap, otherwise the lower branch for z < -A/B and the upper one above it.
double member_ubar(double z, double kappa, const OrderParameters& op, const ModelParams& params,
                   double u0);

// Coefficients of the long-term mean equation kappa u = A + B z + K erf(u/s).
struct MemberCoefficients {
    double A, B, K, s, sigma_u2;
    // 2K / (kappa s sqrt(pi)) > 1: the z -> u map has a forbidden interval.
    bool gap;
    // Turning points +-u_turn and branch ends +-u_star when gap is true.
    double u_turn = 0.0;
    double u_star = 0.0;
};
MemberCoefficients member_coefficients(double kappa, const OrderParameters& op,
                                       const ModelParams& params, double u0);

enum class FastNoiseAverage {
    // x-averages reduced to one-dimensional smooth integrals (exact identity).
    reduced,
    // Direct Gauss-Hermite over the fast noise x.
    x_quadrature,
};

struct ThetaGridOptions {
    int n_z = 128;
    int n_kappa = 48;
    int n_x = 64;
    // Inner rules of the reduced fast-noise averages.
    int n_rho = 16;
    int n_log = 24;
    // Gauss-Legendre nodes per panel on the branches when a gap is present.
    int n_branch = 16;
    double z_max = 9.0;
    double prune = 1e-18;
    // q(tau) points written with the solution (0 = none).
    int n_tau = 0;
    FastNoiseAverage fast_noise = FastNoiseAverage::reduced;
};

// Discretization of the theta = (I, kappa, z) ensemble.
struct ThetaGrid {
    QuadratureRule z_rule;  // standard normal z
    std::vector<double> kappa_nodes;
    std::vector<double> kappa_weights;  // sum to one
    QuadratureRule x_rule;              // standard normal x
    QuadratureRule rho_rule;            // Gauss-Legendre on [0, 1]
    QuadratureRule log_rule;            // weight -ln y on [0, 1]
    QuadratureRule branch_rule;         // Gauss-Legendre on [0, 1]
    std::vector<double> tau;            // q(tau) abscissae, empty if not tabulated
    ThetaGridOptions options;

    // Kappa nodes: Gauss-Legendre in log kappa over [kappa_floor, kappa_max]
    // with the Gamma density, renormalized on that range.
    static ThetaGrid build(const ModelParams& params, const ThetaGridOptions& options = {});
};

// Right-hand sides of the self-consistency equations evaluated at op.
// `field_shift` is added to A for every member (used by stability probes).
OrderParameters rhs_order_parameters(const OrderParameters& op, const ThetaGrid& grid,
                                     const ModelParams& params, double u0, double field_shift = 0.0);

// q_theta(rho) for one member: <erf(u + s x) erf((u + rho s x)/sqrt(1 + 2(1-rho^2) s^2))>_x
// with s^2 = sigma_u2, evaluated on the reduced route.
double pair_correlation(double ubar, double sigma_u2, double rho, const QuadratureRule& rho_rule);

struct SolveControl {
    double damping = 0.5;
    double tol = 1e-10;
    int max_iter = 5000;
    std::optional<OrderParameters> init;
    // Hold m at this value (symmetric-phase solves).
    std::optional<double> pin_m;
};

// Damped iteration op <- (1 - lambda) op + lambda rhs(op) until the largest
// change, relative to max(1, |value|), is below tol. Throws ConvergenceError.
OrderParameters solve_fixed_point(const ModelParams& params, double u0, const ThetaGrid& grid,
                                  const SolveControl& ctrl = {});

// Non-interacting order parameters: rhs at op = 0.
OrderParameters noninteracting_solution(const ModelParams& params, double u0, const ThetaGrid& grid);

// Ferromagnetic instability of the m = 0 solution (requires I0 = u0 = 0):
// solves for (q, chi, Chat0) at m = 0, then J0c = 1 / (d m' / d A).
struct CriticalPoint {
    double J0c;
    double slope;  // d m' / d A
    OrderParameters symmetric;
};
CriticalPoint critical_J0(const ModelParams& params, const ThetaGrid& grid, const SolveControl& ctrl = {});

enum class ScanAxis { J0, kappa0 };

struct PhaseScanOptions {
    ScanAxis axis = ScanAxis::J0;
    double lo = 0.4;
    double hi = 1.2;
    int resolution = 9;
    double detection_threshold = 1e-3;
    double init_m = 0.1;
    SolveControl ctrl;
    ThetaGridOptions grid;
    int workers = 1;
};

struct ScanPoint {
    double axis_value = 0.0;
    std::optional<OrderParameters> op;  // empty when the solve did not converge
    std::string error;
};

struct BoundaryPoint {
    double kappa0 = 0.0;
    std::optional<double> J0c;
    std::string error;
};

struct PhaseScanResult {
    std::vector<ScanPoint> points;
    std::vector<BoundaryPoint> boundary;
};

// Zero-field scan (I0 = u0 = 0 required). Along J0 the boundary has one
// entry at the template kappa0; along kappa0 one entry per scan value.
PhaseScanResult phase_scan(const ModelParams& templ, const PhaseScanOptions& options);

// Parameters with the kappa scale replaced (Gamma law keeps its shape).
ModelParams with_kappa0(const ModelParams& params, double kappa0);

}  // namespace igbm
