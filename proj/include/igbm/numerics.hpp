#pragma once

#include <functional>
#include <span>
#include <vector>

namespace igbm {

enum class QuadratureKind { gauss_hermite, gauss_laguerre, gauss_legendre, trapezoid };

// Nodes strictly increasing, weights strictly positive. Nodes whose weight
// underflows double precision (only Gauss-Hermite beyond n ~ 360) are omitted.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    QuadratureKind kind = QuadratureKind::trapezoid;

    std::size_t size() const { return nodes.size(); }

    template <class F>
    double integrate(F&& f) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
        return acc;
    }
};

// Gauss-Hermite rule for weight exp(-x^2) on the real line, 1 <= n <= 512.
QuadratureRule gauss_hermite(int n);

// Expectation over a standard normal variable: nodes sqrt(2) x_i, weights
// w_i / sqrt(pi) (sum to one). Nodes with weight below `prune` are dropped.
QuadratureRule standard_normal_rule(int n, double prune = 0.0);

// Generalized Gauss-Laguerre for weight x^alpha exp(-x) on [0, inf), alpha > -1.
QuadratureRule gauss_laguerre(int n, double alpha);

// Gauss-Legendre on [a, b].
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

// Gauss rule for int_0^1 f(y) (-ln y) dy, 1 <= n <= 64.
QuadratureRule gauss_log_weight(int n);

double erf(double x);
double erfc(double x);
double log_gamma(double x);

// D_p(z) for p < 0 from the integral representation
//   D_{-a}(z) = exp(-z^2/4) / Gamma(a) * int_0^inf t^(a-1) exp(-z t - t^2/2) dt.
// Relative accuracy better than 1e-8 for |z| <= 30.
double parabolic_cylinder_D(double p, double z);

// log( exp(z^2/4) D_p(z) ), finite for arbitrarily large |z| where the
// unscaled value under/overflows.
double log_parabolic_cylinder_D_scaled(double p, double z);

struct RootOptions {
    double x_tol = 1e-12;
    double f_tol = 0.0;
    int max_iter = 500;
};

// Root of f on [lo, hi] with f(lo) f(hi) <= 0. Alternates secant and bisection
// steps so the bracket at least halves every two iterations; ties go to lo.
double find_root_bracketed(const std::function<double(double)>& f, double lo, double hi,
                           double tol);
double find_root_bracketed(const std::function<double(double)>& f, double lo, double hi,
                           const RootOptions& opts);

// Adaptive Gauss-Kronrod on [a, b]; b may be +infinity.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-12, double* error_estimate = nullptr);

// Globally adaptive Gauss-Kronrod over the panels given by `breaks`: the
// panel with the largest error estimate is bisected until the summed error
// is below max(abs_tol, rel_tol |value|) or max_panels is reached.
double integrate_global(const std::function<double(double)>& f, std::span<const double> breaks,
                        double rel_tol = 1e-12, double abs_tol = 0.0, int max_panels = 4000);

// Trapezoid rule over tabulated values (x strictly increasing).
double trapezoid(std::span<const double> x, std::span<const double> y);

}  // namespace igbm
