#include "igbm/meanfield.hpp"

#include "igbm/density.hpp"
#include "igbm/error.hpp"
#include "igbm/io.hpp"
#include "igbm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace igbm {

namespace {

constexpr double kTwoOverSqrtPi = 2.0 / 1.7724538509055160273;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double phi(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

// d/du erf(u / s)
double erf_slope(double u, double s) {
    const double t = u / s;
    return kTwoOverSqrtPi / s * std::exp(-t * t);
}

// Root of kappa u - c - K erf(u/s) on [lo, hi], where the function is
// increasing (or decreasing when `decreasing`) and changes sign.
double solve_member_root(double kappa, double c, double K, double s, double lo, double hi,
                         bool decreasing = false) {
    const double sign = decreasing ? -1.0 : 1.0;
    auto f = [&](double u) { return sign * (kappa * u - c - K * std::erf(u / s)); };
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo > 0.0 || fhi < 0.0) {
        throw BracketError("member root: no sign change on [" + format17(lo) + ", " + format17(hi) +
                               "] (c=" + format17(c) + ", kappa=" + format17(kappa) + ")",
                           lo, hi, flo, fhi);
    }
    double u = std::clamp(c / kappa, lo, hi);
    if (u == lo || u == hi) u = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double fu = f(u);
        if (fu == 0.0) return u;
        if (fu < 0.0) lo = u; else hi = u;
        const double d = sign * (kappa - K * erf_slope(u, s));
        double next = d > 0.0 ? u - fu / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double scale = std::max(1.0, std::abs(next));
        if (std::abs(next - u) <= 4e-16 * scale || hi - lo <= 4e-16 * scale) return next;
        u = next;
    }
    return u;
}

double pad(double x) { return 1e-9 * std::max(1.0, std::abs(x)); }

// Bracketing helpers for kappa u = c + K erf(u/s).
double root_monotone(double kappa, double c, double K, double s) {
    if (K == 0.0) return c / kappa;
    const double a = std::abs(K);
    const double lo = (c - a) / kappa, hi = (c + a) / kappa;
    return solve_member_root(kappa, c, K, s, lo - pad(lo), hi + pad(hi));
}

double root_upper(double kappa, double c, double K, double s, double u_turn) {
    const double hi = (c + K) / kappa;
    return solve_member_root(kappa, c, K, s, u_turn, std::max(hi, u_turn) + pad(hi) + s);
}

double root_lower(double kappa, double c, double K, double s, double u_turn) {
    const double lo = (c - K) / kappa;
    return solve_member_root(kappa, c, K, s, std::min(lo, -u_turn) - pad(lo) - s, -u_turn);
}

// G(r) = [(1 + c(1+r))(1 + c(1-r))]^{-1/2} exp(-2 u^2 / (1 + c(1+r))), c = 2 sigma_u^2
double price_kernel(double u, double c, double r) {
    const double plus = 1.0 + c * (1.0 + r);
    const double minus = 1.0 + c * (1.0 - r);
    return std::exp(-2.0 * u * u / plus) / std::sqrt(plus * minus);
}

// <erf(u + s x) erf((u + rho s x)/sqrt(1 + 2(1 - rho^2) s^2))>_x on the reduced
// route: erf(u/s')^2 + (4/pi) int_{w_rho}^{w_0} h(r(w)) dw with w^2 = 1 + c(1 - r).
double pair_correlation_reduced(double u, double s2, double rho, const QuadratureRule& rule) {
    const double sp = std::sqrt(1.0 + 2.0 * s2);
    const double g = std::erf(u / sp);
    if (s2 <= 0.0) return g * g;
    const double c = 2.0 * s2;
    const double w0 = sp;  // sqrt(1 + c)
    const double wr = std::sqrt(1.0 + c * (1.0 - rho));
    const double len = w0 - wr;
    if (len <= 0.0) return g * g;
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double w = wr + len * rule.nodes[i];
        const double r = 1.0 - (w * w - 1.0) / c;
        const double plus = 1.0 + c * (1.0 + r);
        acc += rule.weights[i] * std::exp(-2.0 * u * u / plus) / std::sqrt(plus);
    }
    return g * g + 4.0 / std::numbers::pi * len * acc;
}

double pair_correlation_x(double u, double s2, double rho, const QuadratureRule& x_rule) {
    const double su = std::sqrt(s2);
    const double den = std::sqrt(1.0 + 2.0 * (1.0 - rho * rho) * s2);
    double acc = 0.0;
    for (std::size_t i = 0; i < x_rule.size(); ++i) {
        const double x = x_rule.nodes[i];
        acc += x_rule.weights[i] * std::erf(u + su * x) * std::erf((u + rho * su * x) / den);
    }
    return acc;
}

struct Accumulator {
    double m = 0, chi = 0, q = 0, C = 0, mass = 0;
    std::vector<double> q_tau;
};

struct MemberContext {
    const ThetaGrid& grid;
    double kappa;
    double sigma;  // fast noise amplitude
    MemberCoefficients mc;
    double rho_inf;
    bool stein_chi;  // B == 0
    bool with_tau;
};

void accumulate(Accumulator& acc, const MemberContext& ctx, double w, double u, double z) {
    const auto& mc = ctx.mc;
    const double g = std::erf(u / mc.s);
    acc.mass += w;
    acc.m += w * g;
    if (ctx.stein_chi) {
        const double e = erf_slope(u, mc.s);
        acc.chi += w * e / (ctx.kappa - mc.K * e);
    } else {
        acc.chi += w * z * g;
    }
    const auto& opt = ctx.grid.options;
    const double s2 = mc.sigma_u2;
    if (opt.fast_noise == FastNoiseAverage::reduced) {
        acc.q += w * pair_correlation_reduced(u, s2, ctx.rho_inf, ctx.grid.rho_rule);
        if (ctx.sigma > 0.0) {
            const double c = 2.0 * s2;
            double inner = 0.0;
            const auto& lr = ctx.grid.log_rule;
            for (std::size_t j = 0; j < lr.size(); ++j) {
                inner += lr.weights[j] * price_kernel(u, c, ctx.rho_inf + (1.0 - ctx.rho_inf) * lr.nodes[j]);
            }
            acc.C += w * 4.0 * ctx.sigma * ctx.sigma / (std::numbers::pi * ctx.kappa * ctx.kappa) * inner;
        }
        if (ctx.with_tau) {
            for (std::size_t j = 0; j < ctx.grid.tau.size(); ++j) {
                const double rho = ctx.rho_inf + (1.0 - ctx.rho_inf) * std::exp(-ctx.kappa * ctx.grid.tau[j]);
                acc.q_tau[j] += w * pair_correlation_reduced(u, s2, rho, ctx.grid.rho_rule);
            }
        }
    } else {
        const auto& xr = ctx.grid.x_rule;
        const double f_inf = s2 > 0 ? pair_correlation_x(u, s2, ctx.rho_inf, xr) : g * g;
        acc.q += w * f_inf;
        if (s2 > 0.0 && ctx.sigma > 0.0) {
            // (2/kappa) int_0^1 [F(rho_inf + (1 - rho_inf) y) - F(rho_inf)] / y dy
            const QuadratureRule& yr = ctx.grid.branch_rule;
            double inner = 0.0;
            for (std::size_t j = 0; j < yr.size(); ++j) {
                const double y = yr.nodes[j];
                const double f = pair_correlation_x(u, s2, ctx.rho_inf + (1.0 - ctx.rho_inf) * y, xr);
                inner += yr.weights[j] * (f - f_inf) / y;
            }
            acc.C += w * 2.0 / ctx.kappa * inner;
        }
        if (ctx.with_tau) {
            for (std::size_t j = 0; j < ctx.grid.tau.size(); ++j) {
                const double rho = ctx.rho_inf + (1.0 - ctx.rho_inf) * std::exp(-ctx.kappa * ctx.grid.tau[j]);
                acc.q_tau[j] += w * (s2 > 0 ? pair_correlation_x(u, s2, rho, xr) : g * g);
            }
        }
    }
}

enum class Branch { lower, upper, whole };

// Integrates one stable branch in the u variable with weight phi(z(u)) z'(u).
// `whole` covers a map without a gap, used where u(z) is too steep for the
// z rule.
void integrate_branch(Accumulator& acc, const MemberContext& ctx, double weight, Branch branch) {
    const auto& mc = ctx.mc;
    const double kappa = ctx.kappa;
    const double Z = ctx.grid.options.z_max;
    const double z_star = -mc.A / mc.B;
    double z_lo = -Z, z_hi = Z;
    if (branch == Branch::upper) z_lo = std::max(z_star, -Z);
    if (branch == Branch::lower) z_hi = std::min(z_star, Z);
    if (!(z_hi > z_lo)) return;

    auto root_at = [&](double z) {
        const double c = mc.A + mc.B * z;
        switch (branch) {
            case Branch::upper: return root_upper(kappa, c, mc.K, mc.s, mc.u_turn);
            case Branch::lower: return root_lower(kappa, c, mc.K, mc.s, mc.u_turn);
            default: return root_monotone(kappa, c, mc.K, mc.s);
        }
    };
    double ua = root_at(z_lo), ub = root_at(z_hi);
    if (branch == Branch::upper && z_star >= -Z) ua = mc.u_star;
    if (branch == Branch::lower && z_star <= Z) ub = -mc.u_star;
    std::vector<double> br{ua, ub};
    const double s = mc.s;
    for (double k : {0.5, 2.0, 6.0}) {
        if (branch == Branch::upper) br.push_back(ua + k * s);
        if (branch == Branch::lower) br.push_back(ub - k * s);
        if (branch == Branch::whole) {
            br.push_back(k * s);
            br.push_back(-k * s);
        }
    }
    if (branch == Branch::whole) br.push_back(0.0);
    for (double zb : {-6.0, -4.0, -3.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 6.0}) {
        if (zb > z_lo && zb < z_hi) br.push_back(root_at(zb));
    }
    std::sort(br.begin(), br.end());
    std::vector<double> pts;
    for (double b : br) {
        if (b < ua || b > ub) continue;
        if (!pts.empty() && b - pts.back() <= 1e-12 * std::max(1.0, std::abs(b))) continue;
        pts.push_back(b);
    }
    const auto& rule = ctx.grid.branch_rule;
    for (std::size_t p = 0; p + 1 < pts.size(); ++p) {
        const double a = pts[p], len = pts[p + 1] - pts[p];
        for (std::size_t i = 0; i < rule.size(); ++i) {
            const double u = a + len * rule.nodes[i];
            const double z = (kappa * u - mc.A - mc.K * std::erf(u / s)) / mc.B;
            const double zp = (kappa - mc.K * erf_slope(u, s)) / mc.B;
            if (zp < -1e-12) {
                throw NumericalError("Jacobian dz/du = " + format17(zp) + " is negative on a stable branch at u=" +
                                     format17(u) + ", kappa=" + format17(kappa));
            }
            accumulate(acc, ctx, weight * len * rule.weights[i] * phi(z) * std::max(zp, 0.0), u, z);
        }
    }
}

OrderParameters evaluate(const OrderParameters& op, const ThetaGrid& grid, const ModelParams& params,
                         double u0, double field_shift, bool with_tau) {
    Accumulator total;
    if (with_tau) total.q_tau.assign(grid.tau.size(), 0.0);
    const double J = params.coupling.J;
    const double sigma = params.sigma;
    const double noise_var = sigma * sigma + J * J * op.Chat0;
    const double rho_inf = noise_var > 0.0 ? J * J * op.Chat0 / noise_var : 0.0;

    for (std::size_t k = 0; k < grid.kappa_nodes.size(); ++k) {
        const double kappa = grid.kappa_nodes[k];
        const double wk = grid.kappa_weights[k];
        MemberCoefficients mc = member_coefficients(kappa, op, params, u0);
        if (field_shift != 0.0) {
            mc.A += field_shift;
        }
        MemberContext ctx{grid, kappa, sigma, mc, rho_inf, mc.B == 0.0, with_tau};
        if (!mc.gap) {
            if (mc.B == 0.0) {
                accumulate(total, ctx, wk, root_monotone(kappa, mc.A, mc.K, mc.s), 0.0);
                continue;
            }
            // Close to the gap threshold u(z) is nearly discontinuous at
            // z* and the z rule cannot resolve it.
            const double ratio = 2.0 * mc.K / (kappa * mc.s * std::sqrt(std::numbers::pi));
            if (ratio > 0.5) {
                integrate_branch(total, ctx, wk, Branch::whole);
                continue;
            }
            for (std::size_t i = 0; i < grid.z_rule.size(); ++i) {
                const double z = grid.z_rule.nodes[i];
                const double u = root_monotone(kappa, mc.A + mc.B * z, mc.K, mc.s);
                accumulate(total, ctx, wk * grid.z_rule.weights[i], u, z);
            }
        } else {
            if (mc.B == 0.0) {
                throw ParameterError("sigma_I^2 + J^2 q = 0 while the member map has a gap (kappa=" +
                                     format17(kappa) + ")");
            }
            integrate_branch(total, ctx, wk, Branch::lower);
            integrate_branch(total, ctx, wk, Branch::upper);
        }
    }

    OrderParameters out;
    out.u0 = u0;
    out.m = total.m;
    out.q = total.q;
    out.chi = total.chi;
    out.Chat0 = total.C;
    if (grid.kappa_nodes.empty()) return out;
    // chi uses B of the input state, as in the self-consistency equation.
    const double B = std::sqrt(params.sigma_I2 + J * J * op.q);
    if (B > 0.0) out.chi /= B;
    if (with_tau) {
        out.tau = grid.tau;
        out.q_tau = std::move(total.q_tau);
    }
    out.chi_negative = out.chi < 0.0;
    return out;
}

}  // namespace

double sigma_u2(double kappa, double Chat0, double sigma, double J) {
    if (!(kappa > 0.0)) throw ParameterError("sigma_u2: kappa must be positive");
    return (sigma * sigma + J * J * Chat0) / (2.0 * kappa);
}

double rho_u(double tau, double kappa, double Chat0, double sigma, double J) {
    const double den = sigma * sigma + J * J * Chat0;
    if (!(den > 0.0)) throw ParameterError("rho_u: sigma^2 + J^2 Chat0 must be positive");
    return (sigma * sigma * std::exp(-kappa * std::abs(tau)) + J * J * Chat0) / den;
}

MemberCoefficients member_coefficients(double kappa, const OrderParameters& op, const ModelParams& params,
                                       double u0) {
    if (!(kappa > 0.0)) throw ParameterError("member: kappa must be positive");
    const auto& c = params.coupling;
    MemberCoefficients mc{};
    mc.sigma_u2 = sigma_u2(kappa, op.Chat0, params.sigma, c.J);
    mc.s = std::sqrt(1.0 + 2.0 * mc.sigma_u2);
    mc.A = c.J0 * op.m + params.I0 + params.sigma0 * u0;
    mc.B = std::sqrt(params.sigma_I2 + c.J * c.J * op.q);
    mc.K = c.alpha * c.J * c.J * op.chi;
    const double ratio = mc.K > 0.0 ? 2.0 * mc.K / (kappa * mc.s * std::sqrt(std::numbers::pi)) : 0.0;
    mc.gap = ratio > 1.0;
    if (mc.gap) {
        mc.u_turn = mc.s * std::sqrt(std::log(ratio));
        mc.u_star = solve_member_root(kappa, 0.0, mc.K, mc.s, mc.u_turn, mc.K / kappa + pad(mc.K / kappa));
    }
    return mc;
}

std::vector<UbarRoot> solve_ubar(double z, double kappa, const OrderParameters& op, const ModelParams& params,
                                 double u0) {
    if (!std::isfinite(op.m) || !std::isfinite(op.q) || !std::isfinite(op.chi) || !std::isfinite(op.Chat0)) {
        throw ParameterError("solve_ubar: order parameters must be finite");
    }
    const auto mc = member_coefficients(kappa, op, params, u0);
    const double c = mc.A + mc.B * z;
    std::vector<UbarRoot> roots;
    try {
        if (!mc.gap) {
            roots.push_back({root_monotone(kappa, c, mc.K, mc.s), Stability::stable});
            return roots;
        }
        auto f = [&](double u) { return kappa * u - c - mc.K * std::erf(u / mc.s); };
        const double f_left = f(-mc.u_turn), f_right = f(mc.u_turn);
        if (f_left >= 0.0) roots.push_back({root_lower(kappa, c, mc.K, mc.s, mc.u_turn), Stability::stable});
        if (f_left > 0.0 && f_right < 0.0) {
            roots.push_back({solve_member_root(kappa, c, mc.K, mc.s, -mc.u_turn, mc.u_turn, true),
                             Stability::unstable});
        }
        if (f_right <= 0.0) roots.push_back({root_upper(kappa, c, mc.K, mc.s, mc.u_turn), Stability::stable});
    } catch (const BracketError& e) {
        throw BracketError(std::string(e.what()) + " at z=" + format17(z), e.lo, e.hi, e.f_lo, e.f_hi);
    }
    return roots;
}

double member_ubar(double z, double kappa, const OrderParameters& op, const ModelParams& params, double u0) {
    const auto mc = member_coefficients(kappa, op, params, u0);
    const double c = mc.A + mc.B * z;
    if (!mc.gap) return root_monotone(kappa, c, mc.K, mc.s);
    return c < 0.0 ? root_lower(kappa, c, mc.K, mc.s, mc.u_turn) : root_upper(kappa, c, mc.K, mc.s, mc.u_turn);
}

double pair_correlation(double ubar, double s2, double rho, const QuadratureRule& rho_rule) {
    return pair_correlation_reduced(ubar, s2, rho, rho_rule);
}

ThetaGrid ThetaGrid::build(const ModelParams& params, const ThetaGridOptions& options) {
    params.validate();
    ThetaGrid g;
    g.options = options;
    g.z_rule = standard_normal_rule(options.n_z, options.prune);
    g.x_rule = standard_normal_rule(options.n_x, options.prune);
    g.rho_rule = gauss_legendre(options.n_rho, 0.0, 1.0);
    g.log_rule = gauss_log_weight(options.n_log);
    g.branch_rule = gauss_legendre(options.n_branch, 0.0, 1.0);

    const auto& d = params.kappa_dist;
    double kappa_lo;
    if (d.is_fixed()) {
        g.kappa_nodes = {d.kappa};
        g.kappa_weights = {1.0};
        kappa_lo = d.kappa;
    } else {
        kappa_lo = params.kappa_floor();
        const double kappa_hi = d.kappa0 * (d.nu + 40.0 + 10.0 * std::sqrt(d.nu));
        const auto rule = gauss_legendre(options.n_kappa, std::log(kappa_lo), std::log(kappa_hi));
        double total = 0.0;
        for (std::size_t i = 0; i < rule.size(); ++i) {
            const double k = std::exp(rule.nodes[i]);
            const double w = rule.weights[i] * k * d.pdf(k);
            if (!(w > 0.0)) continue;
            g.kappa_nodes.push_back(k);
            g.kappa_weights.push_back(w);
            total += w;
        }
        for (auto& w : g.kappa_weights) w /= total;
    }
    if (options.n_tau > 0) {
        const double kmax = *std::max_element(g.kappa_nodes.begin(), g.kappa_nodes.end());
        const double tau_max = 20.0 / kappa_lo;
        const double tau_min = 1e-3 / kmax;
        g.tau.push_back(0.0);
        const int n = options.n_tau - 1;
        for (int i = 0; i < n; ++i) {
            g.tau.push_back(n == 1 ? tau_max : tau_min * std::pow(tau_max / tau_min, double(i) / (n - 1)));
        }
    }
    return g;
}

OrderParameters rhs_order_parameters(const OrderParameters& op, const ThetaGrid& grid, const ModelParams& params,
                                     double u0, double field_shift) {
    return evaluate(op, grid, params, u0, field_shift, !grid.tau.empty());
}

OrderParameters noninteracting_solution(const ModelParams& params, double u0, const ThetaGrid& grid) {
    OrderParameters zero;
    zero.u0 = u0;
    return evaluate(zero, grid, params, u0, 0.0, false);
}

OrderParameters solve_fixed_point(const ModelParams& params, double u0, const ThetaGrid& grid,
                                  const SolveControl& ctrl) {
    params.validate();
    if (!(ctrl.damping > 0.0 && ctrl.damping <= 1.0)) throw ParameterError("solve: damping must lie in (0, 1]");
    if (!(ctrl.tol > 0.0)) throw ParameterError("solve: tol must be positive");
    if (ctrl.max_iter < 1) throw ParameterError("solve: max_iter must be positive");

    OrderParameters op = ctrl.init ? *ctrl.init : noninteracting_solution(params, u0, grid);
    op.u0 = u0;
    if (ctrl.pin_m) op.m = *ctrl.pin_m;
    const double lambda = ctrl.damping;

    std::vector<double> last_residuals;
    int sign_flips = 0;
    double prev_delta[4] = {0, 0, 0, 0};
    double res = 0.0;
    for (int it = 1; it <= ctrl.max_iter; ++it) {
        OrderParameters r = evaluate(op, grid, params, u0, 0.0, false);
        if (ctrl.pin_m) r.m = *ctrl.pin_m;
        const double cur[4] = {op.m, op.q, op.chi, op.Chat0};
        const double nxt[4] = {r.m, r.q, r.chi, r.Chat0};
        res = 0.0;
        int flips = 0;
        for (int c = 0; c < 4; ++c) {
            if (!std::isfinite(nxt[c])) {
                throw ConvergenceError("fixed point iteration produced a non-finite order parameter", INFINITY, it);
            }
            const double delta = nxt[c] - cur[c];
            res = std::max(res, std::abs(delta) / std::max(1.0, std::abs(nxt[c])));
            if (delta * prev_delta[c] < 0.0) ++flips;
            prev_delta[c] = delta;
        }
        sign_flips = flips > 0 ? sign_flips + 1 : 0;
        if (res < ctrl.tol) {
            if (!grid.tau.empty()) {
                const auto withtau = evaluate(r, grid, params, u0, 0.0, true);
                r.tau = withtau.tau;
                r.q_tau = withtau.q_tau;
            }
            r.iterations = it;
            r.residual = res;
            r.u0 = u0;
            r.chi_negative = r.chi < 0.0;
            return r;
        }
        op.m = (1 - lambda) * op.m + lambda * r.m;
        op.q = (1 - lambda) * op.q + lambda * r.q;
        op.chi = (1 - lambda) * op.chi + lambda * r.chi;
        op.Chat0 = (1 - lambda) * op.Chat0 + lambda * r.Chat0;
        op.q = std::clamp(op.q, 0.0, 1.0);
        op.Chat0 = std::max(op.Chat0, 0.0);
        last_residuals.push_back(res);
    }
    // Persistent alternation of the update direction means the damped map
    // overshoots; a smaller step usually cures it.
    const bool oscillating = sign_flips >= 20;
    throw ConvergenceError("fixed point not converged after " + std::to_string(ctrl.max_iter) +
                               " iterations at u0=" + format17(u0) + " (residual " + format17(res) + ")" +
                               (oscillating ? "; iteration oscillates, try damping " + format17(lambda / 2) : ""),
                           res, ctrl.max_iter, oscillating ? lambda / 2 : 0.0);
}

CriticalPoint critical_J0(const ModelParams& params, const ThetaGrid& grid, const SolveControl& ctrl) {
    if (params.I0 != 0.0) throw ParameterError("critical_J0: requires I0 = 0");
    SolveControl c = ctrl;
    c.pin_m = 0.0;
    if (c.init) c.init->m = 0.0;
    CriticalPoint cp;
    cp.symmetric = solve_fixed_point(params, 0.0, grid, c);
    const double delta = 1e-5;
    const double up = evaluate(cp.symmetric, grid, params, 0.0, delta, false).m;
    const double down = evaluate(cp.symmetric, grid, params, 0.0, -delta, false).m;
    cp.slope = (up - down) / (2 * delta);
    if (!(cp.slope > 0.0)) throw NumericalError("critical_J0: non-positive field response " + format17(cp.slope));
    cp.J0c = 1.0 / cp.slope;
    return cp;
}

ModelParams with_kappa0(const ModelParams& params, double kappa0) {
    ModelParams p = params;
    if (p.kappa_dist.is_fixed()) {
        p.kappa_dist.kappa = kappa0;
    } else {
        p.kappa_dist.kappa0 = kappa0;
    }
    return p;
}

PhaseScanResult phase_scan(const ModelParams& templ, const PhaseScanOptions& o) {
    if (templ.I0 != 0.0) throw ParameterError("phase_scan: defined for I0 = 0 only");
    if (o.resolution < 1) throw ParameterError("phase_scan: resolution must be positive");
    if (!(o.hi >= o.lo)) throw ParameterError("phase_scan: empty range");
    const auto values = o.resolution == 1 ? std::vector<double>{o.lo} : linspace(o.lo, o.hi, o.resolution);
    auto params_at = [&](double v) {
        if (o.axis == ScanAxis::J0) {
            ModelParams p = templ;
            p.coupling.J0 = v;
            return p;
        }
        return with_kappa0(templ, v);
    };

    PhaseScanResult out;
    out.points.resize(values.size());
    parallel_for(values.size(), o.workers, [&](std::size_t i) {
        ScanPoint& sp = out.points[i];
        sp.axis_value = values[i];
        try {
            const ModelParams p = params_at(values[i]);
            const ThetaGrid grid = ThetaGrid::build(p, o.grid);
            SolveControl c = o.ctrl;
            OrderParameters init = noninteracting_solution(p, 0.0, grid);
            init.m = o.init_m;
            c.init = init;
            sp.op = solve_fixed_point(p, 0.0, grid, c);
        } catch (const NumericalError& e) {
            sp.error = e.what();
        }
    });

    std::vector<double> kappas;
    if (o.axis == ScanAxis::J0) {
        kappas.push_back(templ.kappa_dist.is_fixed() ? templ.kappa_dist.kappa : templ.kappa_dist.kappa0);
    } else {
        kappas = values;
    }
    out.boundary.resize(kappas.size());
    parallel_for(kappas.size(), o.workers, [&](std::size_t i) {
        BoundaryPoint& bp = out.boundary[i];
        bp.kappa0 = kappas[i];
        try {
            const ModelParams p = with_kappa0(templ, kappas[i]);
            const ThetaGrid grid = ThetaGrid::build(p, o.grid);
            bp.J0c = critical_J0(p, grid, o.ctrl).J0c;
        } catch (const NumericalError& e) {
            bp.error = e.what();
        }
    });
    return out;
}

}  // namespace igbm
