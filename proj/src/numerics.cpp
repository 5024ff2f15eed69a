#include "igbm/numerics.hpp"

#include "igbm/error.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace igbm {

namespace {

// Three-term recurrence of the orthonormal polynomials of a weight with
// total mass mu0:  b_{k+1} p_{k+1} = (x - a_k) p_k - b_k p_{k-1}.
struct Recurrence {
    std::vector<double> a;  // a_0 .. a_{n-1}
    std::vector<double> b;  // b_0 (unused) .. b_n
    double mu0;
};

struct PolyEval {
    double pn, dpn, christoffel_sum;
};

PolyEval evaluate(const Recurrence& r, int n, double x) {
    double p_prev = 0.0, p = 1.0 / std::sqrt(r.mu0);
    double d_prev = 0.0, d = 0.0;
    double sum = p * p;
    for (int k = 0; k < n; ++k) {
        const double bk = k > 0 ? r.b[k] : 0.0;
        const double p_next = ((x - r.a[k]) * p - bk * p_prev) / r.b[k + 1];
        const double d_next = (p + (x - r.a[k]) * d - bk * d_prev) / r.b[k + 1];
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
        if (k + 1 < n) sum += p * p;
    }
    return {p, d, sum};
}

QuadratureRule golub_welsch(const Recurrence& r, int n, QuadratureKind kind, bool symmetric) {
    std::vector<double> x(n);
    if (n == 1) {
        x[0] = r.a[0];
    } else {
        Eigen::VectorXd diag(n), sub(n - 1);
        for (int k = 0; k < n; ++k) diag[k] = r.a[k];
        for (int k = 1; k < n; ++k) sub[k - 1] = r.b[k];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
        solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
        for (int k = 0; k < n; ++k) x[k] = solver.eigenvalues()[k];
    }

    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) {
        // Newton polish of the eigenvalue estimate.
        for (int it = 0; it < 4 && n > 1; ++it) {
            const PolyEval e = evaluate(r, n, x[i]);
            if (!std::isfinite(e.pn) || !std::isfinite(e.dpn) || e.dpn == 0.0) break;
            const double dx = e.pn / e.dpn;
            x[i] -= dx;
            if (std::abs(dx) <= 1e-16 * std::max(1.0, std::abs(x[i]))) break;
        }
        const PolyEval e = evaluate(r, n, x[i]);
        w[i] = std::isfinite(e.christoffel_sum) ? 1.0 / e.christoffel_sum : 0.0;
    }

    if (symmetric) {
        for (int i = 0; i < n / 2; ++i) {
            const int j = n - 1 - i;
            const double xs = 0.5 * (x[j] - x[i]);
            const double ws = 0.5 * (w[i] + w[j]);
            x[i] = -xs;
            x[j] = xs;
            w[i] = w[j] = ws;
        }
        if (n % 2 == 1) x[n / 2] = 0.0;
    }

    QuadratureRule rule;
    rule.kind = kind;
    for (int i = 0; i < n; ++i) {
        if (w[i] > 0.0) {
            rule.nodes.push_back(x[i]);
            rule.weights.push_back(w[i]);
        }
    }
    return rule;
}

}  // namespace

QuadratureRule gauss_hermite(int n) {
    if (n < 1 || n > 512) {
        throw ParameterError("gauss_hermite: n must lie in [1, 512], got " + std::to_string(n));
    }
    Recurrence r;
    r.a.assign(n, 0.0);
    r.b.resize(n + 1);
    for (int k = 0; k <= n; ++k) r.b[k] = std::sqrt(0.5 * k);
    r.mu0 = std::sqrt(std::numbers::pi);
    return golub_welsch(r, n, QuadratureKind::gauss_hermite, true);
}

QuadratureRule standard_normal_rule(int n, double prune) {
    const QuadratureRule gh = gauss_hermite(n);
    QuadratureRule rule;
    rule.kind = QuadratureKind::gauss_hermite;
    const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
    for (std::size_t i = 0; i < gh.size(); ++i) {
        const double w = gh.weights[i] * inv_sqrt_pi;
        if (w < prune) continue;
        rule.nodes.push_back(std::numbers::sqrt2 * gh.nodes[i]);
        rule.weights.push_back(w);
    }
    return rule;
}

QuadratureRule gauss_laguerre(int n, double alpha) {
    if (n < 1 || n > 512) {
        throw ParameterError("gauss_laguerre: n must lie in [1, 512]");
    }
    if (!(alpha > -1.0)) throw ParameterError("gauss_laguerre: alpha must exceed -1");
    Recurrence r;
    r.a.resize(n);
    r.b.resize(n + 1);
    for (int k = 0; k < n; ++k) r.a[k] = 2.0 * k + alpha + 1.0;
    for (int k = 0; k <= n; ++k) r.b[k] = std::sqrt(k * (k + alpha));
    r.mu0 = std::exp(log_gamma(alpha + 1.0));
    return golub_welsch(r, n, QuadratureKind::gauss_laguerre, false);
}

QuadratureRule gauss_legendre(int n, double a, double b) {
    if (n < 1 || n > 512) throw ParameterError("gauss_legendre: n must lie in [1, 512]");
    if (!(b > a)) throw ParameterError("gauss_legendre: empty interval");
    Recurrence r;
    r.a.assign(n, 0.0);
    r.b.resize(n + 1);
    for (int k = 0; k <= n; ++k) r.b[k] = k / std::sqrt(4.0 * k * k - 1.0);
    r.mu0 = 2.0;
    QuadratureRule rule = golub_welsch(r, n, QuadratureKind::gauss_legendre, true);
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < rule.size(); ++i) {
        rule.nodes[i] = mid + half * rule.nodes[i];
        rule.weights[i] *= half;
    }
    return rule;
}

QuadratureRule gauss_log_weight(int n) {
    if (n < 1 || n > 64) throw ParameterError("gauss_log_weight: n must lie in [1, 64]");
    // Discretize -ln(y) dy on dyadic panels [2^-(k+1), 2^-k] (the weight is
    // smooth on each) and run the Stieltjes procedure on the discrete measure.
    const QuadratureRule base = gauss_legendre(40, 0.0, 1.0);
    std::vector<double> xs, ws;
    for (int k = 0; k < 80; ++k) {
        const double lo = std::ldexp(1.0, -(k + 1)), hi = std::ldexp(1.0, -k);
        for (std::size_t i = 0; i < base.size(); ++i) {
            const double y = lo + (hi - lo) * base.nodes[i];
            xs.push_back(y);
            ws.push_back(-std::log(y) * (hi - lo) * base.weights[i]);
        }
    }
    const std::size_t M = xs.size();
    std::vector<double> prev(M, 0.0), cur(M, 1.0), next(M);
    Recurrence r;
    r.a.resize(n);
    r.b.assign(n + 1, 0.0);
    double norm_prev = 0.0, norm = 0.0;
    for (std::size_t j = 0; j < M; ++j) norm += ws[j];
    r.mu0 = norm;
    for (int k = 0; k < n; ++k) {
        double num = 0.0;
        for (std::size_t j = 0; j < M; ++j) num += ws[j] * xs[j] * cur[j] * cur[j];
        r.a[k] = num / norm;
        const double beta = k > 0 ? norm / norm_prev : 0.0;
        double next_norm = 0.0;
        for (std::size_t j = 0; j < M; ++j) {
            next[j] = (xs[j] - r.a[k]) * cur[j] - beta * prev[j];
            next_norm += ws[j] * next[j] * next[j];
        }
        r.b[k + 1] = std::sqrt(next_norm / norm);
        prev.swap(cur);
        cur.swap(next);
        norm_prev = norm;
        norm = next_norm;
    }
    return golub_welsch(r, n, QuadratureKind::gauss_legendre, false);
}

double erf(double x) { return std::erf(x); }
double erfc(double x) { return std::erfc(x); }
double log_gamma(double x) { return boost::math::lgamma(x); }

double log_parabolic_cylinder_D_scaled(double p, double z) {
    if (!(p < 0.0)) {
        throw ParameterError("parabolic_cylinder_D: only negative orders are supported");
    }
    if (!std::isfinite(z)) throw ParameterError("parabolic_cylinder_D: non-finite argument");
    const double a = -p;

    // Large positive z: asymptotic series z^p sum_k (-1)^k (a)_{2k} / (k! (2 z^2)^k),
    // used only where the terms fall below double precision quickly.
    if (z >= 1e3 && z >= 20.0 * a * a) {
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < 30 && std::abs(term) > 1e-18; ++k) {
            term *= -(a + 2 * k - 2) * (a + 2 * k - 1) / (2.0 * k * z * z);
            sum += term;
        }
        return p * std::log(z) + std::log(sum);
    }

    // Location of the maximum of g(t) = (a-1) ln t - z t - t^2/2 on (0, inf).
    double t_pk = 0.0;
    if (a > 1.0) {
        const double disc = std::sqrt(z * z + 4.0 * (a - 1.0));
        t_pk = z > 0.0 ? 2.0 * (a - 1.0) / (z + disc) : 0.5 * (disc - z);
    } else if (a == 1.0) {
        t_pk = std::max(-z, 0.0);
    } else if (z < 0.0 && z * z >= 4.0 * (1.0 - a)) {
        t_pk = 0.5 * (-z + std::sqrt(z * z - 4.0 * (1.0 - a)));
    }
    auto g = [a, z](double t) { return (a - 1.0) * std::log(t) - z * t - 0.5 * t * t; };
    const double g_ref = t_pk > 0.0 ? g(t_pk) : 0.0;

    // Past the peak the log-integrand falls at least like -r d - d^2/2.
    const double r = z + t_pk;
    double reach = 10.0;
    if (r > 0.0) reach = std::min(reach, 50.0 / r);
    const double upper = t_pk + reach;

    auto integrand = [&](double t) {
        if (t <= 0.0) return 0.0;
        return std::exp(g(t) - g_ref);
    };

    boost::math::quadrature::tanh_sinh<double> ts(15);
    constexpr double tol = 1e-13;
    double total = 0.0, err_total = 0.0;
    auto piece = [&](double lo, double hi) {
        if (!(hi > lo)) return;
        double err = 0.0, l1 = 0.0;
        total += ts.integrate(integrand, lo, hi, tol, &err, &l1);
        err_total += err;
    };
    if (t_pk > 0.0) piece(0.0, t_pk);
    piece(t_pk, upper);

    if (!(total > 0.0) || !std::isfinite(total) || err_total > 1e-9 * total) {
        std::ostringstream os;
        os.precision(17);
        os << "parabolic_cylinder_D: quadrature did not converge (p=" << p << ", z=" << z
           << ", integral=" << total << ", error estimate=" << err_total << ")";
        throw NumericalError(os.str());
    }
    return g_ref + std::log(total) - log_gamma(a);
}

double parabolic_cylinder_D(double p, double z) {
    return std::exp(log_parabolic_cylinder_D_scaled(p, z) - 0.25 * z * z);
}

double find_root_bracketed(const std::function<double(double)>& f, double lo, double hi,
                           double tol) {
    RootOptions opts;
    opts.x_tol = tol;
    return find_root_bracketed(f, lo, hi, opts);
}

double find_root_bracketed(const std::function<double(double)>& f, double lo, double hi,
                           const RootOptions& opts) {
    if (!(opts.x_tol > 0.0)) throw ParameterError("find_root_bracketed: tol must be positive");
    if (hi < lo) std::swap(lo, hi);
    double f_lo = f(lo), f_hi = f(hi);
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    if (!(std::signbit(f_lo) != std::signbit(f_hi))) {
        std::ostringstream os;
        os.precision(17);
        os << "find_root_bracketed: no sign change on [" << lo << ", " << hi << "] (f=" << f_lo
           << ", " << f_hi << ")";
        throw BracketError(os.str(), lo, hi, f_lo, f_hi);
    }
    bool secant_turn = true;
    for (int it = 0; it < opts.max_iter; ++it) {
        if (hi - lo < opts.x_tol) break;
        double x = 0.5 * (lo + hi);
        if (secant_turn) {
            const double xs = lo - f_lo * (hi - lo) / (f_hi - f_lo);
            // Keep the secant point off the endpoints.
            const double margin = 0.01 * (hi - lo);
            if (std::isfinite(xs) && xs > lo + margin && xs < hi - margin) x = xs;
        }
        secant_turn = !secant_turn;
        if (x <= lo || x >= hi) break;  // bracket exhausted at machine resolution
        const double fx = f(x);
        if (fx == 0.0) return x;
        if (opts.f_tol > 0.0 && std::abs(fx) < opts.f_tol && hi - lo < 1e3 * opts.x_tol) return x;
        if (std::signbit(fx) == std::signbit(f_lo)) {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
    }
    return std::abs(f_hi) < std::abs(f_lo) ? hi : lo;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, double* error_estimate) {
    double err = 0.0;
    const double value =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, rel_tol, &err);
    if (error_estimate) *error_estimate = err;
    return value;
}

double integrate_global(const std::function<double(double)>& f, std::span<const double> breaks, double rel_tol,
                        double abs_tol, int max_panels) {
    if (breaks.size() < 2) throw ParameterError("integrate_global: need at least two breakpoints");
    struct Panel {
        double a, b, value, error;
        bool operator<(const Panel& o) const { return error < o.error; }
    };
    auto eval = [&](double a, double b) {
        double err = 0.0;
        const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &err);
        return Panel{a, b, v, err};
    };
    std::vector<Panel> heap;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (!(breaks[i + 1] > breaks[i])) {
            if (breaks[i + 1] == breaks[i]) continue;
            throw ParameterError("integrate_global: breakpoints must be increasing");
        }
        heap.push_back(eval(breaks[i], breaks[i + 1]));
    }
    std::make_heap(heap.begin(), heap.end());
    auto totals = [&] {
        double v = 0.0, e = 0.0;
        for (const auto& p : heap) {
            v += p.value;
            e += p.error;
        }
        return std::pair{v, e};
    };
    auto [value, error] = totals();
    while (error > std::max(abs_tol, rel_tol * std::abs(value)) && static_cast<int>(heap.size()) < max_panels) {
        std::pop_heap(heap.begin(), heap.end());
        const Panel worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            heap.push_back(worst);
            std::push_heap(heap.begin(), heap.end());
            break;
        }
        const Panel left = eval(worst.a, mid), right = eval(mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end());
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end());
    }
    // Re-sum to shed the drift of the running updates.
    return totals().first;
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ParameterError("trapezoid: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    return acc;
}

}  // namespace igbm
