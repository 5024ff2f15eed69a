#include "doctest.h"

#include "igbm/error.hpp"
#include "igbm/numerics.hpp"
#include "igbm/rng.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace igbm;

namespace {

// Maclaurin series of erf in long double; converges for moderate |x|.
long double erf_series(long double x) {
    long double term = x, sum = x;
    for (int n = 1; n < 400; ++n) {
        term *= -x * x / n;
        const long double add = term / (2 * n + 1);
        sum += add;
        if (std::fabs(add) < 1e-30L) break;
    }
    return sum * 2.0L / std::sqrt(std::numbers::pi_v<long double>);
}

// Composite Simpson for int_0^inf t^(a-1) exp(-z t - t^2/2) dt, a >= 1, after
// t = u^2 so the integrand 2 u^(2a-1) exp(-z u^2 - u^4/2) is smooth at 0.
double pcf_integral_simpson(double a, double z, double L, int n) {
    const double h = L / n;
    auto f = [&](double u) {
        if (u == 0.0) return 0.0;
        return 2.0 * std::exp((2.0 * a - 1.0) * std::log(u) - z * u * u - 0.5 * u * u * u * u);
    };
    double s = f(0.0) + f(L);
    for (int i = 1; i < n; ++i) s += f(i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace

TEST_CASE("gauss_hermite small rules") {
    const auto r1 = gauss_hermite(1);
    REQUIRE(r1.size() == 1);
    CHECK(r1.nodes[0] == 0.0);
    CHECK(r1.weights[0] == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-15));

    // Moment equations for exactness through degree 3 give +-1/sqrt(2), sqrt(pi)/2.
    const auto r2 = gauss_hermite(2);
    REQUIRE(r2.size() == 2);
    CHECK(std::abs(r2.nodes[0] + 1.0 / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(r2.nodes[1] - 1.0 / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(r2.weights[0] - std::sqrt(std::numbers::pi) / 2) < 1e-15);
    CHECK(std::abs(r2.weights[1] - std::sqrt(std::numbers::pi) / 2) < 1e-15);
}

TEST_CASE("gauss_hermite n=32 tenth moment") {
    const auto r = gauss_hermite(32);
    const double got = r.integrate([](double x) { return std::pow(x, 10); });
    // int x^10 e^{-x^2} dx = Gamma(11/2) = 945 sqrt(pi) / 32
    const double exact = 945.0 * std::sqrt(std::numbers::pi) / 32.0;
    CHECK(std::abs(got - exact) < 1e-10);
    CHECK(std::abs(std::tgamma(5.5) - exact) < 1e-12);
}

TEST_CASE("gauss_hermite exactness through degree 2n-1") {
    for (int n : {1, 2, 3, 4, 7, 12, 20, 33, 48}) {
        const auto r = gauss_hermite(n);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            const double got = r.integrate([k](double x) { return std::pow(x, k); });
            if (k % 2 == 1) {
                // Odd moments vanish; compare against the scale of |x|^k.
                const double scale = std::tgamma((k + 1) / 2.0 + 0.5);
                CHECK(std::abs(got) < 1e-12 * scale);
            } else {
                const double exact = std::tgamma((k + 1) / 2.0);
                CHECK(std::abs(got - exact) < 1e-12 * exact);
            }
        }
    }
}

TEST_CASE("gauss_hermite invariants and range") {
    for (int n : {5, 64, 128, 200, 360, 512}) {
        const auto r = gauss_hermite(n);
        double sum = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            CHECK(r.weights[i] > 0.0);
            if (i > 0) CHECK(r.nodes[i] > r.nodes[i - 1]);
            sum += r.weights[i];
        }
        CHECK(std::abs(sum - std::sqrt(std::numbers::pi)) < 1e-12);
    }
    CHECK_THROWS_AS(gauss_hermite(0), ParameterError);
    CHECK_THROWS_AS(gauss_hermite(513), ParameterError);
}

TEST_CASE("gaussian averages of erf converge between 64 and 128 nodes") {
    const auto r64 = standard_normal_rule(64), r128 = standard_normal_rule(128);
    for (double a : {-2.0, -0.3, 0.0, 0.7, 3.0}) {
        for (double b : {0.05, 0.3, 0.7, 1.0}) {
            auto f = [&](double z) { return igbm::erf(a + b * z); };
            const double v64 = r64.integrate(f), v128 = r128.integrate(f);
            CHECK(std::abs(v64 - v128) < 1e-10);
            // <igbm::erf(a + b z)> = igbm::erf(a / sqrt(1 + 2 b^2))
            CHECK(std::abs(v128 - std::erf(a / std::sqrt(1 + 2 * b * b))) < 1e-10);
        }
    }
}

TEST_CASE("gauss_laguerre and gauss_legendre") {
    for (double alpha : {0.0, -0.5, 1.0, 2.5}) {
        const auto r = gauss_laguerre(24, alpha);
        for (int k = 0; k <= 20; ++k) {
            const double got = r.integrate([k](double x) { return std::pow(x, k); });
            const double exact = std::tgamma(k + alpha + 1.0);
            CHECK(std::abs(got - exact) < 1e-11 * exact);
        }
    }
    const auto gl = gauss_legendre(10, 0.0, 2.0);
    CHECK(std::abs(gl.integrate([](double x) { return std::pow(x, 19); }) - std::pow(2.0, 20) / 20) <
          1e-9);
}

TEST_CASE("erf values and symmetry") {
    CHECK(igbm::erf(0.0) == 0.0);
    CHECK(std::abs(igbm::erf(10.0) - 1.0) < 1e-15);
    CHECK(std::abs(igbm::erf(1.0) - 0.8427007929497149) < 1e-15);
    for (double x = -4.0; x <= 4.0; x += 0.125) {
        CHECK(std::abs(igbm::erf(x) - static_cast<double>(erf_series(x))) < 1e-12);
    }
    Rng rng(7);
    double prev_x = -1e9, prev = -1.0;
    std::vector<double> xs;
    for (int i = 0; i < 10000; ++i) xs.push_back(rng.normal(0.0, 3.0));
    for (double x : xs) CHECK_MESSAGE(igbm::erf(-x) == -igbm::erf(x), x);
    std::sort(xs.begin(), xs.end());
    for (double x : xs) {
        if (x > prev_x) CHECK(igbm::erf(x) >= prev);
        prev_x = x;
        prev = igbm::erf(x);
    }
}

TEST_CASE("parabolic cylinder examples") {
    CHECK(parabolic_cylinder_D(-1.0, 0.0) == doctest::Approx(std::sqrt(std::numbers::pi / 2)).epsilon(1e-12));
    CHECK(parabolic_cylinder_D(-2.0, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    const double d11 = std::exp(0.25) * std::sqrt(std::numbers::pi / 2) * std::erfc(1.0 / std::sqrt(2.0));
    CHECK(parabolic_cylinder_D(-1.0, 1.0) == doctest::Approx(d11).epsilon(1e-10));
    CHECK(d11 == doctest::Approx(0.510644).epsilon(1e-5));
    CHECK_THROWS_AS(parabolic_cylinder_D(0.0, 1.0), ParameterError);
    CHECK_THROWS_AS(parabolic_cylinder_D(0.5, 1.0), ParameterError);
}

TEST_CASE("parabolic cylinder closed forms on a grid") {
    // D_{-1}(z) = e^{z^2/4} sqrt(pi/2) erfc(z/sqrt 2),  D_{-2}(z) = e^{-z^2/4} - z D_{-1}(z)
    for (double z = -5.0; z <= 5.0; z += 0.25) {
        const double d1 = std::exp(z * z / 4) * std::sqrt(std::numbers::pi / 2) *
                          std::erfc(z / std::sqrt(2.0));
        const double d2 = std::exp(-z * z / 4) - z * d1;
        CHECK(std::abs(parabolic_cylinder_D(-1.0, z) - d1) < 1e-8 * std::abs(d1));
        CHECK(std::abs(parabolic_cylinder_D(-2.0, z) - d2) < 1e-8 * std::abs(d2));
    }
}

TEST_CASE("parabolic cylinder against direct Simpson quadrature") {
    for (double a : {1.5, 2.0, 3.0}) {
        for (double z : {-3.0, -0.5, 0.0, 2.0, 6.0}) {
            const double ref = std::exp(-z * z / 4) / std::tgamma(a) *
                               pcf_integral_simpson(a, z, 8.0, 200000);
            CHECK(std::abs(parabolic_cylinder_D(-a, z) - ref) < 1e-8 * ref);
        }
    }
    // Large arguments stay finite on the scaled route: e^{z^2/4} D_{-a}(z) ~ z^{-a}.
    const double big = 1e8;
    CHECK(std::abs(log_parabolic_cylinder_D_scaled(-2.0, big) + 2.0 * std::log(big)) < 1e-6);
    CHECK(std::isfinite(parabolic_cylinder_D(-1.5, -30.0)));
    CHECK(parabolic_cylinder_D(-0.5, 30.0) > 0.0);
    // The series and quadrature routes agree across the switch at z = 1000.
    for (double a : {0.5, 1.0, 1.5, 2.0, 3.0}) {
        const double below = log_parabolic_cylinder_D_scaled(-a, 999.999);
        const double above = log_parabolic_cylinder_D_scaled(-a, 1000.001);
        const double slope = -a / 1000.0;  // d/dz of -a ln z
        CHECK(std::abs(above - below - 0.002 * slope) < 1e-10);
        CHECK(std::isfinite(log_parabolic_cylinder_D_scaled(-a, 1e12)));
    }
}

TEST_CASE("parabolic cylinder recurrence for non-integer order") {
    // D_{p+1} - z D_p + p D_{p-1} = 0
    for (double p : {-1.3, -2.7}) {
        for (double z : {-2.0, 0.0, 1.5, 4.0}) {
            const double lhs = parabolic_cylinder_D(p + 1, z) - z * parabolic_cylinder_D(p, z) +
                               p * parabolic_cylinder_D(p - 1, z);
            CHECK(std::abs(lhs) < 1e-9 * std::abs(parabolic_cylinder_D(p, z)) + 1e-14);
        }
    }
}

TEST_CASE("find_root_bracketed examples") {
    CHECK(find_root_bracketed([](double x) { return x - 2.0; }, 0.0, 5.0, 1e-12) ==
          doctest::Approx(2.0).epsilon(1e-12));
    const double r = find_root_bracketed([](double x) { return igbm::erf(x) - 0.5; }, 0.0, 1.0, 1e-14);
    CHECK(std::abs(r - 0.4769362762044699) < 1e-13);
    const double c = find_root_bracketed([](double x) { return x * x * x; }, -1.0, 2.0, 1e-10);
    CHECK(std::abs(c) < 1e-10);
    CHECK_THROWS_AS(find_root_bracketed([](double x) { return x * x + 1; }, -1.0, 1.0, 1e-10),
                    BracketError);
    // Deterministic: repeated calls agree bit for bit.
    auto f = [](double x) { return std::cos(x) - x; };
    CHECK(find_root_bracketed(f, 0.0, 1.0, 1e-13) == find_root_bracketed(f, 0.0, 1.0, 1e-13));
}

TEST_CASE("gauss_log_weight moments") {
    for (int n : {1, 4, 16, 24}) {
        const auto r = gauss_log_weight(n);
        REQUIRE(r.size() == static_cast<std::size_t>(n));
        for (int k = 0; k <= 2 * n - 1; ++k) {
            // int_0^1 y^k (-ln y) dy = 1 / (k+1)^2
            const double got = r.integrate([k](double y) { return std::pow(y, k); });
            CHECK(std::abs(got * (k + 1) * (k + 1) - 1.0) < 1e-12);
        }
        for (std::size_t i = 0; i < r.size(); ++i) {
            CHECK(r.nodes[i] > 0.0);
            CHECK(r.nodes[i] < 1.0);
            CHECK(r.weights[i] > 0.0);
        }
    }
}
