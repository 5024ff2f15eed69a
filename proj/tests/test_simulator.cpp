#include "doctest.h"

#include "igbm/couplings.hpp"
#include "igbm/error.hpp"
#include "igbm/numerics.hpp"
#include "igbm/params.hpp"
#include "igbm/simulator.hpp"

#include <cmath>
#include <numeric>
#include <vector>

using namespace igbm;

namespace {

ModelParams quiet_params() {
    ModelParams p;
    p.coupling.J0 = 0;
    p.coupling.J = 0;
    p.sigma = 0;
    p.sigma0 = 0;
    p.I0 = 0;
    p.sigma_I2 = 0;
    return p;
}

StepNoise noise_for(std::uint64_t seed) {
    return {RngStream(seed, 1).engine(), RngStream(seed, 2).engine()};
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("derive_drift") {
    CHECK(derive_drift(0, 0) == 0.0);
    CHECK(derive_drift(0.05, 0.2) == doctest::Approx(0.03).epsilon(1e-14));
    CHECK(derive_drift(0.045, 0.3) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
}

TEST_CASE("step examples") {
    auto p = quiet_params();
    auto noise = noise_for(1);

    const auto empty1 = CouplingMatrix::from_triplets(1, {}, true);
    PerAsset pa1{{0.0}, {1.0}};
    const auto s1 = step(MarketState{{1.0}, 0.0, 0.0}, empty1, p, pa1, 0.01, noise);
    CHECK(s1.u[0] == doctest::Approx(0.99).epsilon(1e-15));
    CHECK(s1.t == doctest::Approx(0.01));

    p.gamma = 0.1;
    const auto s2 = step(MarketState{{0.0}, 1.0, 0.0}, empty1, p, pa1, 0.01, noise);
    // Diffusion of the slow factor is sqrt(2 gamma dt) regardless of sigma0,
    // so check the deterministic part by differencing against the noise draw.
    auto replay = noise_for(1);
    (void)replay.slow.normal();  // draw consumed by the first step
    const double xi = replay.slow.normal();
    CHECK(s2.u0 == doctest::Approx(0.999 + std::sqrt(2 * 0.1 * 0.01) * xi).epsilon(1e-14));

    const auto pair = CouplingMatrix::from_triplets(2, {{0, 1, 1.0}, {1, 0, 1.0}}, true);
    PerAsset pa2{{0.0, 0.0}, {0.0, 0.0}};
    const auto s3 = step(MarketState{{0.5, -0.5}, 0.0, 0.0}, pair, quiet_params(), pa2, 0.01, noise);
    const double e = std::erf(0.5);
    CHECK(s3.u[0] == doctest::Approx(0.5 - 0.01 * e).epsilon(1e-15));
    CHECK(s3.u[1] == doctest::Approx(-0.5 + 0.01 * e).epsilon(1e-15));
    CHECK(s3.u[0] == doctest::Approx(0.494795).epsilon(1e-6));
}

TEST_CASE("step guards") {
    auto p = quiet_params();
    auto noise = noise_for(2);
    const auto m = CouplingMatrix::from_triplets(1, {}, true);
    CHECK_THROWS_AS(step(MarketState{{0.0}, 0, 0}, m, p, PerAsset{{0.0}, {20.0}}, 0.01, noise), ParameterError);
    CHECK_THROWS_AS(step(MarketState{{0.0, 0.0}, 0, 0}, m, p, PerAsset{{0.0}, {1.0}}, 0.01, noise),
                    ParameterError);
    // Two huge couplings on row 1 overflow the field of asset 1 only.
    const auto big = CouplingMatrix::from_triplets(3, {{1, 0, 1.7e308}, {1, 2, 1.7e308}}, true);
    try {
        step(MarketState{{1.0, 1.0, 1.0}, 0, 0}, big, p, PerAsset{{0, 0, 0}, {0.1, 0.1, 0.1}}, 0.5, noise);
        CHECK(false);
    } catch (const NumericalError& err) {
        CHECK(std::string(err.what()).find("asset 1") != std::string::npos);
    }
}

TEST_CASE("noise-free uncoupled run decays to zero") {
    auto p = quiet_params();
    p.coupling.N = 20;
    p.kappa_dist = KappaDistribution::exponential(0.2);
    p.kappa_floor_factor = 0.05;  // kappa_min = 0.01 keeps the decay time short
    const auto m = build_coupling_matrix(p.coupling, RngStream(3));
    Schedule s;
    s.dt = 0.05;
    s.t_warmup = 0;
    s.t_max = 20.0 / p.kappa_floor();
    s.record_stride = 100;
    s.initial_u = std::vector<double>(20, 1.0);
    const auto tr = run(p, m, s, RngStream(3));
    CHECK(std::abs(tr.index_series.back()) < 1e-6);
}

TEST_CASE("slow factor has unit stationary variance") {
    auto p = quiet_params();
    p.coupling.N = 2;
    p.gamma = 0.01;
    p.kappa_dist = KappaDistribution::fixed_at(1.0);
    const auto m = build_coupling_matrix(p.coupling, RngStream(4));
    Schedule s;
    s.dt = 0.05;
    s.t_warmup = 0;
    s.t_max = 1e4 / p.gamma;
    s.record_stride = 20;
    const auto tr = run(p, m, s, RngStream(4));
    double mu = 0;
    for (double v : tr.u0_series) mu += v;
    mu /= tr.size();
    double var = 0;
    for (double v : tr.u0_series) var += (v - mu) * (v - mu);
    var /= tr.size() - 1;
    CHECK(var > 0.9);
    CHECK(var < 1.1);
}

TEST_CASE("trajectory invariants and determinism") {
    ModelParams p;
    p.coupling.N = 30;
    p.coupling.hebbian_p = 2;
    const auto m = build_coupling_matrix(p.coupling, RngStream(5));
    Schedule s;
    s.dt = 0.05;
    s.t_warmup = 10;
    s.t_max = 200;
    s.record_stride = 7;
    s.snapshot_every = 50;
    const auto a = run(p, m, s, RngStream(5));
    const auto b = run(p, m, s, RngStream(5));
    REQUIRE(a.size() > 10);
    CHECK(a.index_series == b.index_series);
    CHECK(a.u0_series == b.u0_series);
    CHECK(a.overlap_series == b.overlap_series);
    CHECK(a.u0_series.size() == a.size());
    CHECK(a.overlap_series.size() == a.size());
    const double stride = a.times[1] - a.times[0];
    CHECK(stride == doctest::Approx(7 * 0.05));
    for (std::size_t k = 1; k < a.size(); ++k) {
        REQUIRE(a.times[k] > a.times[k - 1]);
        REQUIRE(a.times[k] - a.times[k - 1] == doctest::Approx(stride).epsilon(1e-12));
    }
    CHECK(!a.snapshots.empty());

    // Snapshots do not perturb the path.
    auto s2 = s;
    s2.snapshot_every = 0;
    CHECK(run(p, m, s2, RngStream(5)).index_series == a.index_series);

    auto bad = s;
    bad.t_warmup = 300;
    CHECK_THROWS_AS(run(p, m, bad, RngStream(5)), ParameterError);
}

TEST_CASE("overlap examples") {
    PatternSet ps;
    ps.N = 4;
    ps.p = 1;
    ps.xi = {1, 1, -1, -1};
    CHECK(overlaps(std::vector<double>{1, 1, 1, 1}, ps)[0] == 0.0);
    CHECK(overlaps(std::vector<double>{0, 0, 0, 0}, ps)[0] == 0.0);
    const auto big = generate_patterns(100, 2, RngStream(6));
    std::vector<double> u(100);
    for (int i = 0; i < 100; ++i) u[i] = 50.0 * big(0, i);
    const auto m = overlaps(u, big);
    CHECK(std::abs(m[0] - 1.0) < 1e-12);
    CHECK(std::abs(m[1]) <= 1.0);
    CHECK_THROWS_AS(overlaps(std::vector<double>{0, 0}, ps), ParameterError);
}

TEST_CASE("index returns") {
    Trajectory t;
    t.dt = 0.1;
    t.record_stride = 5;
    const double a = 0.3;
    for (int k = 0; k < 50; ++k) {
        t.times.push_back(k * 0.5);
        t.index_series.push_back(a * k * 0.5);
    }
    for (double r : index_returns(t, 3)) CHECK(r == doctest::Approx(a * 3 * 5 * 0.1));
    Trajectory c = t;
    std::fill(c.index_series.begin(), c.index_series.end(), 2.0);
    for (double r : index_returns(c, 1)) CHECK(r == 0.0);

    Rng rng = RngStream(7).engine();
    for (auto& v : t.index_series) v = rng.normal();
    const auto r1 = index_returns(t, 1);
    std::vector<double> diff(t.index_series.size());
    std::adjacent_difference(t.index_series.begin(), t.index_series.end(), diff.begin());
    for (std::size_t k = 0; k < r1.size(); ++k) CHECK(r1[k] == diff[k + 1]);
    CHECK_THROWS_AS(index_returns(t, 50), ParameterError);
}

TEST_CASE("empirical density") {
    std::vector<double> same(2000, 1.5);
    const auto one = empirical_return_density(same, 10);
    int occupied = 0;
    for (std::size_t b = 0; b < one.size(); ++b) {
        if (one.density[b] > 0) {
            ++occupied;
            CHECK(one.density[b] == doctest::Approx(1.0 / (one.bin_edges[b + 1] - one.bin_edges[b])));
        }
    }
    CHECK(occupied == 1);
    CHECK(std::abs(one.integral() - 1.0) < 1e-9);

    Rng rng = RngStream(8).engine();
    std::vector<double> x(1000000);
    for (auto& v : x) v = rng.normal();
    const auto h = empirical_return_density(x, 400);
    CHECK(std::abs(h.integral() - 1.0) < 1e-9);
    std::sort(x.begin(), x.end());
    double ks = 0;
    for (std::size_t i = 0; i < x.size(); i += 97) {
        const double F = normal_cdf(x[i]);
        ks = std::max({ks, std::abs(F - double(i) / x.size()), std::abs(F - double(i + 1) / x.size())});
    }
    CHECK(ks < 0.005);

    // Mixture of Normal(0, s^2/k) over k ~ Exp(k0): tail slope -3.
    const double k0 = 0.2, s = 0.1;
    std::vector<double> mix(2000000);
    for (auto& v : mix) {
        const double k = rng.gamma(1.0, k0);
        v = s / std::sqrt(k) * rng.normal();
    }
    std::vector<double> absmix(mix.size());
    for (std::size_t i = 0; i < mix.size(); ++i) absmix[i] = std::abs(mix[i]);
    // Log-spaced bins on the tail, counting |x| to double the sample.
    const double scale = s / std::sqrt(k0);
    const double lo = 5 * scale, hi = 60 * scale;
    const int nb = 20;
    DensityCurve tail;
    for (int b = 0; b < nb; ++b) {
        const double e0 = lo * std::pow(hi / lo, double(b) / nb), e1 = lo * std::pow(hi / lo, double(b + 1) / nb);
        double cnt = 0;
        for (double v : absmix) cnt += (v >= e0 && v < e1);
        tail.grid.push_back(std::sqrt(e0 * e1));
        tail.density.push_back(cnt / (2.0 * mix.size() * (e1 - e0)));
    }
    CHECK(std::abs(log_log_slope(tail, lo, hi) + 3.0) < 0.3);

    CHECK_THROWS_AS(empirical_return_density(std::vector<double>(999, 0.0), 10), StatisticsError);
}

TEST_CASE("deterministic run converges at first order in dt") {
    ModelParams p;
    p.coupling.N = 10;
    p.sigma = 0;
    p.kappa_dist = KappaDistribution::exponential(0.5);
    p.kappa_floor_factor = 0.1;
    const auto m = build_coupling_matrix(p.coupling, RngStream(9));
    auto terminal = [&](double dt) {
        Schedule s;
        s.dt = dt;
        s.t_warmup = 0;
        s.t_max = 10;
        s.record_stride = 1;
        s.clamp_u0 = 0.5;
        s.initial_u = std::vector<double>(10, 0.3);
        return run(p, m, s, RngStream(9)).index_series.back();
    };
    const double ref = terminal(0.0005);
    const double e1 = std::abs(terminal(0.02) - ref);
    const double e2 = std::abs(terminal(0.01) - ref);
    const double e3 = std::abs(terminal(0.005) - ref);
    CHECK(std::log2(e1 / e2) >= 0.9);
    CHECK(std::log2(e2 / e3) >= 0.9);
}

TEST_CASE("uncoupled assets have OU stationary variance") {
    ModelParams p;
    p.coupling.N = 8;
    p.coupling.J0 = 0;
    p.coupling.J = 0;
    p.sigma0 = 0;
    p.sigma = 0.1;
    p.kappa_dist = KappaDistribution::exponential(0.5);
    p.kappa_floor_factor = 0.4;  // keeps relaxation times short
    const auto m = build_coupling_matrix(p.coupling, RngStream(10));
    const RngStream root(10);
    const auto pa = draw_per_asset(p, 8, root);
    Schedule s;
    s.dt = 0.02;
    s.t_warmup = 50;
    s.t_max = 1.5e5;
    s.record_stride = 25;
    s.snapshot_every = 1;
    const auto tr = run(p, m, s, root);
    for (int i = 0; i < 8; ++i) {
        double mu = 0, var = 0;
        for (const auto& sn : tr.snapshots) mu += sn.u[i];
        mu /= tr.snapshots.size();
        for (const auto& sn : tr.snapshots) var += (sn.u[i] - mu) * (sn.u[i] - mu);
        var /= tr.snapshots.size() - 1;
        CHECK(var == doctest::Approx(p.sigma * p.sigma / (2 * pa.kappa[i])).epsilon(0.05));
    }
}

TEST_CASE("hebbian retrieval state is metastable") {
    ModelParams p;
    p.coupling.N = 100;
    p.coupling.J0 = 0;
    p.coupling.J = 0;
    p.coupling.hebbian_p = 1;
    p.sigma = 0.05;
    p.sigma0 = 0;
    p.I0 = 0;
    p.sigma_I2 = 0;
    p.kappa_dist = KappaDistribution::exponential(0.2);
    const auto m = build_coupling_matrix(p.coupling, RngStream(11));
    std::vector<double> u0(100);
    for (int i = 0; i < 100; ++i) u0[i] = 5.0 * (*m.patterns())(0, i);
    Schedule s;
    s.dt = 0.01;
    s.t_warmup = 0;
    s.t_max = 500;
    s.record_stride = 50;
    s.initial_u = u0;
    const auto tr = run(p, m, s, RngStream(11));
    double worst = 1;
    for (const auto& o : tr.overlap_series) worst = std::min(worst, o[0]);
    CHECK(worst > 0.9);
}

TEST_CASE("summary statistics") {
    std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8};
    CHECK(autocorrelation(x, 0).value() == doctest::Approx(1.0));
    CHECK(!excess_kurtosis(std::vector<double>(10, 3.0)).has_value());
    Rng rng = RngStream(12).engine();
    std::vector<double> g(200000);
    for (auto& v : g) v = rng.normal();
    CHECK(std::abs(*excess_kurtosis(g)) < 0.05);
    CHECK(pearson(x, x).value() == doctest::Approx(1.0));
}
