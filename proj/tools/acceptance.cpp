#include "acceptance.hpp"

#include "commands.hpp"

#include "igbm/couplings.hpp"
#include "igbm/error.hpp"
#include "igbm/io.hpp"
#include "igbm/meanfield.hpp"
#include "igbm/numerics.hpp"
#include "igbm/parallel.hpp"
#include "igbm/pricing.hpp"
#include "igbm/returns.hpp"
#include "igbm/simulator.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

namespace igbm::app {

namespace {

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}
std::string g4(double x) { return fmt("%.4g", x); }

ModelParams reference_params(double kappa0 = 0.2, double nu = 1.0) {
    ModelParams p;
    p.coupling.J0 = 0.5;
    p.coupling.J = 0.5;
    p.coupling.alpha = 0.5;
    p.I0 = 0.0;
    p.sigma_I2 = 0.1;
    p.sigma = 0.1;
    p.kappa_dist = KappaDistribution::gamma(kappa0, nu);
    return p;
}

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g;
    for (int i = 0; i < n; ++i) g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    return g;
}

using Check = CriterionResult (*)(const AcceptanceOptions&);

CriterionResult c1_tail(const AcceptanceOptions&) {
    CriterionResult r{1, "quasi-stationary tail exponent"};
    std::string m;
    bool ok = true;
    for (double nu : {1.0, 2.0}) {
        const auto p = reference_params(0.2, nu);
        const double s = p.sigma / std::sqrt(0.2);
        const double slope = log_log_slope(qs_return_pdf_asymptotic(log_grid(10 * s, 100 * s, 201), p), 10 * s, 100 * s);
        ok = ok && std::abs(slope + (1 + 2 * nu)) < 0.05;
        m += (m.empty() ? "" : ", ") + std::string("nu=") + g4(nu) + ": " + fmt("%.4f", slope);
    }
    r.passed = ok;
    r.measured = m;
    r.threshold = "-3.00 and -5.00 +- 0.05 on 10..100 sigma/sqrt(kappa0)";
    return r;
}

CriterionResult c2_tail_compare(const AcceptanceOptions&) {
    CriterionResult r{2, "short vs asymptotic returns at kappa0 tau = 20"};
    const auto p = reference_params();
    const double L = 5 * p.sigma / std::sqrt(0.2);
    const auto grid = linspace(-L, L, 401);
    const auto n = qs_return_pdf(grid, 20 / 0.2, p);
    const auto a = qs_return_pdf_asymptotic(grid, p);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) worst = std::max(worst, std::abs(n.density[i] / a.density[i] - 1));
    r.passed = worst < 0.10;
    r.measured = "max relative gap " + g4(worst);
    r.threshold = "< 0.10 on |du| <= 5 sigma/sqrt(kappa0)";
    return r;
}

CriterionResult c3_variance(const AcceptanceOptions&) {
    CriterionResult r{3, "variance laws"};
    double worst = 0.0;
    for (double nu : {1.0, 2.0}) {
        const auto p = reference_params(0.2, nu);
        for (double k0t : {0.01, 1.0, 20.0}) {
            const double tau = k0t / 0.2;
            const double m2 = 2 * integrate_adaptive([&](double x) { return x * x * qs_return_density(x, tau, p); }, 0,
                                                     INFINITY, 1e-10);
            worst = std::max(worst, std::abs(m2 / qs_return_variance(tau, p) - 1));
        }
    }
    const auto p = reference_params();
    const double tau = 1e-3 / 0.2;
    const double m2 = 2 * integrate_adaptive([&](double x) { return x * x * qs_return_density(x, tau, p); }, 0,
                                             INFINITY, 1e-10);
    const double short_dev = std::abs(m2 / (p.sigma * p.sigma * tau) - 1);
    r.passed = worst < 5e-3 && short_dev < 0.01;
    r.measured = "max relative deviation " + g4(worst) + ", short-time " + g4(short_dev);
    r.threshold = "< 0.005 and < 0.01";
    return r;
}

CriterionResult c4_pricing(const AcceptanceOptions&) {
    CriterionResult r{4, "pricing closed form vs kappa quadrature"};
    double worst = 0.0, worst_slope = 0.0;
    std::string slopes;
    for (double nu : {0.5, 1.0, 2.0}) {
        auto p = reference_params(0.2, nu);
        p.sigma0 = 1.0;
        const double sI = std::sqrt(p.sigma_I2);
        const auto grid = linspace(-50 * sI / 0.2, 50 * sI / 0.2, 801);
        for (double u0 : {0.0, 0.1}) {
            const auto c = noninteracting_pricing_pdf_closed(grid, p, u0);
            const auto q = noninteracting_pricing_pdf_quadrature(grid, p, u0);
            for (std::size_t i = 0; i < grid.size(); ++i) worst = std::max(worst, std::abs(c.density[i] - q.density[i]));
        }
        const double lo = 20 * sI / 0.2, hi = 200 * sI / 0.2;
        const double slope = log_log_slope(noninteracting_pricing_pdf_closed(log_grid(lo, hi, 201), p, 0.0), lo, hi);
        worst_slope = std::max(worst_slope, std::abs(slope + 1 + nu));
        slopes += (slopes.empty() ? "" : ", ") + fmt("%.4f", slope);
    }
    r.passed = worst < 1e-6 && worst_slope < 0.1;
    r.measured = "max abs diff " + g4(worst) + "; tail slopes " + slopes;
    r.threshold = "< 1e-6; -(1+nu) +- 0.1 for nu = 0.5, 1, 2";
    return r;
}

CriterionResult c5_broadening(const AcceptanceOptions& o) {
    CriterionResult r{5, "interaction broadening of prices"};
    const auto p = reference_params();
    const auto op = solve_fixed_point(p, 1.0, ThetaGrid::build(p));
    ModelParams free = p;
    free.coupling.J0 = free.coupling.J = free.coupling.alpha = 0.0;
    const auto op0 = solve_fixed_point(free, 1.0, ThetaGrid::build(free));
    const auto grid = linspace(-40, 40, 4001);
    const auto inter = interacting_pricing_pdf(grid, op, p, 1.0, 0.2);
    const auto bare = interacting_pricing_pdf(grid, op0, free, 1.0, 0.2);
    const auto mgrid = linspace(-80, 80, 641);
    const auto mi = market_pricing_pdf(mgrid, p, 1.0, op, o.workers);
    const auto mn = market_pricing_pdf(mgrid, p, 1.0, std::nullopt, o.workers);
    const double vi = inter.curve.variance(), vb = bare.curve.variance();
    const double si = inter.curve.skewness(), sb = bare.curve.skewness();
    const double mvi = mi.variance(), mvn = mn.variance();
    r.passed = vi > vb && std::abs(si) > std::abs(sb) && mvi > mvn;
    r.measured = "kappa=0.2: var " + g4(vi) + " vs " + g4(vb) + ", |skew| " + g4(std::abs(si)) + " vs " +
                 g4(std::abs(sb)) + "; market var on [-80,80] " + g4(mvi) + " vs " + g4(mvn);
    r.threshold = "interacting > non-interacting for all three";
    return r;
}

CriterionResult c6_phase(const AcceptanceOptions& o) {
    CriterionResult r{6, "ferromagnetic onset and boundary"};
    const std::vector<double> k0s{0.2, 0.4, 0.6, 0.8, 1.0, 1.2};
    std::vector<double> j0c(k0s.size());
    parallel_for(k0s.size(), o.workers, [&](std::size_t i) {
        const auto p = reference_params(k0s[i]);
        j0c[i] = critical_J0(p, ThetaGrid::build(p)).J0c;
    });
    bool mono = true;
    for (std::size_t i = 1; i < j0c.size(); ++i) mono = mono && j0c[i] >= j0c[i - 1];
    r.passed = j0c[0] >= 0.6 && j0c[0] <= 0.9 && mono;
    r.measured = "J0c(0.2) = " + fmt("%.4f", j0c[0]) + "; boundary";
    for (double v : j0c) r.measured += " " + fmt("%.4f", v);
    r.threshold = "J0c in [0.6, 0.9]; non-decreasing over kappa0 = 0.2..1.2";
    return r;
}

CriterionResult c7_ordering(const AcceptanceOptions& o) {
    CriterionResult r{7, "m(u0) ordering across kappa0"};
    const std::vector<double> k0s{0.2, 0.7, 1.2};
    const auto u0s = linspace(0.0, 3.0, 31);
    std::vector<std::vector<double>> m(k0s.size());
    parallel_for(k0s.size(), o.workers, [&](std::size_t c) {
        const auto p = reference_params(k0s[c]);
        const auto g = ThetaGrid::build(p);
        SolveControl ctrl;
        for (double u0 : u0s) {
            const auto op = solve_fixed_point(p, u0, g, ctrl);
            ctrl.init = op;
            m[c].push_back(op.m);
        }
    });
    bool ordered = true, monotone = true;
    double min_gap = INFINITY;
    for (std::size_t i = 0; i < u0s.size(); ++i) {
        for (std::size_t c = 1; c < k0s.size(); ++c) {
            const double gap = m[c - 1][i] - m[c][i];
            ordered = ordered && (u0s[i] > 0 ? gap > 0 : std::abs(gap) < 1e-12);
            if (u0s[i] > 0) min_gap = std::min(min_gap, gap);
        }
    }
    for (const auto& curve : m) {
        for (std::size_t i = 1; i < curve.size(); ++i) monotone = monotone && curve[i] > curve[i - 1];
    }
    r.passed = ordered && monotone;
    r.measured = std::string(ordered ? "ordered" : "NOT ordered") + " (min gap " + g4(min_gap) + "), " +
                 (monotone ? "increasing" : "NOT increasing") + "; m(3) = " + fmt("%.4f", m[0].back()) + " " +
                 fmt("%.4f", m[1].back()) + " " + fmt("%.4f", m[2].back());
    r.threshold = "m(0.2) > m(0.7) > m(1.2) for u0 > 0; strictly increasing on [0, 3]";
    return r;
}

CriterionResult c8_simulation(const AcceptanceOptions& o) {
    CriterionResult r{8, "simulation vs mean-field magnetization"};
    ModelParams p = reference_params();
    p.coupling.N = 2000;
    p.coupling.mean_degree = 100.0;
    const auto op = solve_fixed_point(p, 1.0, ThetaGrid::build(p));
    const RngStream root = RngStream(o.seed).substream("acceptance_simulation");
    const auto matrix = build_coupling_matrix(p.coupling, root);
    Schedule s;
    s.dt = 0.02;
    s.t_max = 2000;
    s.record_stride = 50;
    s.clamp_u0 = 1.0;
    const auto traj = run(p, matrix, s, root);
    const auto& ms = traj.magnetization_series;
    const double avg = std::accumulate(ms.begin(), ms.end(), 0.0) / static_cast<double>(ms.size());
    r.passed = std::abs(avg - op.m) < 0.05;
    r.measured = "time-averaged m " + fmt("%.4f", avg) + ", mean-field m " + fmt("%.4f", op.m);
    r.threshold = "|difference| < 0.05";
    r.detail = "N=2000, c=100, u0 held at 1, dt=0.02, t_max=2000";
    return r;
}

CriterionResult c9_clustering(const AcceptanceOptions& o) {
    CriterionResult r{9, "volatility clustering with embedded patterns"};
    constexpr int kReplicas = 5;
    ModelParams p = reference_params();
    p.coupling.N = 50;
    p.coupling.hebbian_p = 3;
    p.sigma_I2 = 0.5;
    Schedule s;
    s.dt = 0.05;
    s.t_max = 5e4;
    s.record_stride = 400;
    const std::vector<int> lags{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<ReturnSummary> sums(kReplicas);
    parallel_for(kReplicas, o.workers, [&](std::size_t k) {
        const RngStream root = RngStream(o.seed).substream("acceptance_clustering").substream(k);
        const auto traj = run(p, build_coupling_matrix(p.coupling, root), s, root);
        sums[k] = summarize_returns(traj, 1, lags, 10);
    });
    int a = 0, b = 0, c = 0;
    std::string kurt, corr;
    for (const auto& sm : sums) {
        const double ek = sm.excess_kurtosis.value_or(NAN);
        a += ek > 0.5;
        bool all_pos = true;
        for (const auto& v : sm.abs_return_acf) all_pos = all_pos && v && *v > 0;
        b += all_pos;
        const double oc = sm.overlap_vol_corr.value_or(NAN);
        c += oc > 0.2;
        kurt += " " + fmt("%.3f", ek);
        corr += " " + fmt("%.3f", oc);
    }
    r.passed = a >= 4 && b >= 4 && c >= 4;
    r.measured = "(a) " + std::to_string(a) + "/5, (b) " + std::to_string(b) + "/5, (c) " + std::to_string(c) +
                 "/5; kurtosis" + kurt + "; vol-overlap corr" + corr;
    r.threshold = ">= 4/5 seeds each: excess kurtosis > 0.5, |r| acf > 0 at lags 1-10, corr > 0.2";
    r.detail = "N=50, p=3, sigma_I^2=0.5, dt=0.05, t_max=5e4, record every 400 steps, window 10 records";
    return r;
}

// Small command configurations for the determinism rerun.
std::vector<std::pair<std::string, RunConfig>> determinism_runs() {
    std::vector<std::pair<std::string, RunConfig>> runs;
    RunConfig base;

    RunConfig sim = base;
    sim.model.coupling.hebbian_p = 3;
    sim.simulate.schedule.dt = 0.05;
    sim.simulate.schedule.t_max = 500;
    sim.simulate.schedule.t_warmup = 50;
    sim.simulate.schedule.record_stride = 4;
    runs.emplace_back("simulate", sim);

    RunConfig curve = base;
    curve.meanfield.mode = "u0_curve";
    curve.meanfield.kappa0_list = {0.2, 0.7, 1.2};
    curve.meanfield.u0_points = 4;
    runs.emplace_back("meanfield_u0_curve", curve);

    RunConfig scan = base;
    scan.meanfield.mode = "phase_scan";
    scan.meanfield.scan_axis = "kappa0";
    scan.meanfield.scan_lo = 0.2;
    scan.meanfield.scan_hi = 1.2;
    scan.meanfield.scan_points = 3;
    runs.emplace_back("meanfield_phase_scan", scan);

    RunConfig tail = base;
    tail.returns.points = 101;
    runs.emplace_back("returns_tail_compare", tail);

    RunConfig slow = base;
    slow.returns.regime = "long";
    slow.returns.n_u0 = 6;
    slow.returns.table_points = 17;
    slow.returns.points = 101;
    slow.meanfield.grid.n_z = 16;
    slow.meanfield.grid.n_kappa = 8;
    runs.emplace_back("returns_long", slow);

    RunConfig market = base;
    market.pricing.variant = "market";
    market.pricing.points = 41;
    runs.emplace_back("pricing_market", market);

    RunConfig member = base;
    member.pricing.variant = "interacting";
    member.pricing.points = 201;
    runs.emplace_back("pricing_interacting", member);
    return runs;
}

std::vector<std::string> dispatch(const std::string& name, const RunConfig& c) {
    if (name.starts_with("simulate")) return cmd_simulate(c);
    if (name.starts_with("meanfield")) return cmd_meanfield(c);
    if (name.starts_with("returns")) return cmd_returns(c);
    return cmd_pricing(c);
}

CriterionResult c10_determinism(const AcceptanceOptions& o) {
    CriterionResult r{10, "byte-identical outputs for any worker count"};
    const int many = std::max(3, o.workers);
    int compared = 0;
    std::string mismatches;
    for (auto [name, cfg] : determinism_runs()) {
        cfg.seed = o.seed;
        std::vector<std::vector<std::pair<std::string, std::string>>> hashes;
        for (int w : {1, many}) {
            cfg.workers = w;
            cfg.out = (o.scratch / (name + "_w" + std::to_string(w))).string();
            std::vector<std::pair<std::string, std::string>> h;
            for (const auto& f : dispatch(name, cfg)) {
                if (f.ends_with(".csv")) h.emplace_back(f, sha256_file(std::filesystem::path(cfg.out) / f));
            }
            hashes.push_back(std::move(h));
        }
        for (const auto& [f, h] : hashes[0]) {
            ++compared;
            const auto it = std::find_if(hashes[1].begin(), hashes[1].end(), [&](const auto& x) { return x.first == f; });
            if (it == hashes[1].end() || it->second != h) mismatches += " " + name + "/" + f;
        }
        if (hashes[0].size() != hashes[1].size()) mismatches += " " + name + "(file list)";
    }
    r.passed = mismatches.empty() && compared > 0;
    r.measured = std::to_string(compared) + " CSV files compared, " +
                 (mismatches.empty() ? std::string("all identical") : "differing:" + mismatches);
    r.threshold = "identical SHA-256 at workers 1 and " + std::to_string(many);
    return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options,
                                            const std::function<void(const CriterionResult&)>& on_result) {
    static const char* const names[] = {"quasi-stationary tail exponent",
                                        "short vs asymptotic returns at kappa0 tau = 20",
                                        "variance laws",
                                        "pricing closed form vs kappa quadrature",
                                        "interaction broadening of prices",
                                        "ferromagnetic onset and boundary",
                                        "m(u0) ordering across kappa0",
                                        "simulation vs mean-field magnetization",
                                        "volatility clustering with embedded patterns",
                                        "byte-identical outputs for any worker count"};
    const std::vector<Check> checks{c1_tail,     c2_tail_compare,       c3_variance,   c4_pricing,    c5_broadening,
                                    c6_phase,    c7_ordering,   c8_simulation, c9_clustering, c10_determinism};
    std::vector<CriterionResult> out;
    for (std::size_t i = 0; i < checks.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), id) == options.only.end()) {
            continue;
        }
        const auto t0 = std::chrono::steady_clock::now();
        CriterionResult r;
        try {
            r = checks[i](options);
        } catch (const std::exception& e) {
            r.id = id;
            r.name = names[i];
            r.passed = false;
            r.measured = "error";
            r.detail = e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (on_result) on_result(r);
        out.push_back(std::move(r));
    }
    return out;
}

std::string format_result_line(const CriterionResult& r) {
    std::string s = std::string(r.passed ? "[PASS] " : "[FAIL] ") + std::to_string(r.id) + " " + r.name + ": " +
                    r.measured + " (threshold " + r.threshold + ")";
    if (!r.passed && !r.detail.empty()) s += " -- " + r.detail;
    return s;
}

std::string report_json(const std::vector<CriterionResult>& results, std::uint64_t seed) {
    nlohmann::ordered_json j;
    j["seed"] = seed;
    bool all = true;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : results) {
        all = all && r.passed;
        arr.push_back({{"id", r.id},
                       {"name", r.name},
                       {"passed", r.passed},
                       {"measured", r.measured},
                       {"threshold", r.threshold},
                       {"detail", r.detail}});
    }
    j["passed"] = all;
    j["criteria"] = arr;
    return j.dump(2) + "\n";
}

}  // namespace igbm::app
