#include "igbm/simulator.hpp"

#include "igbm/error.hpp"
#include "igbm/io.hpp"
#include "igbm/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace igbm {

double PerAsset::max_kappa() const {
    return kappa.empty() ? 0.0 : *std::max_element(kappa.begin(), kappa.end());
}

PerAsset draw_per_asset(const ModelParams& params, int N, const RngStream& root) {
    params.validate();
    PerAsset pa;
    pa.kappa.resize(N);
    pa.I.resize(N);
    Rng kr = root.substream("kappa").engine();
    for (auto& k : pa.kappa) k = sample_kappa(params, kr);
    Rng dr = root.substream("drift").engine();
    const double sI = params.sigma_I();
    for (auto& v : pa.I) v = params.I0 + sI * dr.normal();
    return pa;
}

namespace {

void check_guard(const PerAsset& pa, double dt) {
    if (!(dt > 0.0)) throw ParameterError("step: dt must be positive");
    if (!(dt * pa.max_kappa() < 0.1)) {
        throw ParameterError("step: stability guard dt * max kappa < 0.1 violated (dt=" + format17(dt) +
                             ", max kappa=" + format17(pa.max_kappa()) + ")");
    }
}

}  // namespace

void advance(MarketState& state, const CouplingMatrix& matrix, const ModelParams& params,
             const PerAsset& pa, double dt, StepNoise& noise, std::vector<double>& scratch,
             std::optional<double> clamp_u0) {
    const int N = static_cast<int>(state.u.size());
    scratch.resize(2 * static_cast<std::size_t>(N));
    double* g = scratch.data();
    double* field = scratch.data() + N;
    for (int i = 0; i < N; ++i) g[i] = igbm::erf(state.u[i]);
    matrix.multiply({g, static_cast<std::size_t>(N)}, {field, static_cast<std::size_t>(N)});

    const double macro = params.sigma0 * state.u0;
    const double amp = params.sigma * std::sqrt(dt);
    for (int i = 0; i < N; ++i) {
        const double drift = -pa.kappa[i] * state.u[i] + field[i] + macro + pa.I[i];
        state.u[i] += dt * drift + amp * noise.fast.normal();
    }
    if (clamp_u0) {
        state.u0 = *clamp_u0;
    } else {
        state.u0 += -params.gamma * state.u0 * dt + std::sqrt(2.0 * params.gamma * dt) * noise.slow.normal();
    }
    state.t += dt;

    for (int i = 0; i < N; ++i) {
        if (!std::isfinite(state.u[i])) {
            throw NumericalError("step: non-finite log-price at asset " + std::to_string(i) + " (t=" +
                                 format17(state.t) + ")");
        }
    }
    if (!std::isfinite(state.u0)) throw NumericalError("step: non-finite slow factor");
}

MarketState step(const MarketState& state, const CouplingMatrix& matrix, const ModelParams& params,
                 const PerAsset& pa, double dt, StepNoise& noise) {
    const auto N = state.u.size();
    if (N != static_cast<std::size_t>(matrix.N()) || pa.kappa.size() != N || pa.I.size() != N) {
        throw ParameterError("step: state, matrix and per-asset sizes differ");
    }
    check_guard(pa, dt);
    for (std::size_t i = 0; i < N; ++i) {
        if (!std::isfinite(state.u[i])) throw ParameterError("step: input state is not finite");
    }
    MarketState next = state;
    std::vector<double> scratch;
    advance(next, matrix, params, pa, dt, noise, scratch);
    return next;
}

double Schedule::warmup(const ModelParams& params) const {
    if (t_warmup >= 0.0) return t_warmup;
    return std::min(10.0 / params.kappa_floor(), t_max / 10.0);
}

void Schedule::validate(const ModelParams& params) const {
    if (!(dt > 0.0)) throw ParameterError("schedule: dt must be positive");
    if (!(t_max > 0.0)) throw ParameterError("schedule: t_max must be positive");
    if (!(warmup(params) < t_max)) throw ParameterError("schedule: t_warmup must be below t_max");
    if (record_stride < 1) throw ParameterError("schedule: record_stride must be at least 1");
    if (snapshot_every < 0) throw ParameterError("schedule: snapshot_every must be non-negative");
}

std::vector<double> overlaps(std::span<const double> u, const PatternSet& patterns) {
    if (u.size() != static_cast<std::size_t>(patterns.N)) {
        throw ParameterError("overlaps: state has " + std::to_string(u.size()) + " assets, patterns " +
                             std::to_string(patterns.N));
    }
    std::vector<double> g(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) g[i] = igbm::erf(u[i]);
    std::vector<double> m(static_cast<std::size_t>(patterns.p), 0.0);
    for (int mu = 0; mu < patterns.p; ++mu) {
        double acc = 0.0;
        for (int i = 0; i < patterns.N; ++i) acc += patterns(mu, i) * g[i];
        m[mu] = acc / patterns.N;
    }
    return m;
}

std::vector<double> overlaps(const MarketState& state, const PatternSet& patterns) {
    return overlaps(state.u, patterns);
}

Trajectory run(const ModelParams& params, const CouplingMatrix& matrix, const Schedule& schedule,
               const RngStream& root) {
    params.validate();
    schedule.validate(params);
    const int N = matrix.N();
    const PerAsset pa = draw_per_asset(params, N, root);
    check_guard(pa, schedule.dt);

    MarketState state;
    state.u.resize(N);
    Rng init = root.substream("init").engine();
    if (schedule.initial_u) {
        if (schedule.initial_u->size() != static_cast<std::size_t>(N)) {
            throw ParameterError("run: initial state has the wrong size");
        }
        state.u = *schedule.initial_u;
    } else {
        for (int i = 0; i < N; ++i) state.u[i] = params.sigma / std::sqrt(2.0 * pa.kappa[i]) * init.normal();
    }
    state.u0 = schedule.clamp_u0 ? *schedule.clamp_u0 : init.normal();

    StepNoise noise{root.substream("fast_noise").engine(), root.substream("slow_noise").engine()};
    std::vector<double> scratch;

    const double dt = schedule.dt;
    const auto warm_steps = static_cast<long long>(std::llround(schedule.warmup(params) / dt));
    const auto total_steps = static_cast<long long>(std::llround(schedule.t_max / dt));

    Trajectory traj;
    traj.dt = dt;
    traj.record_stride = schedule.record_stride;
    const PatternSet* pats = matrix.patterns() ? &*matrix.patterns() : nullptr;
    traj.p = pats ? pats->p : 0;
    const auto n_rec = static_cast<std::size_t>((total_steps - warm_steps) / schedule.record_stride + 1);
    traj.times.reserve(n_rec);
    traj.u0_series.reserve(n_rec);
    traj.index_series.reserve(n_rec);
    traj.magnetization_series.reserve(n_rec);
    if (pats) traj.overlap_series.reserve(n_rec);

    long long records = 0;
    auto record = [&](long long step_index) {
        // Times from the step counter keep the stride exactly constant.
        traj.times.push_back(static_cast<double>(step_index) * dt);
        traj.u0_series.push_back(state.u0);
        double idx = 0.0, mag = 0.0;
        for (int i = 0; i < N; ++i) {
            idx += state.u[i];
            mag += igbm::erf(state.u[i]);
        }
        traj.index_series.push_back(idx / N);
        traj.magnetization_series.push_back(mag / N);
        if (pats) traj.overlap_series.push_back(overlaps(state.u, *pats));
        if (schedule.snapshot_every > 0 && records % schedule.snapshot_every == 0) {
            traj.snapshots.push_back({static_cast<double>(step_index) * dt, state.u});
        }
        ++records;
    };

    for (long long s = 0; s < total_steps; ++s) {
        if (s >= warm_steps && (s - warm_steps) % schedule.record_stride == 0) record(s);
        advance(state, matrix, params, pa, dt, noise, scratch, schedule.clamp_u0);
    }
    if ((total_steps - warm_steps) % schedule.record_stride == 0) record(total_steps);
    return traj;
}

std::vector<double> index_returns(const Trajectory& traj, int lag) {
    if (lag < 1) throw ParameterError("index_returns: lag must be positive");
    const auto n = traj.index_series.size();
    if (static_cast<std::size_t>(lag) >= n) {
        throw ParameterError("index_returns: lag " + std::to_string(lag) + " exceeds series length " +
                             std::to_string(n));
    }
    std::vector<double> r(n - lag);
    for (std::size_t k = 0; k + lag < n; ++k) r[k] = traj.index_series[k + lag] - traj.index_series[k];
    return r;
}

DensityCurve empirical_return_density(std::span<const double> samples, int bins) {
    if (samples.size() < 1000) {
        throw StatisticsError("empirical_return_density: need at least 1000 samples, got " +
                              std::to_string(samples.size()));
    }
    if (bins < 1) throw ParameterError("empirical_return_density: bins must be positive");
    auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    double lo = *lo_it, hi = *hi_it;
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double w = (hi - lo) / bins;
    DensityCurve c;
    c.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b) c.bin_edges[b] = lo + b * w;
    c.bin_edges.back() = hi;
    std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
    for (double x : samples) {
        auto b = static_cast<int>((x - lo) / w);
        b = std::clamp(b, 0, bins - 1);
        counts[b] += 1.0;
    }
    const double n = static_cast<double>(samples.size());
    c.grid.resize(bins);
    c.density.resize(bins);
    for (int b = 0; b < bins; ++b) {
        c.grid[b] = 0.5 * (c.bin_edges[b] + c.bin_edges[b + 1]);
        c.density[b] = counts[b] / (n * (c.bin_edges[b + 1] - c.bin_edges[b]));
    }
    return c;
}

std::optional<double> excess_kurtosis(std::span<const double> x) {
    if (x.size() < 4) return std::nullopt;
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double m2 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = (v - mean) * (v - mean);
        m2 += d;
        m4 += d * d;
    }
    m2 /= static_cast<double>(x.size());
    m4 /= static_cast<double>(x.size());
    if (!(m2 > 0.0)) return std::nullopt;
    return m4 / (m2 * m2) - 3.0;
}

std::optional<double> autocorrelation(std::span<const double> x, int lag) {
    if (lag < 0 || static_cast<std::size_t>(lag) >= x.size()) return std::nullopt;
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double den = 0.0, num = 0.0;
    for (double v : x) den += (v - mean) * (v - mean);
    for (std::size_t k = 0; k + lag < x.size(); ++k) num += (x[k] - mean) * (x[k + lag] - mean);
    if (!(den > 0.0)) return std::nullopt;
    return num / den;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = std::min(x.size(), y.size());
    if (n < 3) return std::nullopt;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

std::optional<double> overlap_volatility_correlation(const Trajectory& traj, int window) {
    if (traj.p == 0 || traj.size() < 3 || window < 2) return std::nullopt;
    const double h = traj.dt * traj.record_stride;
    const std::size_t n = traj.size() - 1;
    std::vector<double> vol, speed;
    for (std::size_t start = 0; start + window <= n; start += window) {
        double s1 = 0, s2 = 0, sp = 0;
        for (std::size_t k = start; k < start + window; ++k) {
            const double r = traj.index_series[k + 1] - traj.index_series[k];
            s1 += r;
            s2 += r * r;
            double best = 0.0;
            for (int mu = 0; mu < traj.p; ++mu) {
                best = std::max(best, std::abs(traj.overlap_series[k + 1][mu] - traj.overlap_series[k][mu]) / h);
            }
            sp += best;
        }
        const double mean = s1 / window;
        vol.push_back(std::sqrt(std::max(0.0, s2 / window - mean * mean)));
        speed.push_back(sp / window);
    }
    return pearson(vol, speed);
}

ReturnSummary summarize_returns(const Trajectory& traj, int lag, std::span<const int> acf_lags,
                                int vol_window) {
    ReturnSummary s;
    const auto r = index_returns(traj, lag);
    s.samples = r.size();
    s.excess_kurtosis = excess_kurtosis(r);
    std::vector<double> absr(r.size());
    for (std::size_t k = 0; k < r.size(); ++k) absr[k] = std::abs(r[k]);
    for (int L : acf_lags) {
        s.acf_lags.push_back(L);
        s.abs_return_acf.push_back(autocorrelation(absr, L));
    }
    s.overlap_vol_corr = overlap_volatility_correlation(traj, vol_window);
    double m = 0.0;
    for (double v : traj.magnetization_series) m += v;
    if (!traj.magnetization_series.empty()) m /= static_cast<double>(traj.magnetization_series.size());
    s.mean_magnetization = m;
    return s;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
    std::vector<std::string> header{"t", "u0", "index"};
    for (int mu = 1; mu <= traj.p; ++mu) header.push_back("m" + std::to_string(mu));
    CsvWriter w(path, header);
    std::vector<double> row(header.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        row[0] = traj.times[k];
        row[1] = traj.u0_series[k];
        row[2] = traj.index_series[k];
        for (int mu = 0; mu < traj.p; ++mu) row[3 + mu] = traj.overlap_series[k][mu];
        w.row(row);
    }
    w.close();
}

void write_snapshots_csv(const std::filesystem::path& path, const Trajectory& traj) {
    CsvWriter w(path, {"t", "i", "u_i"});
    for (const auto& snap : traj.snapshots) {
        for (std::size_t i = 0; i < snap.u.size(); ++i) {
            w.raw_row({format17(snap.t), std::to_string(i), format17(snap.u[i])});
        }
    }
    w.close();
}

}  // namespace igbm
