#pragma once

#include "igbm/couplings.hpp"
#include "igbm/density.hpp"
#include "igbm/params.hpp"
#include "igbm/rng.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace igbm {

struct MarketState {
    std::vector<double> u;
    double u0 = 0.0;
    double t = 0.0;
};

// Quenched per-asset constants, drawn once per run.
struct PerAsset {
    std::vector<double> I;
    std::vector<double> kappa;

    double max_kappa() const;
};

// kappa from the "kappa" sub-stream, I ~ Normal(I0, sigma_I2) from "drift".
PerAsset draw_per_asset(const ModelParams& params, int N, const RngStream& root);

// Fast noise drives the assets, slow noise the factor; both are consumed in a
// fixed order so identical engines give identical paths.
struct StepNoise {
    Rng fast;
    Rng slow;
};

// One Euler-Maruyama step. Throws ParameterError if dt * max kappa >= 0.1
// and NumericalError naming the first non-finite coordinate.
MarketState step(const MarketState& state, const CouplingMatrix& matrix, const ModelParams& params,
                 const PerAsset& per_asset, double dt, StepNoise& noise);

// Same update in place; `scratch` holds erf(u) and the coupling field. When
// `clamp_u0` is set the slow factor is held at that value.
void advance(MarketState& state, const CouplingMatrix& matrix, const ModelParams& params,
             const PerAsset& per_asset, double dt, StepNoise& noise, std::vector<double>& scratch,
             std::optional<double> clamp_u0 = std::nullopt);

struct Schedule {
    double dt = 0.01;
    // Negative means automatic: min(10 / kappa_floor, t_max / 10).
    double t_warmup = -1.0;
    double t_max = 5e4;
    int record_stride = 10;
    // Hold u0 fixed (gamma -> 0 limit); the initial u0 is then this value.
    std::optional<double> clamp_u0;
    // Start from this u instead of the stationary per-asset laws.
    std::optional<std::vector<double>> initial_u;
    // Full-state dumps every this many records (0 = none).
    int snapshot_every = 0;

    double warmup(const ModelParams& params) const;
    void validate(const ModelParams& params) const;
};

struct Snapshot {
    double t;
    std::vector<double> u;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<double> u0_series;
    std::vector<double> index_series;
    // (1/N) sum_i erf(u_i), the order parameter m of the mean-field theory.
    std::vector<double> magnetization_series;
    // overlap_series[k][mu]; empty when the matrix has no patterns.
    std::vector<std::vector<double>> overlap_series;
    std::vector<Snapshot> snapshots;
    double dt = 0.0;
    int record_stride = 1;
    int p = 0;

    std::size_t size() const { return times.size(); }
};

// Streams: "kappa", "drift", "init", "fast_noise", "slow_noise".
Trajectory run(const ModelParams& params, const CouplingMatrix& matrix, const Schedule& schedule,
               const RngStream& root);

// m_mu = (1/N) sum_i xi_i^mu erf(u_i).
std::vector<double> overlaps(std::span<const double> u, const PatternSet& patterns);
std::vector<double> overlaps(const MarketState& state, const PatternSet& patterns);

// r_k = index_{k+lag} - index_k on the recorded grid.
std::vector<double> index_returns(const Trajectory& traj, int lag);

// Normalized histogram; at least 1000 samples. Equal samples give one
// occupied unit-wide bin split into `bins` parts around the value.
DensityCurve empirical_return_density(std::span<const double> samples, int bins);

struct ReturnSummary {
    std::optional<double> excess_kurtosis;  // empty when the returns have zero variance
    std::vector<int> acf_lags;
    std::vector<std::optional<double>> abs_return_acf;
    std::optional<double> overlap_vol_corr;  // needs patterns
    double mean_magnetization = 0.0;
    std::size_t samples = 0;
};

std::optional<double> excess_kurtosis(std::span<const double> x);
// Sample autocorrelation at `lag` (mean removed); empty if variance is zero.
std::optional<double> autocorrelation(std::span<const double> x, int lag);
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

// Pearson correlation over non-overlapping windows of `window` records
// between the standard deviation of lag-1 index returns and the window mean
// of max_mu |dm_mu/dt|.
std::optional<double> overlap_volatility_correlation(const Trajectory& traj, int window);

ReturnSummary summarize_returns(const Trajectory& traj, int lag, std::span<const int> acf_lags,
                                int vol_window);

// Header t,u0,index,m1..mp.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);
// Header t,i,u_i.
void write_snapshots_csv(const std::filesystem::path& path, const Trajectory& traj);

}  // namespace igbm
