#pragma once

#include "igbm/rng.hpp"

#include <optional>
#include <string>

namespace igbm {

// Quenched coupling ensemble. mean_degree empty means fully connected, in
// which case the scaling uses c = N.
struct CouplingSpec {
    int N = 50;
    std::optional<double> mean_degree;
    double J0 = 0.5;
    double J = 0.5;
    double alpha = 0.5;
    int hebbian_p = 0;

    bool full() const { return !mean_degree.has_value(); }
    double scaling_degree() const { return full() ? static_cast<double>(N) : *mean_degree; }
    void validate() const;
};

// Distribution of the mean-reversion rates kappa_i.
struct KappaDistribution {
    enum class Kind { gamma_dist, fixed };
    Kind kind = Kind::gamma_dist;
    double kappa0 = 0.2;  // scale (= mean for nu = 1)
    double nu = 1.0;      // shape; nu = 1 is exponential
    double kappa = 0.2;   // used when kind == fixed

    static KappaDistribution gamma(double kappa0, double nu);
    static KappaDistribution exponential(double kappa0) { return gamma(kappa0, 1.0); }
    static KappaDistribution fixed_at(double kappa);

    bool is_fixed() const { return kind == Kind::fixed; }
    double mean() const { return is_fixed() ? kappa : kappa0 * nu; }
    // Scale used by the kappa floor: kappa0 for the Gamma law, kappa itself otherwise.
    double scale() const { return is_fixed() ? kappa : kappa0; }
    double pdf(double k) const;
    void validate() const;
};

struct ModelParams {
    CouplingSpec coupling;
    double I0 = 0.0;
    double sigma_I2 = 0.1;
    double sigma = 0.1;
    double sigma0 = 0.3;
    double gamma = 1e-4;  // OU rate of the slow factor
    KappaDistribution kappa_dist;
    // kappa draws below floor_factor * scale are resampled.
    double kappa_floor_factor = 1e-3;

    double kappa_floor() const { return kappa_floor_factor * kappa_dist.scale(); }
    double sigma_I() const;
    void validate() const;
};

// Drift from growth rate and volatility: I = mu - sigma^2 / 2.
double derive_drift(double mu, double sigma);

// Draw one kappa from the distribution, resampling below the floor.
double sample_kappa(const ModelParams& params, Rng& rng);

}  // namespace igbm
