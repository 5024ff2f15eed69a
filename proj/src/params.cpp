#include "igbm/params.hpp"

#include "igbm/error.hpp"
#include "igbm/numerics.hpp"

#include <cmath>

namespace igbm {

void CouplingSpec::validate() const {
    if (N < 2) throw ParameterError("coupling: N must be at least 2");
    if (mean_degree && !(*mean_degree > 0.0 && *mean_degree <= N)) {
        throw ParameterError("coupling: mean degree must lie in (0, N]");
    }
    if (!(J >= 0.0)) throw ParameterError("coupling: J must be non-negative");
    if (!(alpha >= -1.0 && alpha <= 1.0)) throw ParameterError("coupling: alpha must lie in [-1, 1]");
    if (!std::isfinite(J0)) throw ParameterError("coupling: J0 must be finite");
    if (hebbian_p < 0) throw ParameterError("coupling: hebbian_p must be non-negative");
    if (hebbian_p > 0 && !full()) {
        throw ParameterError("coupling: Hebbian patterns require full connectivity");
    }
}

KappaDistribution KappaDistribution::gamma(double kappa0, double nu) {
    KappaDistribution d;
    d.kind = Kind::gamma_dist;
    d.kappa0 = kappa0;
    d.nu = nu;
    return d;
}

KappaDistribution KappaDistribution::fixed_at(double kappa) {
    KappaDistribution d;
    d.kind = Kind::fixed;
    d.kappa = kappa;
    return d;
}

double KappaDistribution::pdf(double k) const {
    if (is_fixed() || k <= 0.0) return 0.0;
    const double x = k / kappa0;
    return std::exp((nu - 1.0) * std::log(x) - x - log_gamma(nu)) / kappa0;
}

void KappaDistribution::validate() const {
    if (is_fixed()) {
        if (!(kappa > 0.0)) throw ParameterError("kappa: fixed kappa must be positive");
    } else {
        if (!(kappa0 > 0.0)) throw ParameterError("kappa: kappa0 must be positive");
        if (!(nu > 0.0)) throw ParameterError("kappa: nu must be positive");
    }
}

double ModelParams::sigma_I() const { return std::sqrt(sigma_I2); }

void ModelParams::validate() const {
    coupling.validate();
    kappa_dist.validate();
    if (!(sigma_I2 >= 0.0)) throw ParameterError("model: sigma_I2 must be non-negative");
    if (!(sigma >= 0.0)) throw ParameterError("model: sigma must be non-negative");
    if (!(sigma0 >= 0.0)) throw ParameterError("model: sigma0 must be non-negative");
    if (!(gamma > 0.0)) throw ParameterError("model: gamma must be positive");
    if (!std::isfinite(I0)) throw ParameterError("model: I0 must be finite");
    if (!(kappa_floor_factor > 0.0 && kappa_floor_factor < 1.0)) {
        throw ParameterError("model: kappa floor factor must lie in (0, 1)");
    }
}

double derive_drift(double mu, double sigma) { return mu - 0.5 * sigma * sigma; }

double sample_kappa(const ModelParams& params, Rng& rng) {
    const auto& d = params.kappa_dist;
    if (d.is_fixed()) return d.kappa;
    const double floor = params.kappa_floor();
    for (;;) {
        const double k = rng.gamma(d.nu, d.kappa0);
        if (k >= floor) return k;
    }
}

}  // namespace igbm
