#include "igbm/density.hpp"

#include "igbm/error.hpp"
#include "igbm/io.hpp"
#include "igbm/numerics.hpp"

#include <cmath>

namespace igbm {

double DensityCurve::integral() const { return moment(0); }

double DensityCurve::moment(int k) const {
    if (!bin_edges.empty()) {
        double acc = 0.0;
        for (std::size_t i = 0; i < density.size(); ++i) {
            acc += density[i] * std::pow(grid[i], k) * (bin_edges[i + 1] - bin_edges[i]);
        }
        return acc;
    }
    std::vector<double> y(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) y[i] = density[i] * std::pow(grid[i], k);
    return trapezoid(grid, y);
}

double DensityCurve::variance() const {
    const double z = integral();
    const double mu = moment(1) / z;
    return moment(2) / z - mu * mu;
}

double DensityCurve::skewness() const {
    const double z = integral();
    const double m1 = moment(1) / z, m2 = moment(2) / z, m3 = moment(3) / z;
    const double var = m2 - m1 * m1;
    const double mu3 = m3 - 3 * m1 * m2 + 2 * m1 * m1 * m1;
    return mu3 / std::pow(var, 1.5);
}

double DensityCurve::normalize() {
    const double z = integral();
    if (!(z > 0.0) || !std::isfinite(z)) throw NumericalError("density has no positive finite mass");
    for (auto& d : density) d /= z;
    return 1.0 / z;
}

void DensityCurve::validate() const {
    if (grid.size() != density.size()) throw ParameterError("density: grid and values differ in length");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) throw ParameterError("density: grid must be strictly increasing");
    }
    for (double d : density) {
        if (!(d >= 0.0) || !std::isfinite(d)) throw NumericalError("density: negative or non-finite value");
    }
    if (!bin_edges.empty() && bin_edges.size() != grid.size() + 1) {
        throw ParameterError("density: bin edges must number grid size + 1");
    }
}

double log_log_slope(const DensityCurve& c, double lo, double hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double a = std::abs(c.grid[i]);
        if (a < lo || a > hi || !(c.density[i] > 0.0)) continue;
        const double x = std::log(a), y = std::log(c.density[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) throw StatisticsError("log_log_slope: fewer than two usable points");
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void write_density_csv(const std::filesystem::path& path, const std::string& x_name,
                       const std::string& y_name, const DensityCurve& c) {
    CsvWriter w(path, {x_name, y_name});
    for (std::size_t i = 0; i < c.size(); ++i) w.row({c.grid[i], c.density[i]});
    w.close();
}

std::vector<double> linspace(double lo, double hi, int n) {
    if (n < 2) return {lo};
    std::vector<double> x(static_cast<std::size_t>(n));
    const double h = (hi - lo) / (n - 1);
    for (int i = 0; i < n; ++i) x[i] = lo + i * h;
    x.back() = hi;
    return x;
}

}  // namespace igbm
