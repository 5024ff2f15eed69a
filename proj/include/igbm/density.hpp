#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace igbm {

// Tabulated density on an increasing grid. Histogram densities also carry
// their bin edges so that integral() is exact for them.
struct DensityCurve {
    std::vector<double> grid;
    std::vector<double> density;
    std::vector<double> bin_edges;

    std::size_t size() const { return grid.size(); }
    // Trapezoid over the grid, or sum of density * width for histograms.
    double integral() const;
    double moment(int k) const;
    double mean() const { return moment(1) / integral(); }
    double variance() const;
    // Standardized third central moment.
    double skewness() const;
    // Scales density so integral() == 1; returns the factor applied.
    double normalize();
    void validate() const;
};

// Least-squares slope of log(density) against log|x| over grid points with
// lo <= |x| <= hi and positive density.
double log_log_slope(const DensityCurve& c, double lo, double hi);

void write_density_csv(const std::filesystem::path& path, const std::string& x_name,
                       const std::string& y_name, const DensityCurve& c);

// Uniform grid of n points on [lo, hi].
std::vector<double> linspace(double lo, double hi, int n);

}  // namespace igbm
