#pragma once

#include "igbm/meanfield.hpp"
#include "igbm/params.hpp"
#include "igbm/simulator.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace igbm::app {

struct SimulateSettings {
    Schedule schedule;
    int return_lag = 1;
    std::vector<int> acf_lags{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    int vol_window = 10;
};

struct MeanfieldSettings {
    std::string mode = "solve";  // solve | u0_curve | phase_scan
    double u0 = 0.0;
    SolveControl ctrl;
    ThetaGridOptions grid;
    // u0_curve
    std::vector<double> kappa0_list{0.2, 0.7, 1.2};
    double u0_min = 0.0;
    double u0_max = 3.0;
    int u0_points = 31;
    // phase_scan
    std::string scan_axis = "J0";  // J0 | kappa0
    double scan_lo = 0.4;
    double scan_hi = 1.2;
    int scan_points = 9;
};

struct ReturnsSettings {
    std::string regime = "tail_compare";  // quasi_stationary | asymptotic | tail_compare | intermediate | long
    double tau = 100.0;
    double du_max = 0.0;  // 0: five stationary widths sigma / sqrt(kappa0)
    int points = 401;
    int n_u0 = 32;
    int table_points = 41;
    double table_u0_max = 5.0;
};

struct PricingSettings {
    std::string variant = "interacting";  // noninteracting | interacting | market
    double u0 = 1.0;
    double kappa = 0.2;  // member rate of the single-kappa curves
    double ubar_max = 40.0;
    int points = 801;
};

struct RunConfig {
    std::uint64_t seed = 1;
    int workers = 1;
    std::string out = "out";
    ModelParams model;
    SimulateSettings simulate;
    MeanfieldSettings meanfield;
    ReturnsSettings returns;
    PricingSettings pricing;

    void validate() const;
};

// Sectioned key = value text. Unknown sections or keys, malformed numbers
// and invalid parameter combinations raise ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
// Every key, floats at 17 significant digits; parse_config(serialize(c)) == c.
std::string serialize_config(const RunConfig& config);
// ("section.key", text) for every key in file order.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config);
// Sets one "section.key" from text with the same checks as the file parser
// (the whole config is re-validated).
void set_config_value(RunConfig& config, const std::string& path, const std::string& value);

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace igbm::app
