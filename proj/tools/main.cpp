#include "commands.hpp"
#include "config.hpp"

#include "igbm/error.hpp"
#include "igbm/io.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <optional>

namespace {

enum Exit { ok = 0, other = 1, config_error = 2, no_convergence = 3, validation_failed = 4 };

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> workers;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_path, "INI configuration file (defaults when omitted)");
    cmd->add_option("--seed", c.seed, "override run.seed");
    cmd->add_option("--out", c.out, "override run.out (output directory)");
    cmd->add_option("--workers", c.workers, "override run.workers")->check(CLI::PositiveNumber);
}

igbm::app::RunConfig resolve(const Common& c) {
    auto cfg = c.config_path.empty() ? igbm::app::RunConfig{} : igbm::app::load_config(c.config_path);
    if (c.seed) cfg.seed = *c.seed;
    if (c.out) cfg.out = *c.out;
    if (c.workers) cfg.workers = *c.workers;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"igbm: interacting geometric Brownian motion market model"};
    app.require_subcommand(1);
    app.set_version_flag("--version", igbm::app::kToolVersion);

    Common common;
    std::optional<std::string> mode, regime, variant;
    std::optional<double> tau;

    auto* sim = app.add_subcommand("simulate", "run the finite-N market and write trajectories and return statistics");
    add_common(sim, common);
    auto* mf = app.add_subcommand("meanfield", "solve the mean-field order parameters");
    add_common(mf, common);
    mf->add_option("--mode", mode, "solve | u0_curve | phase_scan (overrides meanfield.mode)");
    auto* ret = app.add_subcommand("returns", "return distributions across the ensemble");
    add_common(ret, common);
    ret->add_option("--regime", regime, "quasi_stationary | asymptotic | tail_compare | intermediate | long");
    ret->add_option("--tau", tau, "time separation (overrides returns.tau)");
    auto* pri = app.add_subcommand("pricing", "equilibrium log-price distributions");
    add_common(pri, common);
    pri->add_option("--variant", variant, "noninteracting | interacting | market");
    auto* val = app.add_subcommand("validate", "run the acceptance suite and write a JSON report");
    add_common(val, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Exit::ok : Exit::config_error;
    }

    try {
        auto cfg = resolve(common);
        if (mode) igbm::app::set_config_value(cfg, "meanfield.mode", *mode);
        if (regime) igbm::app::set_config_value(cfg, "returns.regime", *regime);
        if (variant) igbm::app::set_config_value(cfg, "pricing.variant", *variant);
        if (tau) igbm::app::set_config_value(cfg, "returns.tau", igbm::format17(*tau));

        if (*sim) {
            igbm::app::cmd_simulate(cfg);
        } else if (*mf) {
            igbm::app::cmd_meanfield(cfg);
        } else if (*ret) {
            igbm::app::cmd_returns(cfg);
        } else if (*pri) {
            igbm::app::cmd_pricing(cfg);
        } else if (*val) {
            if (!igbm::app::cmd_validate(cfg)) return Exit::validation_failed;
        }
        return Exit::ok;
    } catch (const igbm::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return Exit::config_error;
    } catch (const igbm::ParameterError& e) {
        std::fprintf(stderr, "invalid parameters: %s\n", e.what());
        return Exit::config_error;
    } catch (const igbm::NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return Exit::no_convergence;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return Exit::other;
    }
}
