#include "commands.hpp"

#include "acceptance.hpp"

#include "igbm/couplings.hpp"
#include "igbm/error.hpp"
#include "igbm/io.hpp"
#include "igbm/meanfield.hpp"
#include "igbm/parallel.hpp"
#include "igbm/pricing.hpp"
#include "igbm/returns.hpp"
#include "igbm/simulator.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace igbm::app {

namespace {

using json = nlohmann::ordered_json;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string mode_of(const std::string& command, const RunConfig& c) {
    if (command == "meanfield") return c.meanfield.mode;
    if (command == "returns") return c.returns.regime;
    if (command == "pricing") return c.pricing.variant;
    return {};
}

json nullable(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

void write_json(const RunRecord& rec, const std::string& name, const json& j) {
    write_file_atomic(rec.path(name), j.dump(2) + "\n");
}

json op_json(const OrderParameters& op) {
    return {{"u0", op.u0},         {"m", op.m},         {"q", op.q},
            {"chi", op.chi},       {"Chat0", op.Chat0}, {"iterations", op.iterations},
            {"residual", op.residual}, {"chi_negative", op.chi_negative}};
}

double normal_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace

std::vector<double> symmetric_grid(double half_width, int n) { return linspace(-half_width, half_width, n); }

RunRecord::RunRecord(std::string command, const RunConfig& config)
    : command_(std::move(command)), mode_(mode_of(command_, config)), config_(config), dir_(config.out),
      start_(std::chrono::steady_clock::now()) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
    write_file_atomic(path("config.ini"), serialize_config(config_));
    add("config.ini");
}

void RunRecord::add(const std::string& name) { files_.push_back(name); }

void RunRecord::write_manifest() {
    json j;
    j["tool"] = "igbm";
    j["version"] = kToolVersion;
    j["command"] = command_;
    if (!mode_.empty()) j["mode"] = mode_;
    j["seed"] = config_.seed;
    j["workers"] = config_.workers;
    json cfg = json::object();
    for (const auto& [path, value] : config_entries(config_)) {
        const auto dot = path.find('.');
        cfg[path.substr(0, dot)][path.substr(dot + 1)] = value;
    }
    j["config"] = cfg;
    json t = json::object();
    for (const auto& [name, s] : timings_) t[name] = s;
    t["total"] = seconds_since(start_);
    j["timing_seconds"] = t;
    json outs = json::array();
    for (const auto& f : files_) {
        outs.push_back({{"file", f},
                        {"sha256", sha256_file(path(f))},
                        {"bytes", static_cast<std::uint64_t>(std::filesystem::file_size(path(f)))}});
    }
    j["outputs"] = outs;
    write_file_atomic(path("manifest.json"), j.dump(2) + "\n");
}

std::vector<std::string> cmd_simulate(const RunConfig& config) {
    RunRecord rec("simulate", config);
    const auto& s = config.simulate;
    const RngStream root(config.seed);
    auto t0 = std::chrono::steady_clock::now();
    const auto matrix = build_coupling_matrix(config.model.coupling, root);
    rec.stage("couplings", seconds_since(t0));
    t0 = std::chrono::steady_clock::now();
    const auto traj = run(config.model, matrix, s.schedule, root);
    rec.stage("simulate", seconds_since(t0));

    write_trajectory_csv(rec.path("trajectory.csv"), traj);
    rec.add("trajectory.csv");
    if (!traj.snapshots.empty()) {
        write_snapshots_csv(rec.path("snapshots.csv"), traj);
        rec.add("snapshots.csv");
    }
    const auto r = index_returns(traj, s.return_lag);
    {
        CsvWriter w(rec.path("returns.csv"), {"t", "return"});
        for (std::size_t k = 0; k < r.size(); ++k) w.row({traj.times[k + s.return_lag], r[k]});
        w.close();
    }
    rec.add("returns.csv");

    const auto sum = summarize_returns(traj, s.return_lag, s.acf_lags, s.vol_window);
    json j;
    j["samples"] = sum.samples;
    j["return_lag"] = s.return_lag;
    j["excess_kurtosis"] = nullable(sum.excess_kurtosis);
    if (!sum.excess_kurtosis) j["excess_kurtosis_note"] = "undefined: index returns have zero variance";
    json acf = json::array();
    for (std::size_t i = 0; i < sum.acf_lags.size(); ++i) {
        acf.push_back({{"lag", sum.acf_lags[i]}, {"value", nullable(sum.abs_return_acf[i])}});
    }
    j["abs_return_acf"] = acf;
    if (config.model.coupling.hebbian_p > 0) {
        j["overlap_vol_corr"] = nullable(sum.overlap_vol_corr);
        j["vol_window"] = s.vol_window;
    }
    j["mean_magnetization"] = sum.mean_magnetization;
    write_json(rec, "summary.json", j);
    rec.add("summary.json");
    rec.write_manifest();
    return rec.files();
}

std::vector<std::string> cmd_meanfield(const RunConfig& config) {
    RunRecord rec("meanfield", config);
    const auto& mf = config.meanfield;
    const auto t0 = std::chrono::steady_clock::now();

    if (mf.mode == "solve") {
        const auto grid = ThetaGrid::build(config.model, mf.grid);
        const auto op = solve_fixed_point(config.model, mf.u0, grid, mf.ctrl);
        {
            CsvWriter w(rec.path("order_parameters.csv"),
                        {"u0", "m", "q", "chi", "Chat0", "iterations", "residual"});
            w.row({op.u0, op.m, op.q, op.chi, op.Chat0, static_cast<double>(op.iterations), op.residual});
            w.close();
        }
        rec.add("order_parameters.csv");
        if (!op.tau.empty()) {
            CsvWriter w(rec.path("q_tau.csv"), {"tau", "q_tau"});
            for (std::size_t i = 0; i < op.tau.size(); ++i) w.row({op.tau[i], op.q_tau[i]});
            w.close();
            rec.add("q_tau.csv");
        }
        write_json(rec, "order_parameters.json", op_json(op));
        rec.add("order_parameters.json");
    } else if (mf.mode == "u0_curve") {
        const auto u0s = linspace(mf.u0_min, mf.u0_max, mf.u0_points);
        std::vector<std::vector<OrderParameters>> curves(mf.kappa0_list.size());
        parallel_for(mf.kappa0_list.size(), config.workers, [&](std::size_t c) {
            const auto p = with_kappa0(config.model, mf.kappa0_list[c]);
            const auto grid = ThetaGrid::build(p, mf.grid);
            SolveControl ctrl = mf.ctrl;
            for (double u0 : u0s) {
                auto op = solve_fixed_point(p, u0, grid, ctrl);
                ctrl.init = op;
                curves[c].push_back(std::move(op));
            }
        });
        CsvWriter w(rec.path("u0_curve.csv"), {"kappa0", "u0", "m", "q", "chi", "Chat0"});
        for (std::size_t c = 0; c < curves.size(); ++c) {
            for (const auto& op : curves[c]) w.row({mf.kappa0_list[c], op.u0, op.m, op.q, op.chi, op.Chat0});
        }
        w.close();
        rec.add("u0_curve.csv");
    } else {
        PhaseScanOptions o;
        o.axis = mf.scan_axis == "J0" ? ScanAxis::J0 : ScanAxis::kappa0;
        o.lo = mf.scan_lo;
        o.hi = mf.scan_hi;
        o.resolution = mf.scan_points;
        o.ctrl = mf.ctrl;
        o.grid = mf.grid;
        o.workers = config.workers;
        ModelParams p = config.model;
        const auto res = phase_scan(p, o);
        json errors = json::array();
        {
            CsvWriter w(rec.path("phase_scan.csv"), {mf.scan_axis, "m", "q", "chi", "Chat0", "converged"});
            for (const auto& pt : res.points) {
                if (pt.op) {
                    w.row({pt.axis_value, pt.op->m, pt.op->q, pt.op->chi, pt.op->Chat0, 1.0});
                } else {
                    w.raw_row({format17(pt.axis_value), "", "", "", "", "0"});
                    errors.push_back({{mf.scan_axis, pt.axis_value}, {"error", pt.error}});
                }
            }
            w.close();
        }
        rec.add("phase_scan.csv");
        {
            CsvWriter w(rec.path("boundary.csv"), {"kappa0", "J0c"});
            for (const auto& b : res.boundary) {
                if (b.J0c) {
                    w.row({b.kappa0, *b.J0c});
                } else {
                    w.raw_row({format17(b.kappa0), ""});
                    errors.push_back({{"kappa0", b.kappa0}, {"error", b.error}});
                }
            }
            w.close();
        }
        rec.add("boundary.csv");
        write_json(rec, "phase_scan.json", {{"axis", mf.scan_axis}, {"errors", errors}});
        rec.add("phase_scan.json");
    }
    rec.stage("meanfield", seconds_since(t0));
    rec.write_manifest();
    return rec.files();
}

std::vector<std::string> cmd_returns(const RunConfig& config) {
    RunRecord rec("returns", config);
    const auto& rc = config.returns;
    const auto& p = config.model;
    const double sigma = p.sigma;
    const double width = sigma / std::sqrt(p.kappa_dist.scale());
    const auto t0 = std::chrono::steady_clock::now();
    json j;
    j["regime"] = rc.regime;

    auto need_gamma = [&] {
        if (p.kappa_dist.is_fixed()) throw ConfigError("returns: regime '" + rc.regime + "' needs kappa_law = gamma");
    };

    if (rc.regime == "quasi_stationary") {
        const double k = p.kappa_dist.is_fixed() ? p.kappa_dist.kappa : p.kappa_dist.kappa0;
        const double var_closed = p.kappa_dist.is_fixed() ? sigma * sigma / k * (-std::expm1(-k * rc.tau))
                                                          : qs_return_variance(rc.tau, p);
        const double half = rc.du_max > 0.0 ? rc.du_max : 6.0 * std::sqrt(var_closed);
        const auto grid = symmetric_grid(half, rc.points);
        const auto c = qs_return_pdf(grid, rc.tau, p);
        const double sd = sigma * std::sqrt(rc.tau);
        CsvWriter w(rec.path("returns.csv"), {"du", "pdf", "pdf_gaussian"});
        double worst = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double g = normal_pdf(grid[i], 0.0, sd);
            w.row({grid[i], c.density[i], g});
            if (std::abs(grid[i]) <= 4.0 * sd) worst = std::max(worst, std::abs(c.density[i] / g - 1.0));
        }
        w.close();
        rec.add("returns.csv");
        j["tau"] = rc.tau;
        j["variance_closed"] = var_closed;
        j["variance_grid"] = c.variance();
        const bool applies = k * rc.tau <= 1e-3;
        j["gaussian_check"] = {{"kappa_tau", k * rc.tau},
                               {"applies", applies},
                               {"max_rel_diff", worst},
                               {"threshold", 0.01},
                               {"passed", applies && worst < 0.01}};
    } else if (rc.regime == "asymptotic" || rc.regime == "tail_compare") {
        need_gamma();
        const double half = rc.du_max > 0.0 ? rc.du_max : 5.0 * width;
        const auto grid = symmetric_grid(half, rc.points);
        const auto a = qs_return_pdf_asymptotic(grid, p);
        if (rc.regime == "asymptotic") {
            CsvWriter w(rec.path("returns.csv"), {"du", "pdf_asymptotic"});
            for (std::size_t i = 0; i < grid.size(); ++i) w.row({grid[i], a.density[i]});
            w.close();
        } else {
            const auto n = qs_return_pdf(grid, rc.tau, p);
            CsvWriter w(rec.path("returns.csv"), {"du", "pdf_numeric", "pdf_asymptotic"});
            double worst = 0.0;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                w.row({grid[i], n.density[i], a.density[i]});
                if (std::abs(grid[i]) <= 5.0 * width) worst = std::max(worst, std::abs(n.density[i] / a.density[i] - 1));
            }
            w.close();
            j["tau"] = rc.tau;
            j["kappa0_tau"] = p.kappa_dist.kappa0 * rc.tau;
            j["max_rel_gap"] = worst;
        }
        rec.add("returns.csv");
    } else {
        const auto scale = rc.regime == "intermediate" ? SlowScale::intermediate : SlowScale::long_time;
        SlowReturnOptions o;
        o.n_u0 = rc.n_u0;
        o.grid = config.meanfield.grid;
        o.workers = config.workers;
        const auto g = ThetaGrid::build(p, o.grid);
        const auto table =
            op_table(p, linspace(-rc.table_u0_max, rc.table_u0_max, rc.table_points), g, config.meanfield.ctrl);
        rec.stage("op_table", seconds_since(t0));
        const double half = rc.du_max > 0.0 ? rc.du_max : 100.0 * width;
        const auto grid = symmetric_grid(half, rc.points);
        const auto res = slow_return_pdf(grid, scale, rc.tau, p, table, o);
        CsvWriter w(rec.path("returns.csv"), {"du", "pdf"});
        for (std::size_t i = 0; i < grid.size(); ++i) w.row({grid[i], res.curve.density[i]});
        w.close();
        rec.add("returns.csv");
        {
            CsvWriter t(rec.path("op_table.csv"), {"u0", "m", "q", "chi", "Chat0"});
            for (const auto& op : table.ops) t.row({op.u0, op.m, op.q, op.chi, op.Chat0});
            t.close();
        }
        rec.add("op_table.csv");
        if (scale == SlowScale::intermediate) {
            j["tau"] = rc.tau;
            j["r"] = std::exp(-p.gamma * rc.tau);
        }
        j["mass_on_grid"] = res.curve.integral();
        j["max_q_rel_diff"] = res.max_q_rel_diff;
        j["neglected_rms"] = res.neglected_rms;
        j["flagged_weight"] = res.flagged_weight;
    }
    rec.stage("returns", seconds_since(t0));
    write_json(rec, "returns_summary.json", j);
    rec.add("returns_summary.json");
    rec.write_manifest();
    return rec.files();
}

std::vector<std::string> cmd_pricing(const RunConfig& config) {
    RunRecord rec("pricing", config);
    const auto& pc = config.pricing;
    const auto& p = config.model;
    const auto grid = symmetric_grid(pc.ubar_max, pc.points);
    const auto t0 = std::chrono::steady_clock::now();
    json j;
    j["variant"] = pc.variant;
    j["u0"] = pc.u0;

    if (pc.variant == "noninteracting") {
        if (p.kappa_dist.is_fixed()) throw ConfigError("pricing: noninteracting variant needs kappa_law = gamma");
        const auto closed = noninteracting_pricing_pdf_closed(grid, p, pc.u0);
        const auto quad = noninteracting_pricing_pdf_quadrature(grid, p, pc.u0);
        CsvWriter w(rec.path("pricing.csv"), {"ubar", "pdf_closed", "pdf_quadrature"});
        double worst = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            w.row({grid[i], closed.density[i], quad.density[i]});
            worst = std::max(worst, std::abs(closed.density[i] - quad.density[i]));
        }
        w.close();
        j["max_abs_diff"] = worst;
        j["mass_on_grid"] = closed.integral();
    } else {
        const auto g = ThetaGrid::build(p, config.meanfield.grid);
        const auto op = solve_fixed_point(p, pc.u0, g, config.meanfield.ctrl);
        rec.stage("solve", seconds_since(t0));
        j["order_parameters"] = op_json(op);
        DensityCurve inter, bare;
        if (pc.variant == "interacting") {
            const auto res = interacting_pricing_pdf(grid, op, p, pc.u0, pc.kappa);
            inter = res.curve;
            bare.grid = grid;
            const double sI = std::sqrt(p.sigma_I2);
            for (double u : grid) {
                bare.density.push_back(normal_pdf(u, (p.I0 + p.sigma0 * pc.u0) / pc.kappa, sI / pc.kappa));
            }
            j["kappa"] = pc.kappa;
            j["renormalization"] = res.renormalization;
            j["gap"] = res.gap ? json::array({res.gap->first, res.gap->second}) : json(nullptr);
        } else {
            inter = market_pricing_pdf(grid, p, pc.u0, op, config.workers);
            bare = market_pricing_pdf(grid, p, pc.u0, std::nullopt, config.workers);
            j["kappa"] = "averaged";
        }
        CsvWriter w(rec.path("pricing.csv"), {"ubar", "pdf_interacting", "pdf_noninteracting"});
        for (std::size_t i = 0; i < grid.size(); ++i) w.row({grid[i], inter.density[i], bare.density[i]});
        w.close();
        j["variance_interacting"] = inter.variance();
        j["variance_noninteracting"] = bare.variance();
        j["skewness_interacting"] = inter.skewness();
        j["skewness_noninteracting"] = bare.skewness();
        j["mass_on_grid_interacting"] = inter.integral();
        j["mass_on_grid_noninteracting"] = bare.integral();
    }
    rec.add("pricing.csv");
    rec.stage("pricing", seconds_since(t0));
    write_json(rec, "pricing.json", j);
    rec.add("pricing.json");
    rec.write_manifest();
    return rec.files();
}

bool cmd_validate(const RunConfig& config, bool print) {
    RunRecord rec("validate", config);
    AcceptanceOptions o;
    o.seed = config.seed;
    o.workers = config.workers;
    o.scratch = rec.path("determinism");
    const auto results = run_acceptance(o, [&](const CriterionResult& r) {
        rec.stage("criterion_" + std::to_string(r.id), r.seconds);
        if (print) std::printf("%s\n", format_result_line(r).c_str());
        std::fflush(stdout);
    });
    write_file_atomic(rec.path("validation_report.json"), report_json(results, config.seed));
    rec.add("validation_report.json");
    rec.write_manifest();
    for (const auto& r : results) {
        if (!r.passed) return false;
    }
    return true;
}

}  // namespace igbm::app
