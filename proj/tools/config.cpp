#include "config.hpp"

#include "igbm/error.hpp"
#include "igbm/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

namespace igbm::app {

namespace {

namespace pt = boost::property_tree;

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        return parse_double(v);
    } catch (const Error&) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
}

long long to_int(const std::string& key, const std::string& v) {
    long long out = 0;
    const auto* end = v.data() + v.size();
    const auto r = std::from_chars(v.data(), end, out);
    if (r.ec != std::errc() || r.ptr != end) throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto* end = v.data() + v.size();
    const auto r = std::from_chars(v.data(), end, out);
    if (r.ec != std::errc() || r.ptr != end) {
        throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
    }
    return out;
}

int to_int32(const std::string& key, const std::string& v) {
    const long long x = to_int(key, v);
    if (x < -2147483647LL || x > 2147483647LL) throw ConfigError(key + ": integer out of range");
    return static_cast<int>(x);
}

template <class T, class F>
std::vector<T> to_list(const std::string& key, const std::string& v, F conv) {
    std::vector<T> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError(key + ": empty list entry");
        out.push_back(conv(key, item));
    }
    if (out.empty()) throw ConfigError(key + ": list must not be empty");
    return out;
}

template <class T, class F>
std::string join(const std::vector<T>& xs, F fmt) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + fmt(xs[i]);
    return s;
}

std::string fmt_opt(const std::optional<double>& x) { return x ? format17(*x) : std::string{}; }

std::string choice(const std::string& key, const std::string& v, std::initializer_list<const char*> allowed) {
    std::string all;
    for (const char* a : allowed) {
        if (v == a) return v;
        all += std::string(all.empty() ? "" : ", ") + a;
    }
    throw ConfigError(key + ": '" + v + "' is not one of " + all);
}

struct Key {
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&, const std::string&)> set;
};

using Table = std::vector<std::pair<std::string, Key>>;  // "section.key" in output order

#define DBL(path, field)                                                                              \
    {path, {[](const RunConfig& c) { return format17(c.field); },                                    \
            [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_double(k, v); }}}
#define INT(path, field)                                                                              \
    {path, {[](const RunConfig& c) { return std::to_string(c.field); },                              \
            [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_int32(k, v); }}}

const Table& table() {
    static const Table t = {
        {"run.seed", {[](const RunConfig& c) { return std::to_string(c.seed); },
                      [](RunConfig& c, const std::string& k, const std::string& v) { c.seed = to_u64(k, v); }}},
        INT("run.workers", workers),
        {"run.out", {[](const RunConfig& c) { return c.out; },
                     [](RunConfig& c, const std::string& k, const std::string& v) {
                         if (v.empty()) throw ConfigError(k + ": must not be empty");
                         c.out = v;
                     }}},

        INT("model.N", model.coupling.N),
        {"model.mean_degree",
         {[](const RunConfig& c) { return fmt_opt(c.model.coupling.mean_degree); },
          [](RunConfig& c, const std::string& k, const std::string& v) {
              c.model.coupling.mean_degree = v.empty() ? std::nullopt : std::optional(to_double(k, v));
          }}},
        DBL("model.J0", model.coupling.J0),
        DBL("model.J", model.coupling.J),
        DBL("model.alpha", model.coupling.alpha),
        INT("model.hebbian_p", model.coupling.hebbian_p),
        DBL("model.I0", model.I0),
        DBL("model.sigma_I2", model.sigma_I2),
        DBL("model.sigma", model.sigma),
        DBL("model.sigma0", model.sigma0),
        DBL("model.gamma", model.gamma),
        {"model.kappa_law",
         {[](const RunConfig& c) { return std::string(c.model.kappa_dist.is_fixed() ? "fixed" : "gamma"); },
          [](RunConfig& c, const std::string& k, const std::string& v) {
              c.model.kappa_dist.kind = choice(k, v, {"gamma", "fixed"}) == "fixed"
                                            ? KappaDistribution::Kind::fixed
                                            : KappaDistribution::Kind::gamma_dist;
          }}},
        DBL("model.kappa0", model.kappa_dist.kappa0),
        DBL("model.nu", model.kappa_dist.nu),
        DBL("model.kappa", model.kappa_dist.kappa),
        DBL("model.kappa_floor_factor", model.kappa_floor_factor),

        DBL("simulate.dt", simulate.schedule.dt),
        DBL("simulate.t_warmup", simulate.schedule.t_warmup),
        DBL("simulate.t_max", simulate.schedule.t_max),
        INT("simulate.record_stride", simulate.schedule.record_stride),
        {"simulate.clamp_u0",
         {[](const RunConfig& c) { return fmt_opt(c.simulate.schedule.clamp_u0); },
          [](RunConfig& c, const std::string& k, const std::string& v) {
              c.simulate.schedule.clamp_u0 = v.empty() ? std::nullopt : std::optional(to_double(k, v));
          }}},
        INT("simulate.snapshot_every", simulate.schedule.snapshot_every),
        INT("simulate.return_lag", simulate.return_lag),
        {"simulate.acf_lags",
         {[](const RunConfig& c) { return join(c.simulate.acf_lags, [](int x) { return std::to_string(x); }); },
          [](RunConfig& c, const std::string& k, const std::string& v) {
              c.simulate.acf_lags = to_list<int>(k, v, to_int32);
          }}},
        INT("simulate.vol_window", simulate.vol_window),

        {"meanfield.mode", {[](const RunConfig& c) { return c.meanfield.mode; },
                            [](RunConfig& c, const std::string& k, const std::string& v) {
                                c.meanfield.mode = choice(k, v, {"solve", "u0_curve", "phase_scan"});
                            }}},
        DBL("meanfield.u0", meanfield.u0),
        DBL("meanfield.damping", meanfield.ctrl.damping),
        DBL("meanfield.tol", meanfield.ctrl.tol),
        INT("meanfield.max_iter", meanfield.ctrl.max_iter),
        INT("meanfield.n_z", meanfield.grid.n_z),
        INT("meanfield.n_kappa", meanfield.grid.n_kappa),
        INT("meanfield.n_x", meanfield.grid.n_x),
        INT("meanfield.n_tau", meanfield.grid.n_tau),
        {"meanfield.fast_noise",
         {[](const RunConfig& c) {
              return std::string(c.meanfield.grid.fast_noise == FastNoiseAverage::reduced ? "reduced"
                                                                                          : "x_quadrature");
          },
          [](RunConfig& c, const std::string& k, const std::string& v) {
              c.meanfield.grid.fast_noise = choice(k, v, {"reduced", "x_quadrature"}) == "reduced"
                                                ? FastNoiseAverage::reduced
                                                : FastNoiseAverage::x_quadrature;
          }}},
        {"meanfield.kappa0_list",
         {[](const RunConfig& c) { return join(c.meanfield.kappa0_list, [](double x) { return format17(x); }); },
          [](RunConfig& c, const std::string& k, const std::string& v) {
              c.meanfield.kappa0_list = to_list<double>(k, v, to_double);
          }}},
        DBL("meanfield.u0_min", meanfield.u0_min),
        DBL("meanfield.u0_max", meanfield.u0_max),
        INT("meanfield.u0_points", meanfield.u0_points),
        {"meanfield.scan_axis", {[](const RunConfig& c) { return c.meanfield.scan_axis; },
                                 [](RunConfig& c, const std::string& k, const std::string& v) {
                                     c.meanfield.scan_axis = choice(k, v, {"J0", "kappa0"});
                                 }}},
        DBL("meanfield.scan_lo", meanfield.scan_lo),
        DBL("meanfield.scan_hi", meanfield.scan_hi),
        INT("meanfield.scan_points", meanfield.scan_points),

        {"returns.regime",
         {[](const RunConfig& c) { return c.returns.regime; },
          [](RunConfig& c, const std::string& k, const std::string& v) {
              c.returns.regime = choice(k, v, {"quasi_stationary", "asymptotic", "tail_compare", "intermediate", "long"});
          }}},
        DBL("returns.tau", returns.tau),
        DBL("returns.du_max", returns.du_max),
        INT("returns.points", returns.points),
        INT("returns.n_u0", returns.n_u0),
        INT("returns.table_points", returns.table_points),
        DBL("returns.table_u0_max", returns.table_u0_max),

        {"pricing.variant", {[](const RunConfig& c) { return c.pricing.variant; },
                             [](RunConfig& c, const std::string& k, const std::string& v) {
                                 c.pricing.variant = choice(k, v, {"noninteracting", "interacting", "market"});
                             }}},
        DBL("pricing.u0", pricing.u0),
        DBL("pricing.kappa", pricing.kappa),
        DBL("pricing.ubar_max", pricing.ubar_max),
        INT("pricing.points", pricing.points),
    };
    return t;
}

#undef DBL
#undef INT

const Key* find_key(const std::string& path) {
    for (const auto& [p, k] : table()) {
        if (p == path) return &k;
    }
    return nullptr;
}

}  // namespace

void RunConfig::validate() const {
    auto need = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    need(workers >= 1, "run.workers: must be at least 1");
    try {
        model.validate();
        simulate.schedule.validate(model);
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
    need(simulate.return_lag >= 1, "simulate.return_lag: must be at least 1");
    for (int l : simulate.acf_lags) need(l >= 1, "simulate.acf_lags: lags must be at least 1");
    need(simulate.vol_window >= 2, "simulate.vol_window: must be at least 2");
    need(meanfield.ctrl.damping > 0.0 && meanfield.ctrl.damping <= 1.0, "meanfield.damping: must lie in (0, 1]");
    need(meanfield.ctrl.tol > 0.0, "meanfield.tol: must be positive");
    need(meanfield.ctrl.max_iter >= 1, "meanfield.max_iter: must be at least 1");
    need(meanfield.grid.n_z >= 2 && meanfield.grid.n_kappa >= 2 && meanfield.grid.n_x >= 2,
         "meanfield.n_z, n_kappa, n_x: must be at least 2");
    need(meanfield.grid.n_tau >= 0, "meanfield.n_tau: must be non-negative");
    for (double k : meanfield.kappa0_list) need(k > 0.0, "meanfield.kappa0_list: entries must be positive");
    need(meanfield.u0_max > meanfield.u0_min, "meanfield.u0_max: must exceed u0_min");
    need(meanfield.u0_points >= 2, "meanfield.u0_points: must be at least 2");
    need(meanfield.scan_hi > meanfield.scan_lo, "meanfield.scan_hi: must exceed scan_lo");
    need(meanfield.scan_points >= 2, "meanfield.scan_points: must be at least 2");
    need(returns.tau > 0.0, "returns.tau: must be positive");
    need(returns.du_max >= 0.0, "returns.du_max: must be non-negative");
    need(returns.points >= 3, "returns.points: must be at least 3");
    need(returns.n_u0 >= 2, "returns.n_u0: must be at least 2");
    need(returns.table_points >= 3, "returns.table_points: must be at least 3");
    need(returns.table_u0_max >= 4.0, "returns.table_u0_max: must be at least 4");
    need(pricing.kappa > 0.0, "pricing.kappa: must be positive");
    need(pricing.ubar_max > 0.0, "pricing.ubar_max: must be positive");
    need(pricing.points >= 3, "pricing.points: must be at least 3");
}

RunConfig parse_config(const std::string& text) {
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    RunConfig c;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) {
            throw ConfigError("config: key '" + section + "' appears outside a section");
        }
        for (const auto& [key, value] : body) {
            const std::string path = section + "." + key;
            const Key* k = find_key(path);
            if (!k) throw ConfigError("config: unknown key '" + key + "' in section [" + section + "]");
            k->set(c, path, trim(value.get_value<std::string>()));
        }
    }
    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error& e) {
        throw ConfigError(std::string("config: cannot read ") + path.string() + ": " + e.what());
    }
    return parse_config(text);
}

std::string serialize_config(const RunConfig& config) {
    std::string out, current;
    for (const auto& [path, k] : table()) {
        const auto dot = path.find('.');
        const std::string section = path.substr(0, dot);
        if (section != current) {
            out += (current.empty() ? "[" : "\n[") + section + "]\n";
            current = section;
        }
        out += path.substr(dot + 1) + " = " + k.get(config) + "\n";
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [path, k] : table()) out.emplace_back(path, k.get(config));
    return out;
}

void set_config_value(RunConfig& config, const std::string& path, const std::string& value) {
    const Key* k = find_key(path);
    if (!k) throw ConfigError("config: unknown key '" + path + "'");
    k->set(config, path, trim(value));
    config.validate();
}

bool operator==(const RunConfig& a, const RunConfig& b) { return serialize_config(a) == serialize_config(b); }

}  // namespace igbm::app
