#include "igbm/couplings.hpp"
#include "igbm/error.hpp"
#include "igbm/meanfield.hpp"
#include "igbm/params.hpp"
#include "igbm/pricing.hpp"
#include "igbm/returns.hpp"
#include "igbm/simulator.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace igbm;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vec(const Array& a) {
    if (a.ndim() != 1) throw ParameterError("expected a one-dimensional grid");
    return {a.data(), a.data() + a.size()};
}

Array to_array(const std::vector<double>& v) {
    Array out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

SolveControl control(double damping, double tol, int max_iter) {
    SolveControl c;
    c.damping = damping;
    c.tol = tol;
    c.max_iter = max_iter;
    return c;
}

}  // namespace

PYBIND11_MODULE(_igbm, m) {
    m.doc() = "Interacting geometric Brownian motion: simulation, mean-field theory, return and price laws";

    static py::exception<Error> base_exc(m, "Error");
    static py::exception<ParameterError> param_exc(m, "ParameterError", PyExc_ValueError);
    static py::exception<NumericalError> num_exc(m, "NumericalError", base_exc.ptr());
    static py::exception<ConvergenceError> conv_exc(m, "ConvergenceError", num_exc.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ConvergenceError& e) {
            py::set_error(conv_exc, e.what());
        } catch (const ParameterError& e) {
            py::set_error(param_exc, e.what());
        } catch (const NumericalError& e) {
            py::set_error(num_exc, e.what());
        } catch (const Error& e) {
            py::set_error(base_exc, e.what());
        }
    });

    py::class_<CouplingSpec>(m, "CouplingSpec")
        .def(py::init<>())
        .def_readwrite("N", &CouplingSpec::N)
        .def_readwrite("mean_degree", &CouplingSpec::mean_degree)
        .def_readwrite("J0", &CouplingSpec::J0)
        .def_readwrite("J", &CouplingSpec::J)
        .def_readwrite("alpha", &CouplingSpec::alpha)
        .def_readwrite("hebbian_p", &CouplingSpec::hebbian_p);

    py::class_<KappaDistribution>(m, "KappaDistribution")
        .def_static("gamma", &KappaDistribution::gamma, py::arg("kappa0"), py::arg("nu") = 1.0)
        .def_static("fixed", &KappaDistribution::fixed_at, py::arg("kappa"))
        .def_property_readonly("is_fixed", &KappaDistribution::is_fixed)
        .def_readonly("kappa0", &KappaDistribution::kappa0)
        .def_readonly("nu", &KappaDistribution::nu)
        .def_readonly("kappa", &KappaDistribution::kappa)
        .def("pdf", &KappaDistribution::pdf);

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init<>())
        .def_readwrite("coupling", &ModelParams::coupling)
        .def_readwrite("I0", &ModelParams::I0)
        .def_readwrite("sigma_I2", &ModelParams::sigma_I2)
        .def_readwrite("sigma", &ModelParams::sigma)
        .def_readwrite("sigma0", &ModelParams::sigma0)
        .def_readwrite("gamma", &ModelParams::gamma)
        .def_readwrite("kappa_dist", &ModelParams::kappa_dist)
        .def_readwrite("kappa_floor_factor", &ModelParams::kappa_floor_factor)
        .def("validate", &ModelParams::validate);

    py::class_<ThetaGridOptions>(m, "GridOptions")
        .def(py::init<>())
        .def_readwrite("n_z", &ThetaGridOptions::n_z)
        .def_readwrite("n_kappa", &ThetaGridOptions::n_kappa)
        .def_readwrite("n_x", &ThetaGridOptions::n_x)
        .def_readwrite("n_tau", &ThetaGridOptions::n_tau)
        .def_readwrite("z_max", &ThetaGridOptions::z_max);

    py::class_<OrderParameters>(m, "OrderParameters")
        .def_readonly("m", &OrderParameters::m)
        .def_readonly("q", &OrderParameters::q)
        .def_readonly("chi", &OrderParameters::chi)
        .def_readonly("Chat0", &OrderParameters::Chat0)
        .def_readonly("u0", &OrderParameters::u0)
        .def_readonly("iterations", &OrderParameters::iterations)
        .def_readonly("residual", &OrderParameters::residual)
        .def_property_readonly("tau", [](const OrderParameters& o) { return to_array(o.tau); })
        .def_property_readonly("q_tau", [](const OrderParameters& o) { return to_array(o.q_tau); })
        .def("__repr__", [](const OrderParameters& o) {
            return "OrderParameters(m=" + std::to_string(o.m) + ", q=" + std::to_string(o.q) +
                   ", chi=" + std::to_string(o.chi) + ", Chat0=" + std::to_string(o.Chat0) + ")";
        });

    m.def(
        "solve_fixed_point",
        [](const ModelParams& p, double u0, const ThetaGridOptions& g, double damping, double tol, int max_iter) {
            py::gil_scoped_release release;
            return solve_fixed_point(p, u0, ThetaGrid::build(p, g), control(damping, tol, max_iter));
        },
        py::arg("params"), py::arg("u0") = 0.0, py::arg("grid") = ThetaGridOptions{}, py::arg("damping") = 0.5,
        py::arg("tol") = 1e-10, py::arg("max_iter") = 5000);

    m.def(
        "critical_J0",
        [](const ModelParams& p, const ThetaGridOptions& g) {
            py::gil_scoped_release release;
            return critical_J0(p, ThetaGrid::build(p, g)).J0c;
        },
        py::arg("params"), py::arg("grid") = ThetaGridOptions{});

    m.def(
        "qs_return_pdf", [](const Array& grid, double tau, const ModelParams& p) {
            return to_array(qs_return_pdf(to_vec(grid), tau, p).density);
        },
        py::arg("grid"), py::arg("tau"), py::arg("params"));
    m.def(
        "qs_return_pdf_asymptotic",
        [](const Array& grid, const ModelParams& p) { return to_array(qs_return_pdf_asymptotic(to_vec(grid), p).density); },
        py::arg("grid"), py::arg("params"));
    m.def("qs_return_variance", &qs_return_variance, py::arg("tau"), py::arg("params"));

    m.def(
        "pricing_pdf_closed",
        [](const Array& grid, const ModelParams& p, double u0) {
            return to_array(noninteracting_pricing_pdf_closed(to_vec(grid), p, u0).density);
        },
        py::arg("grid"), py::arg("params"), py::arg("u0") = 0.0);
    m.def(
        "pricing_pdf_quadrature",
        [](const Array& grid, const ModelParams& p, double u0) {
            return to_array(noninteracting_pricing_pdf_quadrature(to_vec(grid), p, u0).density);
        },
        py::arg("grid"), py::arg("params"), py::arg("u0") = 0.0);
    m.def(
        "interacting_pricing_pdf",
        [](const Array& grid, const OrderParameters& op, const ModelParams& p, double u0, double kappa) {
            const auto r = interacting_pricing_pdf(to_vec(grid), op, p, u0, kappa);
            py::object gap = py::none();
            if (r.gap) gap = py::make_tuple(r.gap->first, r.gap->second);
            return py::make_tuple(to_array(r.curve.density), r.renormalization, gap);
        },
        py::arg("grid"), py::arg("op"), py::arg("params"), py::arg("u0"), py::arg("kappa"));
    m.def(
        "market_pricing_pdf",
        [](const Array& grid, const ModelParams& p, double u0, std::optional<OrderParameters> op, int workers) {
            const auto g = to_vec(grid);
            DensityCurve c;
            {
                py::gil_scoped_release release;
                c = market_pricing_pdf(g, p, u0, op, workers);
            }
            return to_array(c.density);
        },
        py::arg("grid"), py::arg("params"), py::arg("u0") = 0.0, py::arg("op") = std::nullopt,
        py::arg("workers") = 1);

    m.def(
        "simulate",
        [](const ModelParams& p, std::uint64_t seed, double dt, double t_max, int record_stride, double t_warmup,
           std::optional<double> clamp_u0) {
            Schedule s;
            s.dt = dt;
            s.t_max = t_max;
            s.record_stride = record_stride;
            s.t_warmup = t_warmup;
            s.clamp_u0 = clamp_u0;
            Trajectory tr;
            {
                py::gil_scoped_release release;
                const RngStream root(seed);
                tr = run(p, build_coupling_matrix(p.coupling, root), s, root);
            }
            py::dict out;
            out["t"] = to_array(tr.times);
            out["u0"] = to_array(tr.u0_series);
            out["index"] = to_array(tr.index_series);
            out["m"] = to_array(tr.magnetization_series);
            py::array_t<double> ov({static_cast<py::ssize_t>(tr.size()), static_cast<py::ssize_t>(tr.p)});
            auto w = ov.mutable_unchecked<2>();
            for (std::size_t k = 0; k < tr.overlap_series.size(); ++k) {
                for (int mu = 0; mu < tr.p; ++mu) w(k, mu) = tr.overlap_series[k][mu];
            }
            out["overlaps"] = ov;
            return out;
        },
        py::arg("params"), py::arg("seed") = 1, py::arg("dt") = 0.01, py::arg("t_max") = 1000.0,
        py::arg("record_stride") = 10, py::arg("t_warmup") = -1.0, py::arg("clamp_u0") = std::nullopt);
}
