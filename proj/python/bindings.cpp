#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fama/analytic.hpp"
#include "fama/correlation.hpp"
#include "fama/error.hpp"
#include "fama/montecarlo.hpp"
#include "fama/quadrature.hpp"
#include "fama/specfun.hpp"

namespace py = pybind11;
using namespace fama;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Outage probability and multiplexing gain of FAMA over block-correlated Nakagami-m fading";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

  m.def("bessel_j0", &specfun::bessel_j0, py::arg("x"));
  m.def("bessel_i_scaled", &specfun::bessel_i_scaled, py::arg("nu"), py::arg("x"));
  m.def("marcum_q", &specfun::marcum_q, py::arg("nu"), py::arg("a"), py::arg("b"));
  m.def("reg_inc_beta", &specfun::reg_inc_beta, py::arg("x"), py::arg("a"), py::arg("b"));
  m.def("gauss_laguerre_rule",
        [](double alpha, int order) {
          auto r = specfun::gauss_laguerre_rule(alpha, order);
          return py::make_tuple(r.nodes, r.weights);
        },
        py::arg("alpha"), py::arg("order"), "(nodes, weights) of the rule for x^alpha e^-x");

  py::enum_<correlation::CorrelationModel>(m, "CorrelationModel")
      .value("jakes", correlation::CorrelationModel::jakes)
      .value("constant", correlation::CorrelationModel::constant);

  py::class_<correlation::BlockStructure>(m, "BlockStructure")
      .def(py::init<>())
      .def_readwrite("lengths", &correlation::BlockStructure::lengths)
      .def_readwrite("delta", &correlation::BlockStructure::delta)
      .def_readwrite("rho_th", &correlation::BlockStructure::rho_th)
      .def_readonly("eigenvalues_used", &correlation::BlockStructure::eigenvalues_used)
      .def_property_readonly("B", &correlation::BlockStructure::count)
      .def_property_readonly("ports", &correlation::BlockStructure::ports)
      .def("__repr__", [](const correlation::BlockStructure& b) {
        return "BlockStructure(B=" + std::to_string(b.count()) + ", N=" + std::to_string(b.ports()) + ")";
      });

  m.def("jakes_eigenvalues",
        [](int N, double W) {
          correlation::CorrelationSpec spec{correlation::CorrelationModel::jakes, N, W, 0.0};
          return correlation::symmetric_eigenvalues(correlation::jakes_matrix(spec));
        },
        py::arg("N"), py::arg("W"));
  m.def("resolve_blocks",
        [](int N, double W, double delta, double rho_th, correlation::CorrelationModel model, double mu) {
          return correlation::resolve_blocks({model, N, W, mu}, delta, rho_th);
        },
        py::arg("N"), py::arg("W"), py::arg("delta") = correlation::kDefaultDelta,
        py::arg("rho_th") = correlation::kDefaultRhoTh, py::arg("model") = correlation::CorrelationModel::jakes,
        py::arg("mu") = 0.0);
  m.def("aperture_mean_correlation", &correlation::aperture_mean_correlation, py::arg("W"));

  py::class_<analytic::SystemConfig>(m, "SystemConfig")
      .def(py::init(&analytic::SystemConfig::uniform), py::arg("users"), py::arg("m"), py::arg("gamma"),
           py::arg("ports") = 2, py::arg("aperture") = 1.0)
      .def_readwrite("users", &analytic::SystemConfig::users)
      .def_readwrite("m", &analytic::SystemConfig::m)
      .def_readwrite("interferer_orders", &analytic::SystemConfig::interferer_orders)
      .def_readwrite("gamma", &analytic::SystemConfig::gamma)
      .def_readwrite("ports", &analytic::SystemConfig::ports)
      .def_readwrite("aperture", &analytic::SystemConfig::aperture);

  py::enum_<analytic::Method>(m, "Method")
      .value("exact", analytic::Method::exact_integral)
      .value("quad", analytic::Method::quadrature)
      .value("ub", analytic::Method::upper_bound)
      .value("mc", analytic::Method::monte_carlo);

  py::class_<analytic::OutageEstimate>(m, "OutageEstimate")
      .def_readonly("value", &analytic::OutageEstimate::value)
      .def_readonly("error", &analytic::OutageEstimate::error)
      .def_readonly("method", &analytic::OutageEstimate::method)
      .def_readonly("meta", &analytic::OutageEstimate::meta)
      .def("__float__", [](const analytic::OutageEstimate& e) { return e.value; });

  m.def("db_to_linear", &analytic::db_to_linear, py::arg("db"));
  m.def("g_kernel", &analytic::g_kernel, py::arg("gamma"), py::arg("r"), py::arg("r_tilde"), py::arg("delta"),
        py::arg("m"), py::arg("U_tilde"));
  m.def("single_port_op", &analytic::single_port_op, py::arg("gamma"), py::arg("m"), py::arg("shape"));
  m.def("op_upper_bound", &analytic::op_upper_bound, py::arg("gamma"), py::arg("m"), py::arg("shape"),
        py::arg("blocks"));
  m.def("fast_params",
        [](const std::vector<int>& orders) {
          auto fp = analytic::fast_params(orders);
          return py::dict(py::arg("U_tilde") = fp.U_tilde, py::arg("m_tilde") = fp.m_tilde,
                          py::arg("U_hat") = fp.U_hat, py::arg("m_tilde_int") = fp.m_tilde_int());
        },
        py::arg("interferer_orders"));

  auto options = [](double rel_tol, int n) {
    analytic::FastOptions o;
    o.exact.rel_tol = rel_tol;
    o.n_I = n;
    o.n_J = n;
    return o;
  };
  m.def("op_slow",
        [options](const analytic::SystemConfig& cfg, const correlation::BlockStructure& b, analytic::Method method,
                  double rel_tol, int n) { return analytic::op_slow(cfg, b, method, options(rel_tol, n)); },
        py::arg("cfg"), py::arg("blocks"), py::arg("method") = analytic::Method::quadrature,
        py::arg("rel_tol") = 1e-8, py::arg("n") = analytic::kDefaultQuadratureOrder,
        py::call_guard<py::gil_scoped_release>());
  m.def("op_fast",
        [options](const analytic::SystemConfig& cfg, const correlation::BlockStructure& b, analytic::Method method,
                  double rel_tol, int n) { return analytic::op_fast(cfg, b, method, options(rel_tol, n)); },
        py::arg("cfg"), py::arg("blocks"), py::arg("method") = analytic::Method::quadrature,
        py::arg("rel_tol") = 1e-8, py::arg("n") = analytic::kDefaultQuadratureOrder,
        py::call_guard<py::gil_scoped_release>());

  m.def("mux_gain", &analytic::mux_gain, py::arg("users"), py::arg("p_out"));
  m.def("ofama_gain", &analytic::ofama_gain, py::arg("users"), py::arg("pool"), py::arg("p_out"));
  m.def("ofama_gain_approx", &analytic::ofama_gain_approx, py::arg("users"), py::arg("pool"), py::arg("p_out"));

  py::enum_<montecarlo::Mode>(m, "McMode")
      .value("slow", montecarlo::Mode::slow)
      .value("fast_composite", montecarlo::Mode::fast_composite)
      .value("fast_nakagami_approx", montecarlo::Mode::fast_nakagami_approx);

  m.def("estimate_op",
        [](const analytic::SystemConfig& cfg, const correlation::BlockStructure& b, std::uint64_t trials,
           std::uint64_t seed, montecarlo::Mode mode, unsigned threads) {
          return montecarlo::estimate_op(cfg, b, {trials, seed, mode, threads});
        },
        py::arg("cfg"), py::arg("blocks"), py::arg("trials") = 100000, py::arg("seed") = 1,
        py::arg("mode") = montecarlo::Mode::slow, py::arg("threads") = 0, py::call_guard<py::gil_scoped_release>());
}
