#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <span>
#include <string>
#include <vector>

#include "pncp/em.hpp"
#include "pncp/gibbs.hpp"
#include "pncp/model.hpp"
#include "pncp/vb.hpp"
#include "pncp/workparam.hpp"

namespace py = pybind11;
using namespace pncp;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::span<const double> view(const Array& a) {
  if (a.ndim() != 1) throw std::invalid_argument("expected a 1-d array");
  return {a.data(), static_cast<std::size_t>(a.shape(0))};
}

Array to_array(const std::vector<double>& v) { return Array(static_cast<py::ssize_t>(v.size()), v.data()); }

Parametrization make_par(double a, const Array& w) {
  const auto s = view(w);
  return {a, std::vector<double>(s.begin(), s.end())};
}

std::vector<double> column(const FitReport& r, double IterationRecord::*field) {
  std::vector<double> out;
  for (const IterationRecord& it : r.trajectory) out.push_back(it.*field);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "AR(1)-plus-noise model: partially noncentered EM, Gibbs and VB";

  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init([](double mu, double sigma_eta_sq, double sigma_eps_sq, double phi) {
             ModelParams p{mu, sigma_eta_sq, sigma_eps_sq, phi};
             p.validate();
             return p;
           }),
           py::arg("mu") = 0.0, py::arg("sigma_eta_sq") = 1.0, py::arg("sigma_eps_sq") = 1.0, py::arg("phi") = 0.0)
      .def_readwrite("mu", &ModelParams::mu)
      .def_readwrite("sigma_eta_sq", &ModelParams::sigma_eta_sq)
      .def_readwrite("sigma_eps_sq", &ModelParams::sigma_eps_sq)
      .def_readwrite("phi", &ModelParams::phi)
      .def_property_readonly("gamma", &ModelParams::gamma)
      .def("__repr__", [](const ModelParams& p) { return "ModelParams" + to_string(p); });

  py::class_<FitReport>(m, "FitReport")
      .def_readonly("iterations", &FitReport::iterations)
      .def_property_readonly("converged",
                             [](const FitReport& r) { return r.terminated_by == Termination::tolerance; })
      .def_readonly("final", &FitReport::final)
      .def_readonly("final_loglik", &FitReport::final_loglik)
      .def_readonly("cycle_loglik", &FitReport::cycle_loglik)
      .def_readonly("warnings", &FitReport::warnings)
      .def_property_readonly("loglik", [](const FitReport& r) { return to_array(column(r, &IterationRecord::loglik)); })
      .def_property_readonly("mu", [](const FitReport& r) {
        std::vector<double> v;
        for (const IterationRecord& it : r.trajectory) v.push_back(it.theta.mu);
        return to_array(v);
      });

  m.def(
      "simulate",
      [](const ModelParams& p, std::size_t n, std::uint64_t seed) { return to_array(simulate(p, n, seed)); },
      py::arg("params"), py::arg("n"), py::arg("seed"));
  m.def(
      "log_likelihood", [](const ModelParams& p, const Array& y) { return log_likelihood(p, view(y)); },
      py::arg("params"), py::arg("y"));

  m.def(
      "w_opt_location", [](const ModelParams& p, std::size_t n) { return to_array(w_opt_location(p, n)); },
      py::arg("params"), py::arg("n"));
  m.def(
      "bounds",
      [](const ModelParams& p) {
        const Bounds b = corollary1_bounds(p);
        return py::make_tuple(b.low, b.high);
      },
      py::arg("params"));
  m.def("a_hat_asymptotic", &a_hat_asymptotic, py::arg("gamma"), py::arg("phi"));
  m.def(
      "scale_opt",
      [](const Array& y, const ModelParams& p) {
        const ScaleScheme s = scale_opt(view(y), p);
        py::dict d;
        d["a_opt"] = s.a_opt;
        d["w_opt"] = to_array(s.w_opt);
        d["a_hat"] = s.a_hat;
        d["a_approx"] = s.a_approx;
        return d;
      },
      py::arg("y"), py::arg("params"));
  m.def(
      "rate_location", [](const ModelParams& p, const Array& w) { return rate_location(p, view(w)); },
      py::arg("params"), py::arg("w"));

  m.def(
      "e_step",
      [](const Array& y, const ModelParams& p, double a, const Array& w) {
        const SmoothedMoments s = e_step(view(y), p, make_par(a, w));
        py::dict d;
        d["m"] = to_array(s.m);
        d["v_diag"] = to_array(s.v_diag);
        d["v_offdiag"] = to_array(s.v_offdiag);
        return d;
      },
      py::arg("y"), py::arg("params"), py::arg("a"), py::arg("w"));

  m.def(
      "algorithm1",
      [](const Array& y, double init_mu, const ModelParams& known, const std::string& scheme, double tol,
         int max_iter) {
        return algorithm1(view(y), init_mu, known, parse_mean_scheme(scheme), {tol, max_iter});
      },
      py::arg("y"), py::arg("init_mu"), py::arg("known"), py::arg("scheme") = "partial", py::arg("tol") = 1e-8,
      py::arg("max_iter") = 10000);
  m.def(
      "algorithm2",
      [](const Array& y, double init_sigma_eta_sq, const ModelParams& known, const std::string& scheme, double tol,
         int max_iter) {
        return algorithm2(view(y), init_sigma_eta_sq, known, parse_scale_scheme(scheme), {tol, max_iter});
      },
      py::arg("y"), py::arg("init_sigma_eta_sq"), py::arg("known"), py::arg("scheme") = "partial",
      py::arg("tol") = 1e-8, py::arg("max_iter") = 10000);
  m.def(
      "algorithm3",
      [](const Array& y, std::optional<ModelParams> init, const std::string& cycle1, const std::string& cycle2,
         const std::string& cycle3, double tol, int max_iter) {
        const auto s = view(y);
        const Algorithm3Schemes schemes{parse_mean_scheme(cycle1), parse_cycle2_scheme(cycle2),
                                        parse_scale_scheme(cycle3)};
        return algorithm3(s, init ? *init : default_init(s), schemes, {tol, max_iter});
      },
      py::arg("y"), py::arg("init") = py::none(), py::arg("cycle1") = "partial", py::arg("cycle2") = "noncentered",
      py::arg("cycle3") = "partial", py::arg("tol") = 1e-8, py::arg("max_iter") = 10000);

  m.def(
      "vb_fit",
      [](const Array& y, const ModelParams& p, double a, const Array& w, double tol) {
        const VbState s = vb_fit(view(y), p, make_par(a, w), tol);
        py::dict d;
        d["m_mu"] = s.m_mu;
        d["var_mu"] = s.var_mu;
        d["m_alpha"] = to_array(s.m_alpha);
        d["sweeps"] = s.sweeps;
        d["converged"] = s.converged;
        return d;
      },
      py::arg("y"), py::arg("params"), py::arg("a"), py::arg("w"), py::arg("tol") = 1e-10);

  m.def(
      "gibbs_chain",
      [](const Array& y, const ModelParams& p, double a, const Array& w, int n_iter, int burnin,
         std::uint64_t seed) { return to_array(run_chain(view(y), p, make_par(a, w), n_iter, burnin, seed).mu_draws); },
      py::arg("y"), py::arg("params"), py::arg("a"), py::arg("w"), py::arg("n_iter"), py::arg("burnin"),
      py::arg("seed"));
  m.def(
      "lag1_autocorr",
      [](const Array& draws) {
        const auto s = view(draws);
        Chain c;
        c.mu_draws.assign(s.begin(), s.end());
        return lag1_autocorr(c);
      },
      py::arg("draws"));
}
