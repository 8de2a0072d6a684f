// Python bindings for the main operations: model constants, the stationary
// (FDT) solvers, the two-time integrator, the non-crossing kernel, and the
// finite-N Langevin oracle.
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pspin/accept.hpp"
#include "pspin/critical.hpp"
#include "pspin/fdt.hpp"
#include "pspin/langevin.hpp"
#include "pspin/noncrossing.hpp"
#include "pspin/twotime.hpp"
#include "pspin/version.hpp"

namespace py = pybind11;
using namespace pspin;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

Mixture mixture_from_terms(const std::vector<std::pair<int, double>>& terms) {
  std::vector<MixtureTerm> ts;
  ts.reserve(terms.size());
  for (const auto& [p, a] : terms) ts.push_back({p, a});
  return Mixture(ts);
}

py::array_t<double> dense_square(const TriangularField& f) {
  const int n = f.n();
  py::array_t<double> out({n + 1, n + 1});
  auto view = out.mutable_unchecked<2>();
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) view(i, j) = f.sym(i, j);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.attr("__version__") = PSPIN_VERSION;

  py::register_exception<error>(m, "PspinError");

  py::class_<Mixture>(m, "Mixture")
      .def(py::init(&mixture_from_terms), py::arg("terms"))
      .def_static("pure", &Mixture::pure, py::arg("p"), py::arg("a"))
      .def("nu", &Mixture::nu, py::arg("r"), py::arg("order") = 0)
      .def("psi", &Mixture::psi, py::arg("r"))
      .def_property_readonly("max_p", &Mixture::max_p)
      .def_property_readonly("terms", [](const Mixture& mx) {
        std::vector<std::pair<int, double>> out;
        for (const auto& t : mx.terms()) out.emplace_back(t.p, t.a);
        return out;
      });

  py::class_<SoftPotential>(m, "SoftPotential")
      .def(py::init<double, int>(), py::arg("L"), py::arg("k") = 1)
      .def("f", &SoftPotential::f, py::arg("r"), py::arg("order") = 0)
      .def_readonly("L", &SoftPotential::L)
      .def_readonly("k", &SoftPotential::k);

  m.def("beta_c", [](const Mixture& mx, double tol) {
    const auto r = beta_c(mx, tol);
    return py::make_tuple(r.beta_c, r.x_star);
  }, py::arg("mixture"), py::arg("tol") = 1e-12);
  m.def("q_of_beta", [](const Mixture& mx, double beta, double tol) {
    const auto r = q_of_beta(mx, beta, tol);
    return py::make_tuple(r.q, r.trivial);
  }, py::arg("mixture"), py::arg("beta"), py::arg("tol") = 1e-12);
  m.def("gamma_of_beta", &gamma_of_beta, py::arg("mixture"), py::arg("beta"),
        py::arg("tol") = 1e-12);
  m.def("critical_profile", [](const Mixture& mx, double beta, double tol) {
    const auto c = critical_profile(mx, beta, tol);
    py::dict d;
    d["beta"] = c.beta;
    d["beta_c"] = c.beta_c;
    d["x_star"] = c.x_star;
    d["q"] = c.q;
    d["q_is_trivial"] = c.q_is_trivial;
    d["gamma"] = c.gamma;
    d["d_infinity"] = c.d_infinity;
    d["i_gamma"] = c.i_gamma;
    d["criterion_sufficient"] = c.decay.criterion_sufficient;
    d["criterion_necessary"] = c.decay.criterion_necessary;
    return d;
  }, py::arg("mixture"), py::arg("beta"), py::arg("tol") = 1e-12);

  m.def("catalan", &catalan, py::arg("n"));
  m.def("enumerate_nc", [](int n) {
    std::vector<std::vector<std::pair<int, int>>> out;
    for (auto& s : enumerate_nc(n)) out.push_back(std::move(s.pairs));
    return out;
  }, py::arg("n"));

  m.def("h_kernel",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> C, double delta,
           const Mixture& mx, double beta, const std::string& method, int n_max) {
          const auto view = C.unchecked<2>();
          require(view.shape(0) == view.shape(1) && view.shape(0) >= 2,
                  errc::invalid_argument, "h_kernel: C must be a square matrix");
          const int n = static_cast<int>(view.shape(0)) - 1;
          TriangularField field(n, delta);
          for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= i; ++j) field.at(i, j) = view(i, j);
          const HKernel k = method == "series" ? h_series_kernel(field, mx, beta, n_max)
                                               : h_ode(field, mx, beta);
          py::dict d;
          d["H"] = dense_square(k.H);
          d["tail_bound"] = k.tail_bound;
          if (k.truncation_order) d["truncation_order"] = *k.truncation_order;
          return d;
        },
        py::arg("C"), py::arg("delta"), py::arg("mixture"), py::arg("beta"),
        py::arg("method") = "ode", py::arg("n_max") = 8,
        "renormalized response kernel of a sampled correlation (lower triangle is read)");

  m.def("solve_fdt",
        [](const Mixture& mx, double beta, double delta, double horizon, py::object gamma,
           double b, const std::string& method) {
          const double g = gamma.is_none() ? std::numeric_limits<double>::quiet_NaN()
                                           : gamma.cast<double>();
          const auto p = FdtProblem::from_mixture(mx, beta, delta, horizon, g, b);
          const FdtSolution sol =
              method == "fixed-point" ? solve_fixed_point(p) : solve_direct(p);
          py::dict d;
          d["tau"] = to_array([&] {
            std::vector<double> t(sol.D.size());
            for (std::size_t i = 0; i < t.size(); ++i) t[i] = i * sol.delta;
            return t;
          }());
          d["D"] = to_array(sol.D);
          d["Dprime"] = to_array(sol.Dprime);
          d["mu"] = sol.mu;
          d["d_infinity"] = sol.d_inf;
          d["iterations"] = sol.iterations;
          d["method"] = method;
          return d;
        },
        py::arg("mixture"), py::arg("beta"), py::arg("delta") = 1e-3,
        py::arg("horizon") = 0.0, py::arg("gamma") = py::none(), py::arg("b") = 0.5,
        py::arg("method") = "direct");

  py::class_<TwoTimeGrid>(m, "TwoTimeGrid")
      .def_property_readonly("n", [](const TwoTimeGrid& g) { return g.n; })
      .def_property_readonly("delta", [](const TwoTimeGrid& g) { return g.delta; })
      .def_property_readonly("horizon", [](const TwoTimeGrid& g) { return g.horizon; })
      .def_property_readonly("beta", [](const TwoTimeGrid& g) { return g.beta; })
      .def_property_readonly("K", [](const TwoTimeGrid& g) { return to_array(g.K); })
      .def_property_readonly("mu", [](const TwoTimeGrid& g) { return to_array(g.mu); })
      .def("C", [](const TwoTimeGrid& g) { return dense_square(g.C); },
           "correlation as a dense symmetric matrix")
      .def("R", [](const TwoTimeGrid& g) {
        const int n = g.n;
        py::array_t<double> out({n + 1, n + 1});
        auto view = out.mutable_unchecked<2>();
        for (int i = 0; i <= n; ++i)
          for (int j = 0; j <= n; ++j) view(i, j) = j <= i ? g.R.at(i, j) : 0.0;
        return out;
      }, "response as a dense matrix, zero above the diagonal")
      .def("section", [](const TwoTimeGrid& g, double t, double tau_max) {
        const auto s = fdt_section(g, t, tau_max);
        return py::make_tuple(to_array(s.tau), to_array(s.C), to_array(s.R));
      }, py::arg("t"), py::arg("tau_max"));

  m.def("solve_spherical", &solve_spherical, py::arg("mixture"), py::arg("beta"),
        py::arg("delta"), py::arg("horizon"));
  m.def("solve_soft", &solve_soft, py::arg("mixture"), py::arg("beta"), py::arg("potential"),
        py::arg("K0"), py::arg("delta"), py::arg("horizon"));
  m.def("apply_psi", &apply_psi, py::arg("grid"), py::arg("mixture"), py::arg("beta"));
  m.def("response_bound_check", [](const TwoTimeGrid& g) {
    const auto r = response_bound_check(g);
    return py::make_tuple(r.worst_ratio, r.s, r.t1, r.t2);
  }, py::arg("grid"));
  m.def("fdt_violation", [](const TwoTimeGrid& g, const Mixture& mx, double beta,
                            double window, double t_min) {
    const auto d = fdt_violation(g, mx, beta, window, t_min);
    py::dict out;
    out["rho"] = d.rho;
    out["i_hat"] = d.i_hat;
    out["diag_identity_sup"] = d.diag_identity_sup;
    out["g_sup_window"] = d.g_sup_window;
    return out;
  }, py::arg("grid"), py::arg("mixture"), py::arg("beta"), py::arg("window") = 3.0,
     py::arg("t_min") = 5.0);
  m.def("save_checkpoint", &save_checkpoint, py::arg("grid"), py::arg("path"));
  m.def("load_checkpoint", &load_checkpoint, py::arg("path"));

  m.def("simulate",
        [](const Mixture& mx, double beta, const SoftPotential& pot, int N, double dt,
           double horizon, int replicas, std::uint64_t seed, int save_stride, int threads) {
          LangevinConfig cfg;
          cfg.N = N;
          cfg.dt = dt;
          cfg.horizon = horizon;
          cfg.replicas = replicas;
          cfg.seed = seed;
          cfg.save_stride = save_stride;
          cfg.threads = threads;
          const auto run = simulate(mx, beta, pot, cfg);
          py::dict d;
          d["times"] = to_array(run.times);
          d["C_mean"] = to_array(run.C_mean);
          d["C_se"] = to_array(run.C_se);
          d["chi_mean"] = to_array(run.chi_mean);
          d["chi_se"] = to_array(run.chi_se);
          return d;
        },
        py::arg("mixture"), py::arg("beta"), py::arg("potential"), py::arg("N"),
        py::arg("dt") = 2e-3, py::arg("horizon") = 3.0, py::arg("replicas") = 4,
        py::arg("seed") = 1, py::arg("save_stride") = 50, py::arg("threads") = 1);

  m.def("run_acceptance", [](const std::string& level) {
    std::vector<py::dict> out;
    accept::run_acceptance(level == "full" ? accept::Level::full : accept::Level::quick, {},
                           [&](const accept::CriterionResult& r) {
                             py::dict d;
                             d["id"] = r.id;
                             d["pass"] = r.pass;
                             d["seconds"] = r.seconds;
                             d["details"] = r.details;
                             out.push_back(std::move(d));
                           });
    return out;
  }, py::arg("level") = "quick");
}
