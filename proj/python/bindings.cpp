#include "nonloc/commands.hpp"
#include "nonloc/constants.hpp"
#include "nonloc/corrector.hpp"
#include "nonloc/homogenize.hpp"
#include "nonloc/oracle.hpp"
#include "nonloc/parallel.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace nonloc;

namespace {

EffectiveMatrix effective(const Kernel& a, const Modulation& mu, int N, const std::string& method) {
  const Truncation t(N, a.dimension());
  if (method == "corrector") return effective_matrix_corrector(a, mu, t);
  if (method == "hessian") return effective_matrix_hessian(a, mu, t);
  if (method == "contour") return effective_matrix_contour(a, mu, t);
  throw InvalidArgument("unknown method '" + method + "'");
}

double measured_gap(const Kernel& a, const Modulation& mu, int N) {
  const Truncation t(N, a.dimension());
  return spectral_data(assemble_matrix(a, mu, Vec::Zero(t.dim), t), 2).gap();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Nonlocal periodic homogenization toolkit";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<NonPositiveLowerBound>(m, "NonPositiveLowerBound", base.ptr());
  py::register_exception<GapTooSmall>(m, "GapTooSmall", base.ptr());
  py::register_exception<L2NormUnavailable>(m, "L2NormUnavailable", base.ptr());
  py::register_exception<SolverError>(m, "SolverError", base.ptr());

  m.def("set_threads", &set_thread_count, py::arg("k"));

  py::class_<Kernel>(m, "Kernel")
      .def_static("gaussian", &Kernel::gaussian, py::arg("dimension"), py::arg("sigma"), py::arg("mass") = 1.0)
      .def_static("ball", &Kernel::ball, py::arg("radius"), py::arg("mass") = 1.0)
      .def_static("sampled", &Kernel::sampled, py::arg("support"), py::arg("samples"), py::arg("l2_data") = true)
      .def_property_readonly("dimension", &Kernel::dimension)
      .def("value", &Kernel::value)
      .def("fourier", &Kernel::fourier)
      .def("symbol", &Kernel::symbol)
      .def("l1_norm", &Kernel::l1_norm)
      .def("l2_norm", &Kernel::l2_norm)
      .def("moments", [](const Kernel& a) {
        const auto& mo = a.moments();
        return py::dict(py::arg("M1") = mo.m1, py::arg("M2") = mo.m2, py::arg("M3") = mo.m3,
                        py::arg("second") = mo.second);
      });

  py::class_<Modulation>(m, "Modulation")
      .def_static("constant", &Modulation::constant, py::arg("dimension"), py::arg("value"))
      .def_static("cosine_product", &Modulation::cosine_product, py::arg("dimension"), py::arg("amplitude"),
                  py::arg("axis") = 0, py::arg("grid_per_dim") = 0)
      .def_property_readonly("dimension", &Modulation::dimension)
      .def_property_readonly("lower", &Modulation::lower)
      .def_property_readonly("upper", &Modulation::upper)
      .def("__call__", &Modulation::evaluate, py::arg("x"), py::arg("y"));

  py::class_<EffectiveMatrix>(m, "EffectiveMatrix")
      .def_readonly("g0", &EffectiveMatrix::g0)
      .def_readonly("min_eigenvalue", &EffectiveMatrix::min_eigenvalue)
      .def_readonly("symmetry_defect", &EffectiveMatrix::symmetry_defect)
      .def_readonly("warnings", &EffectiveMatrix::warnings)
      .def_property_readonly("method", [](const EffectiveMatrix& e) { return method_name(e.method); });
  m.def("effective_matrix", &effective, py::arg("kernel"), py::arg("modulation"), py::arg("N"),
        py::arg("method") = "corrector");

  m.def("fiber_matrix", [](const Kernel& a, const Modulation& mu, const Vec& xi, int N) {
    return assemble_matrix(a, mu, xi, Truncation(N, a.dimension()));
  }, py::arg("kernel"), py::arg("modulation"), py::arg("xi"), py::arg("N"));
  m.def("measured_gap", &measured_gap, py::arg("kernel"), py::arg("modulation"), py::arg("N"));

  py::class_<GapChain>(m, "GapChain")
      .def_readonly("d0", &GapChain::d0)
      .def_readonly("delta0", &GapChain::delta0)
      .def_readonly("C1", &GapChain::C1)
      .def_readonly("C2", &GapChain::C2)
      .def_readonly("S", &GapChain::S)
      .def_readonly("calC", &GapChain::calC);
  py::class_<ConstantChain>(m, "ConstantChain")
      .def_readonly("mu_minus", &ConstantChain::mu_minus)
      .def_readonly("mu_plus", &ConstantChain::mu_plus)
      .def_readonly("big_M", &ConstantChain::big_M)
      .def_readonly("A_pi", &ConstantChain::A_pi)
      .def_readonly("C_a", &ConstantChain::C_a)
      .def_readonly("certified", &ConstantChain::certified)
      .def_readonly("empirical", &ConstantChain::empirical);
  m.def("constants", [](const Kernel& a, const Modulation& mu, std::optional<double> gap) {
    return threshold_chain(a, mu, gap);
  }, py::arg("kernel"), py::arg("modulation"), py::arg("measured_gap") = py::none());
  m.def("A_r", [](const Kernel& a, double r) { return A_r(a, r).value; }, py::arg("kernel"), py::arg("r"));

  m.def("fiber_discrepancy", [](const Kernel& a, const Modulation& mu, const Mat& g0, const Vec& xi, double eps, int N) {
    return fiber_discrepancy(a, mu, g0, xi, eps, Truncation(N, a.dimension()));
  }, py::arg("kernel"), py::arg("modulation"), py::arg("g0"), py::arg("xi"), py::arg("eps"), py::arg("N"));

  py::class_<SweepRow>(m, "SweepRow")
      .def_readonly("eps", &SweepRow::eps)
      .def_readonly("D", &SweepRow::D)
      .def_readonly("ratio", &SweepRow::ratio)
      .def_readonly("certified_bound", &SweepRow::certified_bound)
      .def_readonly("bound_pass", &SweepRow::bound_pass)
      .def_readonly("argmax", &SweepRow::argmax);
  py::class_<SweepResult>(m, "SweepResult")
      .def_readonly("rows", &SweepResult::rows)
      .def_readonly("slope", &SweepResult::slope)
      .def_readonly("calC", &SweepResult::calC)
      .def("ratio_spread", &SweepResult::ratio_spread)
      .def("csv", &SweepResult::csv);
  m.def("discrepancy_sweep", [](const Kernel& a, const Modulation& mu, const std::vector<double>& eps, int N,
                                int grid_per_dim, int fit_points) {
    const Truncation t(N, a.dimension());
    const Mat g0 = effective_matrix_corrector(a, mu, t).g0;
    const ConstantChain chain = threshold_chain(a, mu, measured_gap(a, mu, N));
    SweepOptions o;
    o.grid_per_dim = grid_per_dim;
    o.fit_points = fit_points;
    py::gil_scoped_release release;
    return discrepancy_sweep(a, mu, g0, eps, t, chain, o);
  }, py::arg("kernel"), py::arg("modulation"), py::arg("eps"), py::arg("N"), py::arg("grid_per_dim") = 0,
     py::arg("fit_points") = 5);

  py::class_<SolvePairResult>(m, "SolvePairResult")
      .def_readonly("error_norm", &SolvePairResult::error_norm)
      .def_readonly("relative_error", &SolvePairResult::relative_error)
      .def_readonly("rhs_norm", &SolvePairResult::rhs_norm)
      .def_readonly("bound", &SolvePairResult::bound);
  m.def("solve_pair_bump", [](const Kernel& a, const Modulation& mu, double eps, int N, const Vec& center,
                              double width, double amplitude) {
    const Truncation t(N, a.dimension());
    const Mat g0 = effective_matrix_corrector(a, mu, t).g0;
    const ConstantChain chain = threshold_chain(a, mu, measured_gap(a, mu, N));
    return solve_pair(a, mu, g0, GaussianBump{center, width, amplitude}, eps, t, &chain);
  }, py::arg("kernel"), py::arg("modulation"), py::arg("eps"), py::arg("N"), py::arg("center"),
     py::arg("width") = 1.0, py::arg("amplitude") = 1.0);

  m.def("galerkin_vs_realspace", [](const Kernel& a, const Modulation& mu, const Vec& xi, int N, int G,
                                    unsigned seed) {
    return galerkin_vs_realspace(a, mu, xi, Truncation(N, a.dimension()), make_cell_grid(a, G), seed);
  }, py::arg("kernel"), py::arg("modulation"), py::arg("xi"), py::arg("N"), py::arg("grid"), py::arg("seed") = 1);

  m.def("run_command", [](const std::string& name, const std::string& config_json, const std::filesystem::path& out) {
    const CommandResult r = run_command(name, parse_config(config_json), out);
    return py::make_tuple(r.exit_code, r.report.dump(), r.files);
  }, py::arg("command"), py::arg("config_json"), py::arg("out_dir"),
     "Runs a CLI command in-process. Returns (exit_code, report_json, files).");
  m.attr("SCHEMA_VERSION") = kSchemaVersion;
}
