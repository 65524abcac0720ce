#include "gclab/commands.hpp"
#include "gclab/eigensys.hpp"
#include "gclab/error.hpp"
#include "gclab/estimator.hpp"
#include "gclab/fieldcalc.hpp"
#include "gclab/manufactured.hpp"
#include "gclab/parallel.hpp"
#include "gclab/solver.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace gclab;

namespace {

// Node values as an (n+1) x (n+1) array indexed [j, i] (x2 rows, x1 columns).
Eigen::MatrixXd field_array(const ScalarField& u) {
  const int n = u.grid().nodes_per_axis();
  Eigen::MatrixXd out(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) out(j, i) = u(i, j);
  return out;
}

ScalarField field_from_array(const Grid2D& grid, const Eigen::MatrixXd& a) {
  const int n = grid.nodes_per_axis();
  if (a.rows() != n || a.cols() != n) throw InputError("field array shape does not match the grid");
  ScalarField u(grid);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) u(i, j) = a(j, i);
  return u;
}

py::array_t<double> tensor(const EigenDerivatives& d, int rank) {
  const py::ssize_t n = d.dim();
  std::vector<py::ssize_t> shape(static_cast<std::size_t>(rank), n);
  py::array_t<double> out(shape);
  double* p = out.mutable_data();
  const int ni = static_cast<int>(n);
  for (int i = 0; i < ni; ++i)
    for (int q = 0; q < ni; ++q) {
      if (rank == 2) {
        *p++ = d.d_lambda(i, q);
        continue;
      }
      for (int r = 0; r < ni; ++r) {
        if (rank == 3) {
          *p++ = d.d_tau(i, q, r);
          continue;
        }
        for (int s = 0; s < ni; ++s) {
          if (rank == 4) {
            *p++ = d.d2_lambda(i, q, r, s);
            continue;
          }
          for (int t = 0; t < ni; ++t) *p++ = d.d2_tau(i, q, r, s, t);
        }
      }
    }
  return out;
}

py::dict derivatives_dict(const EigenDerivatives& d) {
  py::dict out;
  out["d_lambda"] = tensor(d, 2);
  out["d_tau"] = tensor(d, 3);
  out["d2_lambda"] = tensor(d, 4);
  out["d2_tau"] = tensor(d, 5);
  return out;
}

SolverConfig solver_config(int max_iterations, double tolerance, const std::string& guess, double amplitude,
                           std::uint64_t seed) {
  SolverConfig c;
  c.max_iterations = max_iterations;
  c.residual_tolerance = tolerance;
  c.initial_guess = parse_initial_guess(guess);
  c.perturbation_amplitude = amplitude;
  c.seed = seed;
  return c;
}

py::dict solution_dict(const ProblemSpec& spec, const SolutionState& s) {
  py::dict out;
  out["u"] = field_array(s.u);
  out["exact"] = field_array(spec.boundary);
  out["h"] = spec.grid.spacing();
  out["converged"] = s.converged;
  out["status"] = to_string(s.status);
  out["detail"] = s.detail;
  out["iterations"] = s.iterations;
  out["residual_norm"] = s.residual_norm;
  out["convexity_margin"] = s.convexity_margin;
  out["m"] = spec.m;
  out["M"] = spec.M;
  return out;
}

}  // namespace

PYBIND11_MODULE(_gclab, m) {
  m.doc() = "Finite-difference toolkit for the prescribed Gauss curvature equation";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InputError>(m, "InputError", error.ptr());
  py::register_exception<DegenerateGapError>(m, "DegenerateGapError", error.ptr());
  py::register_exception<DomainError>(m, "DomainError", error.ptr());
  py::register_exception<RangeError>(m, "RangeError", error.ptr());
  py::register_exception<EmptySetError>(m, "EmptySetError", error.ptr());

  m.def(
      "eigen_system",
      [](const Eigen::MatrixXd& w) {
        const EigenSystem es = eigen_system(SymMatrix(w));
        return py::make_tuple(es.values, es.vectors, es.gap);
      },
      py::arg("w"), "Descending eigenvalues, oriented eigenvectors (columns) and the minimum gap.");

  m.def(
      "closed_form_2x2",
      [](const Eigen::MatrixXd& w) {
        const EigenSystem es = closed_form_2x2(SymMatrix(w));
        return py::make_tuple(es.values, es.vectors);
      },
      py::arg("w"));

  m.def(
      "eigen_derivatives",
      [](const Eigen::MatrixXd& w, int k, bool symmetric_pair) {
        const EigenDerivatives d = eigen_derivatives(SymMatrix(w), k);
        return derivatives_dict(symmetric_pair ? symmetric_pair_view(d) : d);
      },
      py::arg("w"), py::arg("k"), py::arg("symmetric_pair") = false,
      "First and second derivatives of lambda_k and tau^k (0-based k).");

  m.def(
      "perturbation_oracle",
      [](const Eigen::MatrixXd& w, int k, double h) { return derivatives_dict(perturbation_oracle(SymMatrix(w), k, h)); },
      py::arg("w"), py::arg("k"), py::arg("h") = 1e-5);

  m.def("manufactured_names", &manufactured_names);

  m.def(
      "solve",
      [](const std::string& name, double radius, int n_cells, int max_iterations, double tolerance,
         const std::string& initial_guess, double amplitude, std::uint64_t seed) {
        const ProblemSpec spec = make_problem(manufactured(name), radius, n_cells);
        SolutionState s = [&] {
          py::gil_scoped_release release;
          return newton_solve(spec, solver_config(max_iterations, tolerance, initial_guess, amplitude, seed));
        }();
        return solution_dict(spec, s);
      },
      py::arg("manufactured") = "cosh", py::arg("R") = 1.0, py::arg("n_cells") = 64, py::arg("max_iterations") = 50,
      py::arg("residual_tolerance") = 1e-10, py::arg("initial_guess") = "exact-perturbed",
      py::arg("perturbation_amplitude") = 0.01, py::arg("seed") = 0);

  m.def(
      "estimate",
      [](const std::string& name, double radius, int n_cells, const Eigen::MatrixXd& u) {
        const ProblemSpec spec = make_problem(manufactured(name), radius, n_cells);
        const AuxiliaryConfig aux = AuxiliaryConfig::standard(radius, spec.m, spec.M);
        const EstimateReport r = bound_report(spec, field_from_array(spec.grid, u), aux);
        py::dict out;
        out["phi_max"] = r.phi_max;
        out["x0"] = py::make_tuple(r.x0.x(0), r.x0.x(1));
        out["rim_adjacent"] = r.x0.rim_adjacent;
        out["eta_lambda1_max"] = r.eta_lambda1_max;
        out["tau_origin"] = Eigen::Vector2d(r.tau_origin);
        out["u_tau_tau_origin"] = r.u_tau_tau_origin;
        out["bound_at_origin"] = r.bound_at_origin;
        out["chain_holds"] = r.chain_holds();
        out["sigma_nodes"] = r.sigma_nodes;
        out["c0"] = r.config.c0;
        out["r_squared"] = r.config.r_squared;
        out["identity_residuals"] = r.identity_residuals;
        return out;
      },
      py::arg("manufactured"), py::arg("R"), py::arg("n_cells"), py::arg("u"),
      "Estimate report for a node field u indexed [j, i].");

  m.def(
      "gradient_bound",
      [](double half_width, const Eigen::MatrixXd& u, double radius) {
        const Grid2D grid(half_width, static_cast<int>(u.rows()) - 1);
        const GradientBoundReport r = gradient_bound_check(field_from_array(grid, u), radius);
        py::dict out;
        out["sup_gradient"] = r.sup_gradient;
        out["bound"] = r.bound;
        out["slack"] = r.slack;
        out["holds"] = r.holds;
        out["convex"] = r.convex;
        return out;
      },
      py::arg("half_width"), py::arg("u"), py::arg("R"));

  m.def(
      "run_command",
      [](const std::string& command, const std::string& config_text, const std::filesystem::path& out_dir,
         std::optional<std::uint64_t> seed) {
        std::ostringstream log;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = run_command({command, config_text, out_dir, seed}, log);
        }
        return py::make_tuple(code, log.str());
      },
      py::arg("command"), py::arg("config"), py::arg("out_dir"), py::arg("seed") = py::none(),
      "Runs a CLI command; returns (exit_code, log).");

  m.def("thread_limit", &thread_limit);
  m.def("set_thread_limit", &set_thread_limit, py::arg("limit"));
}
