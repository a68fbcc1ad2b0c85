#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "mzdual/cli.hpp"
#include "mzdual/errors.hpp"
#include "mzdual/hji.hpp"
#include "mzdual/io.hpp"
#include "mzdual/mz.hpp"
#include "mzdual/repeated.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

using Rows = std::vector<std::vector<double>>;

mzdual::Matrix to_matrix(const Rows& rows) {
  if (rows.empty() || rows[0].empty()) throw mzdual::ValidationError("empty matrix");
  mzdual::Matrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) throw mzdual::ValidationError("ragged matrix");
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

// payoffs[k][l] is the matrix of type pair (k, l).
mzdual::MatrixGameFamily to_family(const std::vector<std::vector<Rows>>& payoffs) {
  if (payoffs.empty() || payoffs[0].empty()) throw mzdual::ValidationError("no payoff matrices");
  const std::size_t nk = payoffs.size(), nl = payoffs[0].size();
  std::vector<mzdual::Matrix> ms;
  for (const auto& row : payoffs) {
    if (row.size() != nl) throw mzdual::ValidationError("every k needs |L| matrices");
    for (const Rows& m : row) ms.push_back(to_matrix(m));
  }
  return mzdual::MatrixGameFamily(nk, nl, std::move(ms));
}

Rows grid_points(const mzdual::SimplexGrid& g) {
  Rows out;
  for (std::size_t i = 0; i < g.size(); ++i) out.push_back(g.point(i));
  return out;
}

std::vector<double> table(const mzdual::ValueTable& t) { return {t.values().begin(), t.values().end()}; }

py::dict report_dict(const mzdual::VerificationReport& r) {
  py::dict out;
  for (const auto& c : r.checks)
    out[py::str(c.name)] = py::dict("value"_a = c.value, "tolerance"_a = c.tolerance,
                                    "passed"_a = c.passed, "witness"_a = c.witness);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Zero-sum games with incomplete information on both sides: Mertens-Zamir and "
            "Hamilton-Jacobi solvers";

  auto base = py::register_exception<mzdual::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<mzdual::ValidationError>(m, "ValidationError", base);
  py::register_exception<mzdual::ConvergenceError>(m, "ConvergenceError", base);
  py::register_exception<mzdual::LpError>(m, "LpError", base);
  py::register_exception<mzdual::NotConcaveError>(m, "NotConcaveError", base);
  auto hypothesis = py::register_exception<mzdual::HypothesisError>(m, "HypothesisError", base);
  py::register_exception<mzdual::IsaacsViolation>(m, "IsaacsViolation", hypothesis);
  py::register_exception<mzdual::CflViolation>(m, "CflViolation", hypothesis);
  py::register_exception<mzdual::DeclaredBoundError>(m, "DeclaredBoundError", hypothesis);

  m.def("solve_matrix_game", [](const Rows& a) {
    const auto s = mzdual::solve_matrix_game(to_matrix(a));
    return py::make_tuple(s.value, s.optimal_row, s.optimal_col);
  }, "a"_a, "Value and optimal mixed strategies (row player maximizes).");

  m.def("nonrevealing_value", [](const std::vector<std::vector<Rows>>& payoffs,
                                 const std::vector<double>& pi) {
    const auto fam = to_family(payoffs);
    return mzdual::nonrevealing_value(fam, mzdual::JointBelief(fam.num_k(), fam.num_l(), pi, 1e-9));
  }, "payoffs"_a, "pi"_a, "u(pi); payoffs[k][l] is a matrix, pi is row-major over (k, l).");

  m.def("cav", [](std::size_t dim, std::size_t m_, const std::vector<double>& values) {
    auto grid = std::make_shared<const mzdual::SimplexGrid>(dim, m_);
    return table(mzdual::cav(mzdual::ValueTable(grid, values)).envelope);
  }, "dim"_a, "m"_a, "values"_a, "Concave envelope of a table on the Delta(dim) grid of resolution m.");

  m.def("simplex_grid", [](std::size_t dim, std::size_t m_) {
    return grid_points(mzdual::SimplexGrid(dim, m_));
  }, "dim"_a, "m"_a, "Points of the grid in canonical order.");

  m.def("solve_mz", [](const std::vector<std::vector<Rows>>& payoffs, std::size_t grid_m,
                       double tol) {
    mzdual::MZConfig c;
    c.grid_m = grid_m;
    c.tol = tol;
    const mzdual::MZSystem sys(to_family(payoffs), grid_m);
    std::optional<mzdual::MZSolution> s;
    {
      py::gil_scoped_release release;
      s = mzdual::solve_mz(sys, c);
    }
    return py::dict("points"_a = grid_points(*sys.grid()), "w"_a = table(s->w),
                    "upper"_a = table(s->upper), "lower"_a = table(s->lower), "u"_a = table(sys.u()),
                    "gap"_a = s->gap, "cav_residual"_a = s->cav_residual,
                    "vex_residual"_a = s->vex_residual,
                    "verification"_a = report_dict(mzdual::verify_mz(s->w, sys)));
  }, "payoffs"_a, "grid_m"_a = 50, "tol"_a = 1e-8);

  m.def("value_sequence", [](const std::vector<std::vector<Rows>>& payoffs,
                             const std::vector<double>& pi, std::size_t n_max) {
    const auto fam = to_family(payoffs);
    const mzdual::JointBelief b(fam.num_k(), fam.num_l(), pi, 1e-9);
    py::gil_scoped_release release;
    return mzdual::value_sequence(fam, b, n_max);
  }, "payoffs"_a, "pi"_a, "n_max"_a, "[v_1, ..., v_n_max] with uniform stage weights.");

  m.def("solve_embedding", [](const std::vector<std::vector<Rows>>& payoffs, double dt, double dx,
                              std::size_t belief_m) {
    const auto fam = to_family(payoffs);
    const mzdual::MayerSpec spec = mzdual::repeated_game_embedding(fam);
    mzdual::HjConfig c;
    c.dt = dt;
    c.dx = dx;
    c.belief_m = belief_m;
    std::optional<mzdual::ValueGrid> g;
    mzdual::VerificationReport r;
    {
      py::gil_scoped_release release;
      g = mzdual::solve_value(spec, c);
      r = mzdual::check_dual_solution(*g, spec);
    }
    const std::size_t z = g->lattice().index_of(spec.z);
    std::vector<double> v(g->beliefs().size());
    for (std::size_t b = 0; b < v.size(); ++b) v[b] = g->at(0, z, b);
    return py::dict("points"_a = grid_points(g->beliefs()), "v"_a = v,
                    "verification"_a = report_dict(r));
  }, "payoffs"_a, "dt"_a = 0.02, "dx"_a = 0.25, "belief_m"_a = 50,
     "V(0, 0, pi) of the repeated game embedded as a differential game.");

  m.def("parse_spec", [](const std::string& text) {
    const auto r = mzdual::io::parse_spec(text);
    return py::make_tuple(r.ok(), r.errors);
  }, "text"_a, "(ok, errors) for a JSON game document.");

  m.def("run", [](const std::string& command, const std::string& spec, const std::string& out,
                  bool verify) {
    mzdual::cli::RunOptions o;
    o.command = command;
    o.spec_path = spec;
    o.out_dir = out;
    o.verify = verify;
    mzdual::cli::RunOutcome r;
    {
      py::gil_scoped_release release;
      r = mzdual::cli::run(o);
    }
    return py::make_tuple(r.exit_code, r.report);
  }, "command"_a, "spec"_a, "out"_a, "verify"_a = false,
     "Runs one CLI command; returns (exit code, JSON report text).");
}
