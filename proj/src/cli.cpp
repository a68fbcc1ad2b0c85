#include "mzdual/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>

#include "json.hpp"
#include "mzdual/errors.hpp"
#include "mzdual/hji.hpp"
#include "mzdual/io.hpp"
#include "mzdual/mz.hpp"
#include "mzdual/repeated.hpp"

namespace mzdual::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

// Everything a command reads and writes.
struct Context {
  const RunOptions& options;
  io::GameSpecFile spec;
  json& report;
  bool checks_failed = false;

  double seconds_since(Clock::time_point start) const {
    return std::chrono::duration<double>(Clock::now() - start).count();
  }
  void timing(const std::string& name, Clock::time_point start) {
    report["timings"][name + "_s"] = seconds_since(start);
  }
  fs::path file(const std::string& name) {
    fs::create_directories(options.out_dir);
    report["files"].push_back(name);
    return options.out_dir / name;
  }
  // Appends a report's checks; they only fail the run under --verify
  // (or unconditionally when `always` is set).
  void add_checks(const VerificationReport& r, const std::string& prefix, bool always = false) {
    for (const Check& c : r.checks) {
      report["verification"].push_back({{"name", prefix + c.name},
                                        {"value", c.value},
                                        {"tolerance", c.tolerance},
                                        {"passed", c.passed},
                                        {"witness", c.witness}});
      if (!c.passed && (options.verify || always)) checks_failed = true;
    }
  }
};

std::vector<double> row_with(std::span<const double> coords, std::initializer_list<double> tail) {
  std::vector<double> row(coords.begin(), coords.end());
  row.insert(row.end(), tail);
  return row;
}

std::vector<std::string> header_with(std::vector<std::string> head,
                                     std::initializer_list<const char*> tail) {
  for (const char* t : tail) head.emplace_back(t);
  return head;
}

GridPtr joint_grid(const Context& ctx) {
  return std::make_shared<const SimplexGrid>(
      ctx.spec.types_k.size() * ctx.spec.types_l.size(), ctx.spec.config.grid_m);
}

MZConfig mz_config(const io::SolverConfig& c) {
  MZConfig m;
  m.grid_m = c.grid_m;
  m.tol = c.tol_mz;
  return m;
}

HjConfig hj_config(const io::SolverConfig& c) {
  HjConfig h;
  h.dt = c.dt;
  h.dx = c.dx;
  h.belief_m = c.grid_m;
  h.seed = c.seed;
  return h;
}

void run_u(Context& ctx) {
  const auto start = Clock::now();
  const MatrixGameFamily family = ctx.spec.family();
  const GridPtr grid = joint_grid(ctx);
  const ValueTable u = nonrevealing_table(family, grid);
  io::CsvTable csv{header_with(ctx.spec.belief_labels(), {"u"}), {}};
  for (std::size_t i = 0; i < grid->size(); ++i)
    csv.rows.push_back(row_with(grid->point(i), {u[i]}));
  csv.write(ctx.file("u.csv"));
  ctx.report["outputs"] = {{"grid_points", grid->size()},
                           {"u_at_belief", nonrevealing_value(family, ctx.spec.belief)}};
  ctx.timing("u", start);
}

struct MzRun {
  std::unique_ptr<MZSystem> system;
  std::unique_ptr<MZSolution> solution;
};

MzRun solve_mz_step(Context& ctx) {
  const auto start = Clock::now();
  MzRun r;
  r.system = std::make_unique<MZSystem>(ctx.spec.family(), ctx.spec.config.grid_m);
  r.solution = std::make_unique<MZSolution>(solve_mz(*r.system, mz_config(ctx.spec.config)));
  ctx.timing("mz", start);
  return r;
}

void run_mz(Context& ctx) {
  MzRun r = solve_mz_step(ctx);
  const MZSolution& s = *r.solution;
  const SimplexGrid& grid = s.w.grid();
  io::CsvTable csv{header_with(ctx.spec.belief_labels(), {"W", "upper", "lower", "u"}), {}};
  for (std::size_t i = 0; i < grid.size(); ++i)
    csv.rows.push_back(row_with(grid.point(i), {s.w[i], s.upper[i], s.lower[i], r.system->u()[i]}));
  csv.write(ctx.file("w.csv"));
  ctx.report["outputs"] = {{"grid_points", grid.size()},
                           {"W_at_belief", s.w.interpolate(ctx.spec.belief)},
                           {"bracket_gap", s.gap},
                           {"upper_iterations", s.upper_iterations},
                           {"lower_iterations", s.lower_iterations},
                           {"cav_residual", s.cav_residual},
                           {"vex_residual", s.vex_residual}};
  const auto start = Clock::now();
  ctx.add_checks(verify_mz(s.w, *r.system), "mz.");
  ctx.timing("verify", start);
}

void run_vn(Context& ctx) {
  const auto start = Clock::now();
  const MatrixGameFamily family = ctx.spec.family();
  const JointBelief pi = ctx.spec.joint_belief();
  lp::Options opts = sequence_form_options();
  opts.pivot_tol = ctx.spec.config.tol_lp;
  io::CsvTable csv{{"stages", "value"}, {}};
  json values = json::array();
  if (ctx.spec.evaluation) {
    const Evaluation theta(*ctx.spec.evaluation);
    const RepeatedSolution s = value_n(family, pi, theta, opts);
    csv.rows.push_back({static_cast<double>(theta.stages()), s.value});
    values.push_back(s.value);
  } else {
    const auto seq = value_sequence(family, pi, ctx.spec.config.horizon, opts);
    for (std::size_t n = 0; n < seq.size(); ++n) {
      csv.rows.push_back({static_cast<double>(n + 1), seq[n]});
      values.push_back(seq[n]);
    }
  }
  csv.write(ctx.file("vn.csv"));
  ctx.report["outputs"] = {{"values", values},
                           {"evaluation", ctx.spec.evaluation ? "given" : "uniform"}};
  ctx.timing("vn", start);
}

struct HjRun {
  MayerSpec game;
  std::unique_ptr<ValueGrid> grid;
};

HjRun solve_hj_step(Context& ctx) {
  const auto start = Clock::now();
  HjRun r{io::build_game(ctx.spec), nullptr};
  r.grid = std::make_unique<ValueGrid>(solve_value(r.game, hj_config(ctx.spec.config)));
  ctx.timing("hj", start);
  return r;
}

void write_hj(Context& ctx, const HjRun& r) {
  const ValueGrid& g = *r.grid;
  const auto& beliefs = g.beliefs();
  const std::size_t z = g.lattice().index_of(r.game.z);
  io::CsvTable initial{header_with(ctx.spec.belief_labels(), {"V"}), {}};
  for (std::size_t b = 0; b < beliefs.size(); ++b)
    initial.rows.push_back(row_with(beliefs.point(b), {g.at(0, z, b)}));
  initial.write(ctx.file("hj.csv"));

  std::vector<std::string> header{"t"};
  for (std::size_t d = 0; d < g.lattice().dimension(); ++d)
    header.push_back("x" + std::to_string(d));
  for (const auto& l : ctx.spec.belief_labels()) header.push_back(l);
  header.push_back("V");
  io::CsvTable full{std::move(header), {}};
  for (std::size_t i = 0; i < g.num_times(); ++i)
    for (std::size_t s = 0; s < g.lattice().size(); ++s) {
      const Point x = g.lattice().point(s);
      for (std::size_t b = 0; b < beliefs.size(); ++b) {
        std::vector<double> row{g.times()[i]};
        row.insert(row.end(), x.begin(), x.end());
        for (std::size_t c = 0; c < beliefs.dimension(); ++c)
          row.push_back(beliefs.coordinate(b, c));
        row.push_back(g.at(i, s, b));
        full.rows.push_back(std::move(row));
      }
    }
  full.write(ctx.file("hj_grid.csv"));

  double courant = 0.0;
  for (double a : g.diffusion()) courant += g.dt() * a / g.lattice().dx();
  std::vector<double> diffusion(g.diffusion().begin(), g.diffusion().end());
  ctx.report["outputs"]["hj"] = {{"time_steps", g.num_times() - 1},
                                 {"lattice_nodes", g.lattice().size()},
                                 {"belief_points", beliefs.size()},
                                 {"diffusion", diffusion},
                                 {"courant", courant},
                                 {"V_at_belief", g.value(0, r.game.z, ctx.spec.belief)}};
}

void run_hj(Context& ctx) {
  const HjRun r = solve_hj_step(ctx);
  write_hj(ctx, r);
  if (ctx.options.verify) {
    const auto start = Clock::now();
    ctx.add_checks(check_dual_solution(*r.grid, r.game), "hj.");
    ctx.timing("verify", start);
  }
}

void run_verify(Context& ctx) {
  const fs::path w_path = ctx.options.out_dir / "w.csv";
  const fs::path hj_path = ctx.options.out_dir / "hj_grid.csv";
  if (!fs::exists(w_path) && !fs::exists(hj_path))
    throw ValidationError("nothing to verify in " + ctx.options.out_dir.string() +
                          " (run mz or hj with the same --out first)");
  const auto labels = ctx.spec.belief_labels();
  auto check_coords = [&](const io::CsvTable& t, std::size_t row, std::span<const double> want,
                          std::size_t first, const std::string& file) {
    for (std::size_t c = 0; c < want.size(); ++c)
      if (std::abs(t.rows[row][first + c] - want[c]) > 1e-12)
        throw ValidationError(file + " row " + std::to_string(row + 1) +
                              " does not match the configured grids");
  };
  if (fs::exists(w_path)) {
    const auto start = Clock::now();
    const io::CsvTable t = io::read_csv(w_path);
    const GridPtr grid = joint_grid(ctx);
    if (t.rows.size() != grid->size())
      throw ValidationError("w.csv has " + std::to_string(t.rows.size()) +
                            " rows; grid_m = " + std::to_string(ctx.spec.config.grid_m) +
                            " needs " + std::to_string(grid->size()));
    const std::size_t wc = t.column("W"), first = t.column(labels.front());
    std::vector<double> w(grid->size());
    for (std::size_t i = 0; i < grid->size(); ++i) {
      check_coords(t, i, grid->point(i), first, "w.csv");
      w[i] = t.rows[i][wc];
    }
    const MZSystem system(ctx.spec.family(), ctx.spec.config.grid_m);
    ctx.add_checks(verify_mz(ValueTable(grid, std::move(w)), system), "mz.", true);
    ctx.timing("verify_mz", start);
  }
  if (fs::exists(hj_path)) {
    const auto start = Clock::now();
    const io::CsvTable t = io::read_csv(hj_path);
    const MayerSpec game = io::build_game(ctx.spec);
    StateLattice lattice = state_box(game, ctx.spec.config.dx);
    const std::size_t steps = step_count(game.t0, ctx.spec.config.dt);
    std::vector<double> times(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i)
      times[i] = game.t0 + (1.0 - game.t0) * static_cast<double>(i) / static_cast<double>(steps);
    const GridPtr beliefs = joint_grid(ctx);
    std::vector<double> a = artificial_diffusion(game, lattice, ctx.spec.config.seed);
    ValueGrid g(std::move(times), std::move(lattice), beliefs, {ctx.spec.types_k.size(),
                ctx.spec.types_l.size()}, std::move(a));
    const std::size_t expect = g.num_times() * g.lattice().size() * beliefs->size();
    if (t.rows.size() != expect)
      throw ValidationError("hj_grid.csv has " + std::to_string(t.rows.size()) +
                            " rows; the configured grids need " + std::to_string(expect));
    const std::size_t vc = t.column("V"), pc = t.column(labels.front());
    std::size_t row = 0;
    for (std::size_t i = 0; i < g.num_times(); ++i)
      for (std::size_t s = 0; s < g.lattice().size(); ++s)
        for (std::size_t b = 0; b < beliefs->size(); ++b, ++row) {
          const double tt[] = {g.times()[i]};
          check_coords(t, row, tt, 0, "hj_grid.csv");
          check_coords(t, row, g.lattice().point(s), 1, "hj_grid.csv");
          check_coords(t, row, beliefs->point(b), pc, "hj_grid.csv");
          g.at(i, s, b) = t.rows[row][vc];
        }
    ctx.add_checks(check_dual_solution(g, game), "hj.", true);
    ctx.timing("verify_hj", start);
  }
}

void run_xcheck(Context& ctx) {
  MzRun mz = solve_mz_step(ctx);
  const HjRun hj = solve_hj_step(ctx);
  const ValueTable& w = mz.solution->w;
  const ValueGrid& g = *hj.grid;
  const std::size_t z = g.lattice().index_of(hj.game.z);
  io::CsvTable csv{header_with(ctx.spec.belief_labels(), {"W", "V_hj", "abs_diff"}), {}};
  double gap = 0.0;
  std::size_t worst = 0;
  for (std::size_t b = 0; b < w.size(); ++b) {
    const double v = g.at(0, z, b), d = std::abs(v - w[b]);
    if (d > gap) {
      gap = d;
      worst = b;
    }
    csv.rows.push_back(row_with(w.grid().point(b), {w[b], v, d}));
  }
  csv.write(ctx.file("xcheck.csv"));
  VerificationReport r;
  r.add("mz_hj_gap", gap, 5e-2, "pi = " + format_point(w.grid().point(worst)));
  ctx.add_checks(r, "xcheck.", true);
  ctx.report["outputs"]["mz_hj_gap"] = gap;
  ctx.report["outputs"]["W_at_belief"] = w.interpolate(ctx.spec.belief);
  ctx.report["outputs"]["V_hj_at_belief"] = g.value(0, hj.game.z, ctx.spec.belief);

  // The repeated game only while its tree stays small.
  const MatrixGameFamily family = ctx.spec.family();
  const double branch = static_cast<double>(family.num_i() * family.num_j());
  std::size_t n_max = 0;
  while (n_max < ctx.spec.config.horizon &&
         std::pow(branch, static_cast<double>(n_max + 1)) *
                 static_cast<double>(family.num_k() * family.num_l()) <= 2e4)
    ++n_max;
  if (n_max > 0) {
    const auto start = Clock::now();
    lp::Options opts = sequence_form_options();
    opts.pivot_tol = ctx.spec.config.tol_lp;
    const auto seq = value_sequence(family, ctx.spec.joint_belief(), n_max, opts);
    ctx.report["outputs"]["vn"] = seq;
    ctx.report["outputs"]["vn_minus_W_at_belief"] = seq.back() - w.interpolate(ctx.spec.belief);
    ctx.timing("vn", start);
  } else {
    ctx.report["outputs"]["vn"] = "skipped: tree too large";
  }
}

json config_json(const io::SolverConfig& c) {
  return {{"grid_m", c.grid_m}, {"dt", c.dt},         {"dx", c.dx},
          {"tol_mz", c.tol_mz}, {"tol_lp", c.tol_lp}, {"seed", c.seed},
          {"horizon", c.horizon}};
}

struct Failure {
  int code;
  const char* kind;
};

Failure classify(const std::exception& e) {
  if (dynamic_cast<const SizeLimitError*>(&e)) return {kExitValidation, "SizeLimitError"};
  if (dynamic_cast<const DomainError*>(&e)) return {kExitValidation, "DomainError"};
  if (dynamic_cast<const ValidationError*>(&e)) return {kExitValidation, "ValidationError"};
  if (dynamic_cast<const ConvergenceError*>(&e)) return {kExitConvergence, "ConvergenceError"};
  if (dynamic_cast<const LpError*>(&e)) return {kExitConvergence, "LpError"};
  if (dynamic_cast<const IsaacsViolation*>(&e)) return {kExitHypothesis, "IsaacsViolation"};
  if (dynamic_cast<const CflViolation*>(&e)) return {kExitHypothesis, "CflViolation"};
  if (dynamic_cast<const DeclaredBoundError*>(&e)) return {kExitHypothesis, "DeclaredBoundError"};
  if (dynamic_cast<const HypothesisError*>(&e)) return {kExitHypothesis, "HypothesisError"};
  if (dynamic_cast<const NotConcaveError*>(&e)) return {kExitChecksFailed, "NotConcaveError"};
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e))
    return {kExitValidation, "FilesystemError"};
  return {kExitChecksFailed, "Error"};
}

}  // namespace

RunOutcome run(const RunOptions& options) {
  const auto start = Clock::now();
  json report = {{"command", options.command},
                 {"files", json::array()},
                 {"verification", json::array()},
                 {"timings", json::object()}};
  RunOutcome out;
  std::vector<std::string> parse_errors;
  try {
    static const char* kCommands[] = {"u", "mz", "vn", "hj", "verify", "xcheck"};
    if (std::find(std::begin(kCommands), std::end(kCommands), options.command) ==
        std::end(kCommands))
      throw ValidationError("unknown command '" + options.command +
                            "' (u, mz, vn, hj, verify, xcheck)");
    const std::string text = io::read_file(options.spec_path);
    report["inputs"] = {{"spec", options.spec_path.string()},
                        {"digest", "fnv1a64:" + io::fnv1a_hex(text)}};
    io::ParseResult parsed = io::parse_spec(text);
    if (!parsed.ok()) {
      parse_errors = parsed.errors;
      throw ValidationError("invalid game spec (" + std::to_string(parse_errors.size()) +
                            " errors)");
    }
    Context ctx{options, std::move(*parsed.spec), report};
    auto& c = ctx.spec.config;
    if (options.grid_m) c.grid_m = *options.grid_m;
    if (options.dt) c.dt = *options.dt;
    if (options.dx) c.dx = *options.dx;
    if (options.seed) c.seed = *options.seed;
    if (options.horizon) c.horizon = *options.horizon;
    if (c.grid_m == 0 || !(c.dt > 0.0) || !(c.dx > 0.0) || c.horizon == 0)
      throw ValidationError("flags: grid-m, dt, dx and horizon must be positive");
    ctx.report["config"] = config_json(c);
    ctx.report["verify"] = options.verify;
    ctx.report["outputs"] = json::object();

    if (options.command == "u") run_u(ctx);
    else if (options.command == "mz") run_mz(ctx);
    else if (options.command == "vn") run_vn(ctx);
    else if (options.command == "hj") run_hj(ctx);
    else if (options.command == "verify") run_verify(ctx);
    else run_xcheck(ctx);

    out.exit_code = ctx.checks_failed ? kExitChecksFailed : kExitOk;
    report["status"] = ctx.checks_failed ? "checks_failed" : "ok";
  } catch (const std::exception& e) {
    const Failure f = classify(e);
    out.exit_code = f.code;
    report["status"] = "error";
    report["error"] = {{"kind", f.kind}, {"message", e.what()}, {"exit_code", f.code}};
    if (!parse_errors.empty()) report["error"]["details"] = parse_errors;
  }
  report["exit_code"] = out.exit_code;
  report["timings"]["total_s"] =
      std::chrono::duration<double>(Clock::now() - start).count();
  out.report = report.dump(2);
  try {
    fs::create_directories(options.out_dir);
    std::ofstream(options.out_dir / "report.json") << out.report << '\n';
  } catch (const std::exception&) {
    // The report still goes to the caller; an unwritable directory is
    // already reflected in the exit code when a command needed it.
  }
  return out;
}

}  // namespace mzdual::cli
