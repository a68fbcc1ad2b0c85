#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mzdual/belief.hpp"
#include "mzdual/differential.hpp"
#include "mzdual/matrix_game.hpp"

namespace mzdual::io {

struct SolverConfig {
  std::size_t grid_m = 50;
  double dt = 1.0 / 50.0;
  double dx = 0.25;
  double tol_mz = 1e-8;
  double tol_lp = 1e-9;
  std::uint64_t seed = 1;
  std::size_t horizon = 4;  // largest n for `vn`
};

// Named built-in dynamics and their parameters.
struct DifferentialBlock {
  std::string dynamics = "payoff-accumulator";  // or "linear", "bilinear"
  Point z;                                       // empty: origin
  std::vector<Point> controls_u, controls_v;     // empty: pure actions
  std::optional<DeclaredBounds> bounds;          // required unless accumulator
  std::optional<ControlMode> mode;
  LinearDynamics linear;                         // "linear" only
};

struct GameSpecFile {
  std::vector<std::string> types_k, types_l, actions_i, actions_j;
  std::vector<Matrix> payoffs;  // index k * |L| + l
  std::vector<double> belief;   // normalized, row-major over (k, l)
  std::optional<std::vector<double>> evaluation;
  std::optional<DifferentialBlock> differential;
  SolverConfig config;

  MatrixGameFamily family() const;
  JointBelief joint_belief() const;
  // "pi[k|l]" per joint coordinate, in grid order.
  std::vector<std::string> belief_labels() const;
};

struct ParseResult {
  std::optional<GameSpecFile> spec;
  std::vector<std::string> errors;  // every problem found, path-addressed
  bool ok() const { return spec.has_value(); }
};

// Parses the JSON game document. Keys: types_k, types_l, actions_i,
// actions_j, payoffs ("k|l" -> matrix as rows or row-major flat list),
// belief, evaluation, differential, config. Missing labels default to a
// single type / to actions inferred from the matrices; a missing belief is
// uniform.
ParseResult parse_spec(std::string_view text);
// Throws ValidationError listing every error.
GameSpecFile parse_spec_or_throw(std::string_view text);

std::string read_file(const std::filesystem::path& path);

// The differential game of the document (the payoff accumulator when the
// block is absent).
MayerSpec build_game(const GameSpecFile& spec);

// Shortest decimal that round-trips to the same double.
std::string format_double(double x);

// 64-bit FNV-1a of the bytes, as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::string str() const;
  void write(const std::filesystem::path& path) const;
  // Column index by name; throws ValidationError when absent.
  std::size_t column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace mzdual::io
