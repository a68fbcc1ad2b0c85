#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace mzdual::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitChecksFailed = 1;  // a verification check did not pass
inline constexpr int kExitValidation = 2;
inline constexpr int kExitConvergence = 3;
inline constexpr int kExitHypothesis = 4;  // Isaacs, CFL, declared bounds

struct RunOptions {
  std::string command;  // u, mz, vn, hj, verify, xcheck
  std::filesystem::path spec_path;
  std::filesystem::path out_dir = "mzdual_out";
  std::optional<std::size_t> grid_m;
  std::optional<double> dt, dx;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> horizon;
  bool verify = false;  // run verifiers and fail on a failed check
};

struct RunOutcome {
  int exit_code = kExitOk;
  std::string report;  // the JSON run report, also written to out_dir
};

// Executes one command. Never throws: every failure becomes a nonzero exit
// code and an "error" block in the report.
RunOutcome run(const RunOptions& options);

}  // namespace mzdual::cli
