#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rdtrack/problem.hpp"
#include "rdtrack/tracker.hpp"

namespace rdtrack::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitUsage = 2;

/// Serialized alongside every output for reproducibility.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> args;
  std::uint64_t seed = 0;

  std::string to_json() const;
};

/// Resolves a built-in name ("fig3", "berger273", "binary-hamming:p=0.3")
/// or a problem file path.  Throws std::runtime_error on IO failure.
RdProblem resolve_problem(const std::string& spec);

/// Grid specs: "lin:<hi>:<lo>:<n>", "log2:<hi>:<lo>:<n>" or a comma list of
/// decreasing β values.
std::vector<double> parse_beta_grid(const std::string& spec);

struct TrackArgs {
  std::string problem;
  TrackConfig config;
  std::string out_json;
  std::string out_csv;
  std::uint64_t seed = 0;
};
int cmd_track(const TrackArgs& args, std::ostream& log);

struct BaArgs {
  std::string problem;
  std::string grid;               // grid spec
  std::string mode = "reverse-anneal";  // or "independent"
  std::string init = "uniform";
  double tol = 1e-8;
  std::int64_t max_iter = 1'000'000;
  std::string out_csv;
  std::uint64_t seed = 0;
};
int cmd_ba(const BaArgs& args, std::ostream& log);

struct CompareArgs {
  std::string trace_path;
  std::string reference;  // "oracle:binary-hamming:p=...", a cmd_ba CSV, or a trace .json
  std::string out_csv;
  bool exclude_delta_window = true;
  std::uint64_t seed = 0;
};
int cmd_compare(const CompareArgs& args, std::ostream& log);

/// One (cost, max-error) marker of the error-to-cost tradeoff data.
struct SweepRow {
  int order = 0;
  int points = 0;
  double seconds = 0.0;
  double max_error = 0.0;
};

struct SweepArgs {
  std::string problem = "binary-hamming:p=0.3";
  std::string reference = "oracle:binary-hamming:p=0.3";
  std::vector<int> orders{1, 2, 3, 6};
  std::vector<int> grid_sizes{80, 120, 180, 270, 405};
  double beta0 = 32.0;
  double beta_min = 0.5;
  double delta = 0.01;
  int min_repeat_ms = 150;  // repeat timed runs until this much accumulated time
  std::string out_csv;
  std::uint64_t seed = 0;
};
/// Tracks the problem per (order, grid size) on log2-uniform grids, timing
/// the tracking phase, and measures the max oracle error over grid points
/// excluding the heuristic ones.
std::vector<SweepRow> run_tradeoff_sweep(const SweepArgs& args, std::ostream* log);
int cmd_compare_sweep(const SweepArgs& args, std::ostream& log);

/// Least-squares slope of log(err) vs log(cost) over the densest markers.
double tail_slope(const std::vector<SweepRow>& rows, int order, int tail_points = 4);

struct SpectraArgs {
  std::string problem;
  std::string grid;
  double tol = 1e-9;
  std::int64_t max_iter = 1'000'000;
  double eigen_threshold = 1e-6;
  double delta = 0.01;
  double support_tol = 1e-9;
  std::string out_csv;
  std::uint64_t seed = 0;
};
struct SpectraRow {
  double beta = 0.0;
  std::int64_t iterations = 0;
  bool converged = false;
  BifurcationReport report;
  std::vector<std::complex<double>> marginal_eigs;  // reduced problem
  std::vector<std::complex<double>> encoder_eigs;   // full problem
};
std::vector<SpectraRow> run_spectra(const RdProblem& problem, std::span<const double> betas,
                                    double tol, std::int64_t max_iter, double eigen_threshold,
                                    double delta, double support_tol);
int cmd_spectra(const SpectraArgs& args, std::ostream& log);

}  // namespace rdtrack::cli
