#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rdtrack/ba.hpp"
#include "rdtrack/implicit.hpp"
#include "rdtrack/problem.hpp"

namespace rdtrack {

/// β grids are either fixed-step in β (step < 0) or a fixed number of
/// points uniform in log2 β over [beta_min, beta0].
enum class GridSpacing { linear, log2 };

struct TrackConfig {
  double beta0 = 32.0;
  double beta_min = 0.0;
  GridSpacing spacing = GridSpacing::linear;
  double step = -0.05;  // linear spacing; must be < 0
  int points = 0;       // log2 spacing; number of grid points, >= 2
  int order = 3;        // Taylor order L >= 1
  double delta = 0.01;  // cluster mass threshold, in (0,1)
  double ba_tol = 1e-8;
  std::int64_t ba_max_iter = 1'000'000;
  double eigen_threshold = 1e-6;  // ε_λ for bifurcation classification
  bool classify_at_stops = true;
  int classify_every = 0;  // additionally every k-th grid point when > 0
};

/// Decreasing β grid induced by the config; the final linear step is
/// shortened to land exactly on beta_min.
std::vector<double> make_beta_grid(const TrackConfig& config);

enum class GridEvent { none, threshold_crossed, ba_refresh, bifurcation_classified };

enum class BifurcationKind { none, cluster_vanishing, possibly_support_switching };

struct BifurcationReport {
  double beta = 0.0;
  double min_abs_encoder_eig = 0.0;   // full-problem q-Jacobian of Id - BA
  double min_marginal_entry = 0.0;    // over the current support
  double min_marginal_jacobian_eig = 0.0;  // reduced-problem r-Jacobian, min |λ|
  BifurcationKind kind = BifurcationKind::none;
};

struct GridPoint {
  double beta = 0.0;
  Eigen::VectorXd r_reduced;  // on the point's support; unnormalized while tracked
  SupportSet support;         // indices into the full alphabet
  TaylorPolynomial taylor;    // taylor.eval(0) == r_reduced exactly
  GridEvent event = GridEvent::none;
  std::optional<BifurcationReport> classification;
};

struct BifurcationRecord {
  double beta = 0.0;  // grid β at which the threshold was crossed
  SupportSet support_before;
  SupportSet support_after;
  bool terminal = false;
  std::optional<BifurcationReport> report;
};

struct TrackStats {
  std::int64_t ba_invocations = 0;
  std::int64_t ba_iterations = 0;
  std::int64_t derivative_points = 0;
  double seconds_tensors = 0.0;
  double seconds_solves = 0.0;
  double seconds_ba = 0.0;
  double seconds_total = 0.0;
};

struct TrackTrace {
  RdProblem problem;
  TrackConfig config;
  std::vector<GridPoint> points;  // strictly decreasing β except at refresh betas
  std::vector<BifurcationRecord> bifurcations;
  std::vector<std::string> warnings;
  TrackStats stats;
};

/// Result of one tracking segment: points carry their polynomials and stay
/// strictly inside the δ-interior; `crossing`, when set, is the first
/// approximation at or below the threshold.
struct TrackSegment {
  std::vector<GridPoint> points;
  std::optional<std::pair<Eigen::VectorXd, double>> crossing;  // (r, β)
  bool crossed = false;
  std::vector<std::string> warnings;
};

/// The modified fixed-order Taylor method on a reduced problem: from an
/// (approximate) full-support root of BA at beta0, repeatedly expand to
/// order L and step along the grid until a cluster mass reaches delta or
/// the grid is exhausted.  `support` only tags the emitted points.
TrackSegment track_to_bifurcation(const RdProblem& reduced, const Marginal& r0, double beta0,
                                  const TrackConfig& config, const SupportSet& support,
                                  TrackStats* stats = nullptr);

struct RefreshResult {
  SupportSet support;  // surviving letters, composed into the full alphabet
  Marginal root;       // BA-refreshed root on the surviving support
  FixedPointResult ba;
  bool terminal = false;
};

/// The bifurcation heuristic: zero every coordinate below delta (the
/// smallest one if none is), renormalize, and run BA at the same β on the
/// surviving support.  Terminal when at most one letter survives or β <= 0.
RefreshResult handle_bifurcation(const RdProblem& full_problem, const SupportSet& support,
                                 const Eigen::VectorXd& r_crossing, double beta,
                                 const TrackConfig& config, TrackStats* stats = nullptr);

/// Root tracking for RD: BA from the uniform marginal at beta0, then
/// alternate track_to_bifurcation and handle_bifurcation, reducing the
/// problem after each cluster-vanishing event.
TrackTrace root_track(const RdProblem& problem, const TrackConfig& config);

/// Evaluates the trace at any β in range, embedded into the full alphabet.
/// Uses the expansion at the nearest grid point with grid β >= beta; if that
/// yields a negative coordinate (an overshot bifurcation), the expansion at
/// the next grid point is used instead.
Marginal extrapolate(const TrackTrace& trace, double beta);

/// The classification flowchart: no small encoder-Jacobian eigenvalue
/// means no bifurcation; a small eigenvalue together with a vanishing
/// current-support marginal entry means cluster-vanishing; a small
/// eigenvalue with all masses bounded away from zero flags a possible
/// support switch.  q and r live on the full problem; mass and
/// marginal-Jacobian figures are taken on the support.
BifurcationReport classify_bifurcation(const RdProblem& problem, const Encoder& q,
                                       const Marginal& r, double beta, double eigen_threshold,
                                       double delta, double support_tol = 1e-9);

/// Reverse deterministic annealing: BA at each grid point initialized from
/// the previous solution (uniform at the first).  Non-convergence at a point
/// is recorded and the sweep continues.
std::vector<FixedPointResult> ba_reverse_anneal(const RdProblem& problem,
                                                std::span<const double> betas, double tol,
                                                std::int64_t max_iter = 1'000'000);

}  // namespace rdtrack
