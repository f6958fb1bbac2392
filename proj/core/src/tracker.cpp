#include "rdtrack/tracker.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rdtrack/tensors.hpp"

namespace rdtrack {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> trim_grid(std::span<const double> grid, double beta_from) {
  std::vector<double> out;
  out.push_back(beta_from);
  for (double b : grid)
    if (b < beta_from - 1e-15) out.push_back(b);
  return out;
}

TrackSegment track_segment_on_grid(const RdProblem& reduced, const Marginal& r0,
                                   std::span<const double> grid, const TrackConfig& config,
                                   const SupportSet& support, TrackStats* stats) {
  TrackSegment seg;
  Eigen::VectorXd r = r0.weights;
  const int L = config.order;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double beta = grid[i];
    if (r.minCoeff() <= config.delta) {
      seg.crossing = {r, beta};
      seg.crossed = true;
      return seg;
    }
    if (std::abs(r.sum() - 1.0) > 0.5) {
      std::ostringstream os;
      os << "approximation mass drifted to " << r.sum() << " at beta " << beta;
      seg.warnings.push_back(os.str());
    }
    GridPoint point;
    point.beta = beta;
    point.r_reduced = r;
    point.support = support;
    try {
      RdTensorProvider provider(reduced, Marginal{r, false}, beta, L);
      ImplicitDerivSet derivs = implicit_derivatives(provider, L);
      if (stats) {
        stats->seconds_tensors += derivs.diagnostics.tensor_seconds;
        stats->seconds_solves += derivs.diagnostics.solve_seconds;
        ++stats->derivative_points;
      }
      point.taylor = taylor_polynomial(derivs, r, L);
    } catch (const SingularJacobianError& e) {
      std::ostringstream os;
      os << "segment truncated at beta " << beta << ": singular Jacobian (rcond " << e.rcond()
         << ", kernel dim " << e.kernel_dimension() << ")";
      seg.warnings.push_back(os.str());
      return seg;
    }
    seg.points.push_back(point);
    if (i + 1 < grid.size()) r = point.taylor.eval(grid[i + 1] - beta);
  }
  return seg;
}

}  // namespace

std::vector<double> make_beta_grid(const TrackConfig& config) {
  if (!(config.beta0 > config.beta_min) || !(config.beta_min >= 0.0))
    throw std::invalid_argument("make_beta_grid: need beta0 > beta_min >= 0");
  std::vector<double> grid;
  if (config.spacing == GridSpacing::linear) {
    if (!(config.step < 0.0)) throw std::invalid_argument("make_beta_grid: step must be < 0");
    double beta = config.beta0;
    while (beta > config.beta_min + 1e-15) {
      grid.push_back(beta);
      double next = beta + config.step;
      beta = (next < config.beta_min) ? config.beta_min : next;
    }
    grid.push_back(config.beta_min);
  } else {
    if (config.points < 2) throw std::invalid_argument("make_beta_grid: need >= 2 grid points");
    if (!(config.beta_min > 0.0))
      throw std::invalid_argument("make_beta_grid: log2 spacing needs beta_min > 0");
    double top = std::log2(config.beta0);
    double bottom = std::log2(config.beta_min);
    for (int i = 0; i < config.points; ++i) {
      double t = top + (bottom - top) * static_cast<double>(i) / (config.points - 1);
      grid.push_back(std::exp2(t));
    }
  }
  return grid;
}

TrackSegment track_to_bifurcation(const RdProblem& reduced, const Marginal& r0, double beta0,
                                  const TrackConfig& config, const SupportSet& support,
                                  TrackStats* stats) {
  TrackConfig cfg = config;
  cfg.beta0 = beta0;
  auto grid = make_beta_grid(cfg);
  return track_segment_on_grid(reduced, r0, grid, config, support, stats);
}

RefreshResult handle_bifurcation(const RdProblem& full_problem, const SupportSet& support,
                                 const Eigen::VectorXd& r_crossing, double beta,
                                 const TrackConfig& config, TrackStats* stats) {
  RefreshResult out;
  std::vector<int> keep;
  for (int i = 0; i < static_cast<int>(r_crossing.size()); ++i)
    if (r_crossing[i] >= config.delta) keep.push_back(i);
  if (static_cast<int>(keep.size()) == r_crossing.size()) {
    // exact-equality crossing; drop the minimum so the support shrinks
    int argmin = 0;
    r_crossing.minCoeff(&argmin);
    keep.erase(std::remove(keep.begin(), keep.end(), argmin), keep.end());
  }
  if (keep.empty()) {
    int argmax = 0;
    r_crossing.maxCoeff(&argmax);
    keep.push_back(argmax);
  }
  SupportSet local;
  local.indices = keep;
  out.support = local.compose(support);
  Eigen::VectorXd survivors(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i)
    survivors[static_cast<Eigen::Index>(i)] = r_crossing[keep[i]];
  out.terminal = out.support.size() <= 1 || beta <= 0.0;
  if (out.terminal) {
    out.root = out.support.size() == 1 ? Marginal{Eigen::VectorXd::Ones(1), true}
                                       : Marginal{survivors, false}.normalize();
    return out;
  }
  Marginal init = Marginal{survivors, false}.normalize();
  RdProblem reduced = reduce(full_problem, out.support);
  auto t0 = Clock::now();
  out.ba = ba_fixed_point(reduced, init, beta, {config.ba_tol, config.ba_max_iter});
  if (stats) {
    stats->seconds_ba += seconds_since(t0);
    ++stats->ba_invocations;
    stats->ba_iterations += out.ba.iterations;
  }
  out.root = out.ba.marginal;
  return out;
}

BifurcationReport classify_bifurcation(const RdProblem& problem, const Encoder& q,
                                       const Marginal& r, double beta, double eigen_threshold,
                                       double delta, double support_tol) {
  BifurcationReport rep;
  rep.beta = beta;
  rep.min_abs_encoder_eig = min_abs_eigenvalue(jacobian_encoder(problem, q, beta));
  SupportSet support = SupportSet::from_marginal(r, support_tol);
  if (support.size() == 0) throw std::domain_error("classify_bifurcation: empty support");
  Eigen::VectorXd on_support = restrict_to(r.weights, support);
  rep.min_marginal_entry = on_support.minCoeff();
  RdProblem reduced = (support.size() == problem.repro_size()) ? problem : reduce(problem, support);
  Marginal rr = Marginal{on_support, false}.normalize();
  rep.min_marginal_jacobian_eig = min_abs_eigenvalue(jacobian_marginal(reduced, rr, beta));
  if (rep.min_abs_encoder_eig >= eigen_threshold) {
    rep.kind = BifurcationKind::none;
  } else if (rep.min_marginal_entry < delta) {
    rep.kind = BifurcationKind::cluster_vanishing;
  } else {
    rep.kind = BifurcationKind::possibly_support_switching;
  }
  return rep;
}

TrackTrace root_track(const RdProblem& problem, const TrackConfig& config) {
  auto t_start = Clock::now();
  TrackTrace trace;
  trace.problem = problem;
  trace.config = config;
  ValidationReport v = validate(problem);
  if (!v.ok()) throw std::invalid_argument("root_track: invalid problem: " + v.errors.front().message);
  for (const auto& w : v.warnings) trace.warnings.push_back(w.message);

  const int m = problem.repro_size();
  auto full_grid = make_beta_grid(config);

  auto t0 = Clock::now();
  FixedPointResult init =
      ba_fixed_point(problem, Marginal::uniform(m), config.beta0, {config.ba_tol, config.ba_max_iter});
  trace.stats.seconds_ba += seconds_since(t0);
  ++trace.stats.ba_invocations;
  trace.stats.ba_iterations += init.iterations;
  if (!init.converged)
    trace.warnings.push_back("initial Blahut-Arimoto run did not converge within max_iter");

  SupportSet support = SupportSet::full(m);
  Marginal root = init.marginal;
  std::vector<double> grid(full_grid.begin(), full_grid.end());
  bool switch_warned = false;

  while (true) {
    RdProblem reduced = support.is_full(m) ? problem : reduce(problem, support);
    TrackSegment seg = track_segment_on_grid(reduced, root, grid, config, support, &trace.stats);
    for (auto& w : seg.warnings) trace.warnings.push_back(std::move(w));
    bool first_point_of_segment = true;
    for (auto& point : seg.points) {
      if (first_point_of_segment) {
        point.event = GridEvent::ba_refresh;  // the segment base came from a BA run
        first_point_of_segment = false;
      } else if (config.classify_every > 0 &&
                 (static_cast<int>(trace.points.size()) % config.classify_every) == 0) {
        Marginal full_r{embed(point.r_reduced, point.support, m), false};
        Marginal safe = full_r.normalize();
        Encoder q = encoder_from_marginal(problem, safe, point.beta);
        point.classification = classify_bifurcation(problem, q, safe, point.beta,
                                                    config.eigen_threshold, config.delta);
        point.event = GridEvent::bifurcation_classified;
        if (point.classification->kind == BifurcationKind::possibly_support_switching &&
            !switch_warned) {
          std::ostringstream os;
          os << "possible support-switching bifurcation near beta " << point.beta
             << "; tracking continues on the current branch";
          trace.warnings.push_back(os.str());
          switch_warned = true;
        }
      }
      trace.points.push_back(std::move(point));
    }
    if (!seg.crossed) break;  // grid exhausted (or segment truncated)

    const auto& [r_cross, beta_cross] = *seg.crossing;
    BifurcationRecord record;
    record.beta = beta_cross;
    record.support_before = support;
    if (config.classify_at_stops) {
      // Classify at the crossing approximation, embedded into the full
      // problem.  Overshot (negative) masses are floored at a tiny positive
      // value so the vanishing letter stays visible to the flowchart.
      Eigen::VectorXd clipped = r_cross.cwiseMax(1e-12);
      Marginal full_r = Marginal{embed(clipped, support, m), false}.normalize();
      Encoder q = encoder_from_marginal(problem, full_r, beta_cross);
      record.report = classify_bifurcation(problem, q, full_r, beta_cross,
                                           config.eigen_threshold, config.delta,
                                           /*support_tol=*/0.0);
    }
    RefreshResult refresh =
        handle_bifurcation(problem, support, r_cross, beta_cross, config, &trace.stats);
    record.support_after = refresh.support;
    record.terminal = refresh.terminal;
    if (!refresh.terminal && !refresh.ba.converged)
      trace.warnings.push_back("Blahut-Arimoto refresh did not converge after a bifurcation");
    if (record.report && record.report->kind == BifurcationKind::possibly_support_switching)
      trace.warnings.push_back(
          "possible support-switching bifurcation detected; continuing on the current branch");
    trace.bifurcations.push_back(record);

    if (refresh.terminal) {
      GridPoint terminal;
      terminal.beta = beta_cross;
      terminal.r_reduced = refresh.root.weights;
      terminal.support = refresh.support;
      terminal.taylor.beta0 = beta_cross;
      terminal.taylor.coeffs = {refresh.root.weights};
      terminal.event = GridEvent::ba_refresh;
      trace.points.push_back(std::move(terminal));
      break;
    }
    support = refresh.support;
    root = refresh.root;
    grid = trim_grid(grid, beta_cross);
  }
  trace.stats.seconds_total = seconds_since(t_start);
  return trace;
}

Marginal extrapolate(const TrackTrace& trace, double beta) {
  if (trace.points.empty()) throw std::out_of_range("extrapolate: empty trace");
  double top = trace.points.front().beta;
  double bottom = trace.points.back().beta;
  if (beta > top + 1e-12 || beta < bottom - 1e-12)
    throw std::out_of_range("extrapolate: beta outside the trace range");
  // nearest point with grid β >= beta; prefer the latest such point so a
  // refresh at the same β wins over the crossing segment's points
  std::size_t pick = 0;
  for (std::size_t i = 0; i < trace.points.size(); ++i) {
    if (trace.points[i].beta >= beta - 1e-12) pick = i;
    else break;
  }
  const int m = trace.problem.repro_size();
  auto eval_at = [&](std::size_t i) {
    const GridPoint& gp = trace.points[i];
    Eigen::VectorXd v = gp.taylor.eval(beta - gp.beta);
    return embed(v, gp.support, m);
  };
  Eigen::VectorXd value = eval_at(pick);
  if ((value.array() < 0.0).any() && pick + 1 < trace.points.size()) {
    value = eval_at(pick + 1);  // fall forward past an overshot bifurcation
  }
  return {value, false};
}

std::vector<FixedPointResult> ba_reverse_anneal(const RdProblem& problem,
                                                std::span<const double> betas, double tol,
                                                std::int64_t max_iter) {
  for (std::size_t i = 1; i < betas.size(); ++i)
    if (!(betas[i] < betas[i - 1]))
      throw std::invalid_argument("ba_reverse_anneal: grid must be strictly decreasing");
  std::vector<FixedPointResult> out;
  out.reserve(betas.size());
  Marginal r = Marginal::uniform(problem.repro_size());
  for (double beta : betas) {
    FixedPointResult res = ba_fixed_point(problem, r, beta, {tol, max_iter});
    r = res.marginal;
    out.push_back(std::move(res));
  }
  return out;
}

}  // namespace rdtrack
