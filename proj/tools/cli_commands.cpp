#include "cli_commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rdtrack/ba.hpp"
#include "rdtrack/builtins.hpp"
#include "rdtrack/oracles.hpp"
#include "rdtrack/trace_io.hpp"
#include "rdtrack/version.hpp"

namespace rdtrack::cli {

namespace {
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}


std::string complex_list(const std::vector<std::complex<double>>& eigs) {
  std::ostringstream os;
  for (std::size_t i = 0; i < eigs.size(); ++i) {
    if (i) os << ";";
    os << format_double(eigs[i].real()) << "+" << format_double(eigs[i].imag()) << "i";
  }
  return os.str();
}
}  // namespace

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["version"] = kVersion;
  j["seed"] = seed;
  nlohmann::json a = nlohmann::json::object();
  for (const auto& [k, v] : args) a[k] = v;
  j["args"] = std::move(a);
  return j.dump();
}

RdProblem resolve_problem(const std::string& spec) {
  if (auto builtin = builtin_problem(spec)) return *builtin;
  return load_problem_file(spec);
}

std::vector<double> parse_beta_grid(const std::string& spec) {
  auto fail = [&](const char* why) {
    throw std::runtime_error(std::string("bad grid spec '") + spec + "': " + why);
  };
  std::vector<std::string> parts;
  {
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
  }
  std::vector<double> grid;
  if (parts.size() == 4 && (parts[0] == "lin" || parts[0] == "log2")) {
    double hi = std::stod(parts[1]);
    double lo = std::stod(parts[2]);
    int n = std::stoi(parts[3]);
    if (n < 1) fail("need at least one point");
    if (!(hi > lo)) fail("need hi > lo");
    for (int i = 0; i < n; ++i) {
      double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
      if (parts[0] == "lin") {
        grid.push_back(hi + (lo - hi) * t);
      } else {
        if (!(lo > 0.0)) fail("log2 grid needs lo > 0");
        grid.push_back(std::exp2(std::log2(hi) + (std::log2(lo) - std::log2(hi)) * t));
      }
    }
    return grid;
  }
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) grid.push_back(std::stod(item));
  if (grid.empty()) fail("empty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] < grid[i - 1])) fail("values must be strictly decreasing");
  return grid;
}

int cmd_track(const TrackArgs& args, std::ostream& log) {
  RdProblem problem;
  try {
    problem = resolve_problem(args.problem);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  RunManifest manifest;
  manifest.command = "track";
  manifest.seed = args.seed;
  manifest.args["problem"] = args.problem;
  manifest.args["beta0"] = format_double(args.config.beta0);
  manifest.args["beta_min"] = format_double(args.config.beta_min);
  manifest.args["spacing"] = args.config.spacing == GridSpacing::linear ? "linear" : "log2";
  manifest.args["step"] = format_double(args.config.step);
  manifest.args["points"] = std::to_string(args.config.points);
  manifest.args["order"] = std::to_string(args.config.order);
  manifest.args["delta"] = format_double(args.config.delta);
  manifest.args["ba_tol"] = format_double(args.config.ba_tol);
  manifest.args["eigen_threshold"] = format_double(args.config.eigen_threshold);

  TrackTrace trace;
  try {
    trace = root_track(problem, args.config);
  } catch (const std::exception& e) {
    log << "error: tracking failed: " << e.what() << "\n";
    return kExitNumerical;
  }
  if (!args.out_json.empty()) {
    std::ofstream f(args.out_json);
    if (!f) {
      log << "error: cannot write " << args.out_json << "\n";
      return kExitUsage;
    }
    save_trace_json(f, trace, manifest.to_json());
  }
  if (!args.out_csv.empty()) {
    std::ofstream f(args.out_csv);
    if (!f) {
      log << "error: cannot write " << args.out_csv << "\n";
      return kExitUsage;
    }
    save_trace_csv(f, trace, manifest.to_json());
  }
  int segments = 1 + static_cast<int>(trace.bifurcations.size());
  log << "tracked " << trace.points.size() << " grid points in " << segments << " segment(s), "
      << trace.bifurcations.size() << " bifurcation(s)\n";
  for (const auto& b : trace.bifurcations) {
    log << "  bifurcation at beta " << format_double(b.beta) << ", support "
        << b.support_before.size() << " -> " << b.support_after.size();
    if (b.report)
      log << " [flowchart: " << to_string(b.report->kind) << "; min|l_q| "
          << b.report->min_abs_encoder_eig << ", min mass " << b.report->min_marginal_entry
          << "]";
    if (b.terminal) log << " (terminal)";
    log << "\n";
  }
  for (const auto& w : trace.warnings) log << "  warning: " << w << "\n";
  log << "BA invocations: " << trace.stats.ba_invocations
      << ", BA iterations: " << trace.stats.ba_iterations << "\n";
  log << "wall time: total " << trace.stats.seconds_total << " s (tensors "
      << trace.stats.seconds_tensors << " s, solves " << trace.stats.seconds_solves << " s, BA "
      << trace.stats.seconds_ba << " s)\n";
  return kExitOk;
}

int cmd_ba(const BaArgs& args, std::ostream& log) {
  RdProblem problem;
  std::vector<double> grid;
  try {
    problem = resolve_problem(args.problem);
    grid = parse_beta_grid(args.grid);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (args.mode != "reverse-anneal" && args.mode != "independent") {
    log << "error: unknown mode '" << args.mode << "'\n";
    return kExitUsage;
  }
  RunManifest manifest;
  manifest.command = "ba";
  manifest.seed = args.seed;
  manifest.args["problem"] = args.problem;
  manifest.args["grid"] = args.grid;
  manifest.args["mode"] = args.mode;
  manifest.args["init"] = args.init;
  manifest.args["tol"] = format_double(args.tol);

  const int m = problem.repro_size();
  auto t0 = Clock::now();
  std::vector<FixedPointResult> results;
  try {
    if (args.mode == "reverse-anneal") {
      results = ba_reverse_anneal(problem, grid, args.tol, args.max_iter);
    } else {
      results.reserve(grid.size());
      for (double beta : grid)
        results.push_back(
            ba_fixed_point(problem, Marginal::uniform(m), beta, {args.tol, args.max_iter}));
    }
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  double seconds = seconds_since(t0);

  std::ostream* out = &log;
  std::ofstream f;
  if (!args.out_csv.empty()) {
    f.open(args.out_csv);
    if (!f) {
      log << "error: cannot write " << args.out_csv << "\n";
      return kExitUsage;
    }
    out = &f;
  }
  *out << "# version=" << kVersion << " manifest=" << manifest.to_json() << "\n";
  *out << "beta,iterations,converged,residual";
  for (int i = 0; i < m; ++i) *out << ",r" << (i + 1);
  *out << ",D,R_nats\n";
  std::int64_t total_iter = 0;
  int failures = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& res = results[i];
    total_iter += res.iterations;
    if (!res.converged) ++failures;
    RdPoint fpt = rd_functionals(problem, res.encoder);
    *out << format_double(grid[i]) << "," << res.iterations << "," << (res.converged ? 1 : 0)
         << "," << format_double(res.residual);
    for (int j = 0; j < m; ++j) *out << "," << format_double(res.marginal.weights[j]);
    *out << "," << format_double(fpt.distortion) << "," << format_double(fpt.rate_nats) << "\n";
  }
  log << grid.size() << " grid points, " << total_iter << " BA iterations total, " << failures
      << " non-converged, wall time " << seconds << " s\n";
  return failures == 0 ? kExitOk : kExitNumerical;
}

namespace {

struct Reference {
  bool is_oracle = false;
  std::optional<BinaryHammingOracle> oracle;
  std::optional<TrackTrace> trace;          // another trace as the reference
  std::vector<double> betas;                // baseline grid (decreasing)
  std::vector<Eigen::VectorXd> marginals;   // baseline marginals
};

Reference load_reference(const std::string& spec, int repro_size) {
  Reference ref;
  const std::string oracle_prefix = "oracle:binary-hamming:p=";
  if (spec.rfind(oracle_prefix, 0) == 0) {
    ref.is_oracle = true;
    ref.oracle.emplace(std::stod(spec.substr(oracle_prefix.size())));
    return ref;
  }
  if (spec.size() > 5 && spec.substr(spec.size() - 5) == ".json") {
    std::ifstream tf(spec);
    if (!tf) throw std::runtime_error("cannot open reference trace: " + spec);
    ref.trace = load_trace_json(tf);
    if (ref.trace->problem.repro_size() != repro_size)
      throw std::runtime_error("reference trace is for a different problem");
    return ref;
  }
  std::ifstream f(spec);
  if (!f) throw std::runtime_error("cannot open baseline CSV: " + spec);
  std::string line;
  bool header_seen = false;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // column header
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> cells;
    while (std::getline(ss, cell, ',')) {
      try {
        cells.push_back(std::stod(cell));
      } catch (...) {
        cells.push_back(std::nan(""));
      }
    }
    // beta,iterations,converged,residual,r1..rM,D,R
    if (static_cast<int>(cells.size()) < 4 + repro_size) continue;
    ref.betas.push_back(cells[0]);
    Eigen::VectorXd r(repro_size);
    for (int j = 0; j < repro_size; ++j) r[j] = cells[static_cast<std::size_t>(4 + j)];
    ref.marginals.push_back(std::move(r));
  }
  if (ref.betas.empty()) throw std::runtime_error("baseline CSV has no data rows: " + spec);
  return ref;
}

}  // namespace

int cmd_compare(const CompareArgs& args, std::ostream& log) {
  auto t0 = Clock::now();
  TrackTrace trace;
  try {
    std::ifstream f(args.trace_path);
    if (!f) throw std::runtime_error("cannot open trace: " + args.trace_path);
    trace = load_trace_json(f);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  const int m = trace.problem.repro_size();
  Reference ref;
  try {
    ref = load_reference(args.reference, m);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  RunManifest manifest;
  manifest.command = "compare";
  manifest.seed = args.seed;
  manifest.args["trace"] = args.trace_path;
  manifest.args["reference"] = args.reference;

  // Heuristic grid points: the BA-refreshed points at the crossing betas.
  auto is_heuristic_beta = [&](double beta) {
    for (const auto& b : trace.bifurcations)
      if (std::abs(b.beta - beta) <= 1e-12 * std::max(1.0, std::abs(beta))) return true;
    return false;
  };

  std::ostream* out = &log;
  std::ofstream f;
  if (!args.out_csv.empty()) {
    f.open(args.out_csv);
    if (!f) {
      log << "error: cannot write " << args.out_csv << "\n";
      return kExitUsage;
    }
    out = &f;
  }
  *out << "# version=" << kVersion << " manifest=" << manifest.to_json() << "\n";
  *out << "beta,linf_error,excluded\n";
  double max_err = 0.0;
  double max_err_all = 0.0;
  std::size_t compared = 0;

  if (ref.is_oracle || ref.trace) {
    double ref_top = 0.0, ref_bottom = 0.0;
    if (ref.trace) {
      ref_top = ref.trace->points.front().beta;
      ref_bottom = ref.trace->points.back().beta;
    }
    for (const auto& p : trace.points) {
      if (ref.trace && (p.beta > ref_top || p.beta < ref_bottom)) continue;
      Eigen::VectorXd full = embed(p.r_reduced, p.support, m);
      Eigen::VectorXd target = ref.is_oracle ? ref.oracle->marginal(p.beta).weights
                                             : extrapolate(*ref.trace, p.beta).weights;
      double err = (full - target).cwiseAbs().maxCoeff();
      bool excluded = is_heuristic_beta(p.beta);
      *out << format_double(p.beta) << "," << format_double(err) << "," << (excluded ? 1 : 0)
           << "\n";
      max_err_all = std::max(max_err_all, err);
      if (!excluded) {
        max_err = std::max(max_err, err);
        ++compared;
      }
    }
  } else {
    double top = trace.points.front().beta;
    double bottom = trace.points.back().beta;
    for (std::size_t i = 0; i < ref.betas.size(); ++i) {
      double beta = ref.betas[i];
      if (beta > top || beta < bottom) continue;
      Eigen::VectorXd approx = extrapolate(trace, beta).weights;
      double err = (approx - ref.marginals[i]).cwiseAbs().maxCoeff();
      bool excluded = is_heuristic_beta(beta);
      if (args.exclude_delta_window) {
        // δ-window: the baseline has a letter of small positive mass there
        for (int j = 0; j < m; ++j) {
          double mass = ref.marginals[i][j];
          if (mass > 1e-9 && mass < trace.config.delta) excluded = true;
        }
      }
      *out << format_double(beta) << "," << format_double(err) << "," << (excluded ? 1 : 0)
           << "\n";
      max_err_all = std::max(max_err_all, err);
      if (!excluded) {
        max_err = std::max(max_err, err);
        ++compared;
      }
    }
  }
  log << "compared " << compared << " points; max L-inf error " << format_double(max_err)
      << " (including excluded points: " << format_double(max_err_all) << "); wall time "
      << seconds_since(t0) << " s\n";
  return kExitOk;
}

std::vector<SweepRow> run_tradeoff_sweep(const SweepArgs& args, std::ostream* log) {
  RdProblem problem = resolve_problem(args.problem);
  Reference ref = load_reference(args.reference, problem.repro_size());
  if (!ref.is_oracle) throw std::runtime_error("run_tradeoff_sweep: reference must be an oracle");
  const int m = problem.repro_size();

  std::vector<SweepRow> rows;
  std::vector<TrackConfig> configs;
  for (int order : args.orders) {
    for (int points : args.grid_sizes) {
      TrackConfig config;
      config.beta0 = args.beta0;
      config.beta_min = args.beta_min;
      config.spacing = GridSpacing::log2;
      config.points = points;
      config.order = order;
      config.delta = args.delta;
      configs.push_back(config);

      SweepRow row;
      row.order = order;
      row.points = points;
      row.seconds = std::numeric_limits<double>::infinity();
      TrackTrace trace = root_track(problem, config);  // warm-up; also gives the errors
      for (const auto& p : trace.points) {
        bool heuristic = false;
        for (const auto& b : trace.bifurcations)
          if (std::abs(b.beta - p.beta) <= 1e-12 * std::max(1.0, std::abs(p.beta)))
            heuristic = true;
        if (heuristic) continue;
        Eigen::VectorXd full = embed(p.r_reduced, p.support, m);
        Eigen::VectorXd target = ref.oracle->marginal(p.beta).weights;
        row.max_error = std::max(row.max_error, (full - target).cwiseAbs().maxCoeff());
      }
      rows.push_back(row);
    }
  }
  // Cost: per-combo minimum over round-robin repeats, so slow machine-load
  // drift hits every combo alike and transient stalls are discarded.
  const int repeats = std::max(3, args.min_repeat_ms / 30);
  for (int rep = 0; rep < repeats; ++rep) {
    for (std::size_t i = 0; i < configs.size(); ++i) {
      auto t0 = Clock::now();
      TrackTrace trace = root_track(problem, configs[i]);
      rows[i].seconds = std::min(rows[i].seconds, seconds_since(t0));
    }
  }
  if (log)
    for (const auto& row : rows)
      *log << "order " << row.order << ", " << row.points << " points: cost " << row.seconds
           << " s, max error " << format_double(row.max_error) << "\n";
  return rows;
}

double tail_slope(const std::vector<SweepRow>& rows, int order, int tail_points) {
  std::vector<std::pair<double, double>> pts;  // (log cost, log err)
  for (const auto& r : rows)
    if (r.order == order && r.max_error > 0.0 && r.seconds > 0.0)
      pts.emplace_back(std::log(r.seconds), std::log(r.max_error));
  if (static_cast<int>(pts.size()) > tail_points)
    pts.erase(pts.begin(), pts.end() - tail_points);
  if (pts.size() < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double n = static_cast<double>(pts.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

int cmd_compare_sweep(const SweepArgs& args, std::ostream& log) {
  RunManifest manifest;
  manifest.command = "compare-sweep";
  manifest.seed = args.seed;
  manifest.args["problem"] = args.problem;
  manifest.args["reference"] = args.reference;

  std::vector<SweepRow> rows;
  try {
    rows = run_tradeoff_sweep(args, &log);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  std::ostream* out = &log;
  std::ofstream f;
  if (!args.out_csv.empty()) {
    f.open(args.out_csv);
    if (!f) {
      log << "error: cannot write " << args.out_csv << "\n";
      return kExitUsage;
    }
    out = &f;
  }
  *out << "# version=" << kVersion << " manifest=" << manifest.to_json() << "\n";
  *out << "order,points,cost_seconds,max_error\n";
  for (const auto& r : rows)
    *out << r.order << "," << r.points << "," << format_double(r.seconds) << ","
         << format_double(r.max_error) << "\n";
  for (int order : args.orders)
    log << "order " << order << ": tail log-log slope " << tail_slope(rows, order) << "\n";
  return kExitOk;
}

std::vector<SpectraRow> run_spectra(const RdProblem& problem, std::span<const double> betas,
                                    double tol, std::int64_t max_iter, double eigen_threshold,
                                    double delta, double support_tol) {
  std::vector<SpectraRow> rows;
  rows.reserve(betas.size());
  const int m = problem.repro_size();
  for (double beta : betas) {
    SpectraRow row;
    row.beta = beta;
    FixedPointResult res =
        ba_fixed_point(problem, Marginal::uniform(m), beta, {tol, max_iter});
    row.iterations = res.iterations;
    row.converged = res.converged;
    row.report = classify_bifurcation(problem, res.encoder, res.marginal, beta, eigen_threshold,
                                      delta, support_tol);
    SupportSet support = SupportSet::from_marginal(res.marginal, support_tol);
    RdProblem reduced = support.is_full(m) ? problem : reduce(problem, support);
    Marginal rr = Marginal{restrict_to(res.marginal.weights, support), false}.normalize();
    row.marginal_eigs = eigenvalues(jacobian_marginal(reduced, rr, beta));
    row.encoder_eigs = eigenvalues(jacobian_encoder(problem, res.encoder, beta));
    rows.push_back(std::move(row));
  }
  return rows;
}

int cmd_spectra(const SpectraArgs& args, std::ostream& log) {
  RdProblem problem;
  std::vector<double> grid;
  try {
    problem = resolve_problem(args.problem);
    grid = parse_beta_grid(args.grid);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  RunManifest manifest;
  manifest.command = "spectra";
  manifest.seed = args.seed;
  manifest.args["problem"] = args.problem;
  manifest.args["grid"] = args.grid;
  manifest.args["tol"] = format_double(args.tol);
  manifest.args["eigen_threshold"] = format_double(args.eigen_threshold);
  manifest.args["delta"] = format_double(args.delta);

  std::vector<SpectraRow> rows;
  int failures = 0;
  try {
    rows = run_spectra(problem, grid, args.tol, args.max_iter, args.eigen_threshold, args.delta,
                       args.support_tol);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  std::ostream* out = &log;
  std::ofstream f;
  if (!args.out_csv.empty()) {
    f.open(args.out_csv);
    if (!f) {
      log << "error: cannot write " << args.out_csv << "\n";
      return kExitUsage;
    }
    out = &f;
  }
  *out << "# version=" << kVersion << " manifest=" << manifest.to_json() << "\n";
  *out << "beta,iterations,converged,min_abs_encoder_eig,min_marginal_jacobian_eig,"
          "min_marginal_entry,classification,marginal_eigs,encoder_eigs\n";
  for (const auto& r : rows) {
    if (!r.converged) ++failures;
    *out << format_double(r.beta) << "," << r.iterations << "," << (r.converged ? 1 : 0) << ","
         << format_double(r.report.min_abs_encoder_eig) << ","
         << format_double(r.report.min_marginal_jacobian_eig) << ","
         << format_double(r.report.min_marginal_entry) << "," << to_string(r.report.kind) << ","
         << complex_list(r.marginal_eigs) << "," << complex_list(r.encoder_eigs) << "\n";
  }
  log << rows.size() << " grid points, " << failures << " non-converged BA runs\n";
  return kExitOk;
}

}  // namespace rdtrack::cli
