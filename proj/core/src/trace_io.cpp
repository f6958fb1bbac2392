#include "rdtrack/trace_io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "rdtrack/version.hpp"

namespace rdtrack {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const char* to_string(GridEvent event) {
  switch (event) {
    case GridEvent::none: return "none";
    case GridEvent::threshold_crossed: return "threshold-crossed";
    case GridEvent::ba_refresh: return "ba-refresh";
    case GridEvent::bifurcation_classified: return "bifurcation-classified";
  }
  return "none";
}

const char* to_string(BifurcationKind kind) {
  switch (kind) {
    case BifurcationKind::none: return "none";
    case BifurcationKind::cluster_vanishing: return "cluster-vanishing";
    case BifurcationKind::possibly_support_switching: return "possibly-support-switching";
  }
  return "none";
}

namespace {

GridEvent event_from_string(const std::string& s) {
  if (s == "threshold-crossed") return GridEvent::threshold_crossed;
  if (s == "ba-refresh") return GridEvent::ba_refresh;
  if (s == "bifurcation-classified") return GridEvent::bifurcation_classified;
  return GridEvent::none;
}

BifurcationKind kind_from_string(const std::string& s) {
  if (s == "cluster-vanishing") return BifurcationKind::cluster_vanishing;
  if (s == "possibly-support-switching") return BifurcationKind::possibly_support_switching;
  return BifurcationKind::none;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

nlohmann::json report_to_json(const BifurcationReport& r) {
  return {{"beta", r.beta},
          {"min_abs_encoder_eig", r.min_abs_encoder_eig},
          {"min_marginal_entry", r.min_marginal_entry},
          {"min_marginal_jacobian_eig", r.min_marginal_jacobian_eig},
          {"kind", to_string(r.kind)}};
}

BifurcationReport report_from_json(const nlohmann::json& j) {
  BifurcationReport r;
  r.beta = j.at("beta").get<double>();
  r.min_abs_encoder_eig = j.at("min_abs_encoder_eig").get<double>();
  r.min_marginal_entry = j.at("min_marginal_entry").get<double>();
  r.min_marginal_jacobian_eig = j.at("min_marginal_jacobian_eig").get<double>();
  r.kind = kind_from_string(j.at("kind").get<std::string>());
  return r;
}

}  // namespace

void save_trace_json(std::ostream& os, const TrackTrace& trace, const std::string& manifest_json) {
  nlohmann::json j;
  j["version"] = kVersion;
  if (!manifest_json.empty()) {
    j["manifest"] = nlohmann::json::parse(manifest_json);
  } else {
    j["manifest"] = nlohmann::json::object();
  }
  {
    std::ostringstream ps;
    save_problem(ps, trace.problem);
    j["problem"] = nlohmann::json::parse(ps.str());
  }
  const TrackConfig& c = trace.config;
  j["config"] = {{"beta0", c.beta0},
                 {"beta_min", c.beta_min},
                 {"spacing", c.spacing == GridSpacing::linear ? "linear" : "log2"},
                 {"step", c.step},
                 {"points", c.points},
                 {"order", c.order},
                 {"delta", c.delta},
                 {"ba_tol", c.ba_tol},
                 {"ba_max_iter", c.ba_max_iter},
                 {"eigen_threshold", c.eigen_threshold},
                 {"classify_at_stops", c.classify_at_stops},
                 {"classify_every", c.classify_every}};
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : trace.points) {
    nlohmann::json pj;
    pj["beta"] = p.beta;
    pj["support"] = p.support.indices;
    pj["r_tilde"] = vector_to_json(p.r_reduced);
    nlohmann::json coeffs = nlohmann::json::array();
    for (const auto& cvec : p.taylor.coeffs) coeffs.push_back(vector_to_json(cvec));
    pj["taylor_coeffs"] = std::move(coeffs);
    pj["event"] = to_string(p.event);
    if (p.classification) pj["classification"] = report_to_json(*p.classification);
    pts.push_back(std::move(pj));
  }
  j["points"] = std::move(pts);
  nlohmann::json bifs = nlohmann::json::array();
  for (const auto& b : trace.bifurcations) {
    nlohmann::json bj;
    bj["beta"] = b.beta;
    bj["support_before"] = b.support_before.indices;
    bj["support_after"] = b.support_after.indices;
    bj["terminal"] = b.terminal;
    if (b.report) bj["report"] = report_to_json(*b.report);
    bifs.push_back(std::move(bj));
  }
  j["bifurcations"] = std::move(bifs);
  j["warnings"] = trace.warnings;
  j["stats"] = {{"ba_invocations", trace.stats.ba_invocations},
                {"ba_iterations", trace.stats.ba_iterations},
                {"derivative_points", trace.stats.derivative_points}};
  os << j.dump(1) << "\n";
}

TrackTrace load_trace_json(std::istream& is) {
  nlohmann::json j;
  is >> j;
  TrackTrace trace;
  {
    std::istringstream ps(j.at("problem").dump());
    trace.problem = load_problem(ps);
  }
  const auto& c = j.at("config");
  trace.config.beta0 = c.at("beta0").get<double>();
  trace.config.beta_min = c.at("beta_min").get<double>();
  trace.config.spacing =
      c.at("spacing").get<std::string>() == "log2" ? GridSpacing::log2 : GridSpacing::linear;
  trace.config.step = c.at("step").get<double>();
  trace.config.points = c.at("points").get<int>();
  trace.config.order = c.at("order").get<int>();
  trace.config.delta = c.at("delta").get<double>();
  trace.config.ba_tol = c.at("ba_tol").get<double>();
  trace.config.ba_max_iter = c.at("ba_max_iter").get<std::int64_t>();
  trace.config.eigen_threshold = c.at("eigen_threshold").get<double>();
  trace.config.classify_at_stops = c.at("classify_at_stops").get<bool>();
  trace.config.classify_every = c.at("classify_every").get<int>();
  for (const auto& pj : j.at("points")) {
    GridPoint p;
    p.beta = pj.at("beta").get<double>();
    p.support.indices = pj.at("support").get<std::vector<int>>();
    p.r_reduced = vector_from_json(pj.at("r_tilde"));
    p.taylor.beta0 = p.beta;
    for (const auto& cvec : pj.at("taylor_coeffs")) p.taylor.coeffs.push_back(vector_from_json(cvec));
    p.event = event_from_string(pj.at("event").get<std::string>());
    if (pj.contains("classification")) p.classification = report_from_json(pj.at("classification"));
    trace.points.push_back(std::move(p));
  }
  for (const auto& bj : j.at("bifurcations")) {
    BifurcationRecord b;
    b.beta = bj.at("beta").get<double>();
    b.support_before.indices = bj.at("support_before").get<std::vector<int>>();
    b.support_after.indices = bj.at("support_after").get<std::vector<int>>();
    b.terminal = bj.at("terminal").get<bool>();
    if (bj.contains("report")) b.report = report_from_json(bj.at("report"));
    trace.bifurcations.push_back(std::move(b));
  }
  if (j.contains("warnings")) trace.warnings = j.at("warnings").get<std::vector<std::string>>();
  if (j.contains("stats")) {
    trace.stats.ba_invocations = j.at("stats").value("ba_invocations", std::int64_t{0});
    trace.stats.ba_iterations = j.at("stats").value("ba_iterations", std::int64_t{0});
    trace.stats.derivative_points = j.at("stats").value("derivative_points", std::int64_t{0});
  }
  return trace;
}

void save_trace_csv(std::ostream& os, const TrackTrace& trace, const std::string& manifest_json) {
  const int m = trace.problem.repro_size();
  os << "# version=" << kVersion;
  if (!manifest_json.empty()) os << " manifest=" << manifest_json;
  os << "\n";
  os << "beta";
  for (int i = 0; i < m; ++i) os << ",r" << (i + 1);
  os << ",D,R_nats,min_marginal,event\n";
  for (const auto& p : trace.points) {
    Eigen::VectorXd full = embed(p.r_reduced, p.support, m);
    // functionals need a distribution; the tracked vector may carry drift
    Marginal normalized = Marginal{p.r_reduced, false}.normalize();
    RdProblem reduced = p.support.is_full(m) ? trace.problem : reduce(trace.problem, p.support);
    Encoder q = encoder_from_marginal(reduced, normalized, p.beta);
    RdPoint f = rd_functionals(reduced, q);
    os << format_double(p.beta);
    for (int i = 0; i < m; ++i) os << "," << format_double(full[i]);
    os << "," << format_double(f.distortion) << "," << format_double(f.rate_nats) << ","
       << format_double(p.r_reduced.minCoeff()) << "," << to_string(p.event) << "\n";
  }
}

}  // namespace rdtrack
