#include "rdtrack/problem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace rdtrack {

namespace {
constexpr double kProbSumTol = 1e-12;
constexpr double kNearDuplicateTol = 1e-10;
}  // namespace

Marginal Marginal::uniform(int m) {
  if (m < 1) throw std::invalid_argument("Marginal::uniform: m must be >= 1");
  return {Eigen::VectorXd::Constant(m, 1.0 / m), true};
}

Marginal Marginal::point_mass(int m, int index) {
  if (index < 0 || index >= m) throw std::invalid_argument("Marginal::point_mass: bad index");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
  w[index] = 1.0;
  return {w, true};
}

Marginal Marginal::normalize() const {
  double s = weights.sum();
  if (!(s > 0.0)) throw std::domain_error("Marginal::normalize: non-positive total mass");
  return {weights / s, true};
}

SupportSet SupportSet::full(int m) {
  SupportSet s;
  s.indices.resize(m);
  for (int i = 0; i < m; ++i) s.indices[i] = i;
  return s;
}

SupportSet SupportSet::from_marginal(const Marginal& r, double tol) {
  SupportSet s;
  for (int i = 0; i < r.size(); ++i)
    if (r.weights[i] > tol) s.indices.push_back(i);
  return s;
}

SupportSet SupportSet::compose(const SupportSet& parent) const {
  SupportSet out;
  out.indices.reserve(indices.size());
  for (int i : indices) out.indices.push_back(parent.indices.at(static_cast<std::size_t>(i)));
  return out;
}

ValidationReport validate(const RdProblem& problem) {
  ValidationReport rep;
  const int n = problem.source_size();
  const int m = problem.repro_size();
  auto err = [&](ValidationIssue::Kind k, std::string msg) {
    rep.errors.push_back({k, std::move(msg)});
  };
  if (n == 0 || m == 0) {
    err(ValidationIssue::Kind::empty_alphabet, "empty source or reproduction alphabet");
    return rep;
  }
  if (problem.distortion.rows() != n) {
    err(ValidationIssue::Kind::empty_alphabet, "distortion row count differs from source length");
    return rep;
  }
  for (int x = 0; x < n; ++x) {
    if (!(problem.source[x] >= 0.0)) {
      std::ostringstream os;
      os << "source(" << x << ") = " << problem.source[x] << " is negative";
      err(ValidationIssue::Kind::negative_source, os.str());
    }
  }
  double s = problem.source.sum();
  if (std::abs(s - 1.0) > kProbSumTol) {
    std::ostringstream os;
    os << "source sums to " << s << ", not 1 within " << kProbSumTol;
    err(ValidationIssue::Kind::source_not_normalized, os.str());
  }
  for (int x = 0; x < n; ++x)
    for (int j = 0; j < m; ++j) {
      double d = problem.distortion(x, j);
      if (!std::isfinite(d)) {
        std::ostringstream os;
        os << "distortion(" << x << "," << j << ") is not finite";
        err(ValidationIssue::Kind::nonfinite_distortion, os.str());
      } else if (d < 0.0) {
        std::ostringstream os;
        os << "distortion(" << x << "," << j << ") = " << d << " is negative";
        err(ValidationIssue::Kind::negative_distortion, os.str());
      }
    }
  for (int j = 0; j < m; ++j)
    for (int k = j + 1; k < m; ++k) {
      double maxdiff = (problem.distortion.col(j) - problem.distortion.col(k))
                           .cwiseAbs()
                           .maxCoeff();
      std::ostringstream os;
      os << "distortion columns " << j << " and " << k;
      if (maxdiff == 0.0) {
        err(ValidationIssue::Kind::duplicate_columns, os.str() + " are identical");
      } else if (maxdiff < kNearDuplicateTol) {
        os << " differ by only " << maxdiff << " in max-norm";
        rep.warnings.push_back({ValidationIssue::Kind::near_duplicate_columns, os.str()});
      }
    }
  if (!problem.source_labels.empty() && static_cast<int>(problem.source_labels.size()) != n)
    err(ValidationIssue::Kind::bad_labels, "source label count differs from alphabet size");
  if (!problem.repro_labels.empty() && static_cast<int>(problem.repro_labels.size()) != m)
    err(ValidationIssue::Kind::bad_labels, "reproduction label count differs from alphabet size");
  return rep;
}

RdProblem reduce(const RdProblem& problem, const SupportSet& support) {
  if (support.indices.empty())
    throw std::invalid_argument("reduce: empty support leaves a trivial problem");
  RdProblem out;
  out.source = problem.source;
  out.source_labels = problem.source_labels;
  out.distortion.resize(problem.source_size(), support.size());
  int prev = -1;
  for (int j = 0; j < support.size(); ++j) {
    int idx = support.indices[static_cast<std::size_t>(j)];
    if (idx <= prev || idx >= problem.repro_size())
      throw std::invalid_argument("reduce: support indices must be strictly increasing and in range");
    prev = idx;
    out.distortion.col(j) = problem.distortion.col(idx);
    if (!problem.repro_labels.empty())
      out.repro_labels.push_back(problem.repro_labels[static_cast<std::size_t>(idx)]);
  }
  return out;
}

Eigen::VectorXd embed(const Eigen::VectorXd& reduced, const SupportSet& support, int m) {
  if (reduced.size() != support.size())
    throw std::invalid_argument("embed: vector length differs from support size");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
  for (int j = 0; j < support.size(); ++j) {
    int idx = support.indices[static_cast<std::size_t>(j)];
    if (idx < 0 || idx >= m) throw std::invalid_argument("embed: support index out of range");
    out[idx] = reduced[j];
  }
  return out;
}

Marginal embed(const Marginal& reduced, const SupportSet& support, int m) {
  return {embed(reduced.weights, support, m), reduced.normalized};
}

Eigen::VectorXd restrict_to(const Eigen::VectorXd& full, const SupportSet& support) {
  Eigen::VectorXd out(support.size());
  for (int j = 0; j < support.size(); ++j)
    out[j] = full[support.indices[static_cast<std::size_t>(j)]];
  return out;
}

RdProblem load_problem(std::istream& is) {
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("problem file is not valid JSON: ") + e.what());
  }
  if (!j.contains("source") || !j.contains("distortion"))
    throw std::runtime_error("problem file must contain \"source\" and \"distortion\"");
  RdProblem p;
  const auto& src = j.at("source");
  p.source.resize(static_cast<Eigen::Index>(src.size()));
  for (std::size_t i = 0; i < src.size(); ++i) p.source[static_cast<Eigen::Index>(i)] = src[i].get<double>();
  const auto& dist = j.at("distortion");
  std::size_t n = dist.size();
  if (n != src.size()) throw std::runtime_error("distortion must have one row per source letter");
  std::size_t m = n ? dist[0].size() : 0;
  p.distortion.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  for (std::size_t x = 0; x < n; ++x) {
    if (dist[x].size() != m) throw std::runtime_error("distortion rows have unequal lengths");
    for (std::size_t y = 0; y < m; ++y)
      p.distortion(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = dist[x][y].get<double>();
  }
  if (j.contains("labels")) {
    const auto& lab = j.at("labels");
    if (lab.contains("source")) p.source_labels = lab.at("source").get<std::vector<std::string>>();
    if (lab.contains("reproduction"))
      p.repro_labels = lab.at("reproduction").get<std::vector<std::string>>();
  }
  return p;
}

RdProblem load_problem_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open problem file: " + path);
  return load_problem(f);
}

void save_problem(std::ostream& os, const RdProblem& problem) {
  nlohmann::json j;
  j["source"] = std::vector<double>(problem.source.data(),
                                    problem.source.data() + problem.source.size());
  nlohmann::json rows = nlohmann::json::array();
  for (int x = 0; x < problem.source_size(); ++x) {
    nlohmann::json row = nlohmann::json::array();
    for (int y = 0; y < problem.repro_size(); ++y) row.push_back(problem.distortion(x, y));
    rows.push_back(std::move(row));
  }
  j["distortion"] = std::move(rows);
  if (!problem.source_labels.empty() || !problem.repro_labels.empty()) {
    nlohmann::json lab;
    if (!problem.source_labels.empty()) lab["source"] = problem.source_labels;
    if (!problem.repro_labels.empty()) lab["reproduction"] = problem.repro_labels;
    j["labels"] = std::move(lab);
  }
  os << j.dump(2) << "\n";
}

}  // namespace rdtrack
