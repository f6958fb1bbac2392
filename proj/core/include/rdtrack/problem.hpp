#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rdtrack {

/// Marginal distribution r(x̂) on the reproduction alphabet.  Tracked
/// approximations carry `normalized == false`; they need not sum to one.
struct Marginal {
  Eigen::VectorXd weights;
  bool normalized = true;

  int size() const { return static_cast<int>(weights.size()); }
  double min_entry() const { return weights.minCoeff(); }
  double sum() const { return weights.sum(); }

  static Marginal uniform(int m);
  static Marginal point_mass(int m, int index);
  /// Scales to sum one; throws on a non-positive total.
  Marginal normalize() const;
};

/// Test channel q(x̂|x); column x is a conditional distribution over x̂.
struct Encoder {
  Eigen::MatrixXd channel;  // M x N

  int repro_size() const { return static_cast<int>(channel.rows()); }
  int source_size() const { return static_cast<int>(channel.cols()); }
};

/// Ordered subset of the reproduction alphabet, 0-based strictly
/// increasing indices into the parent alphabet.
struct SupportSet {
  std::vector<int> indices;

  int size() const { return static_cast<int>(indices.size()); }
  bool is_full(int m) const { return size() == m; }
  static SupportSet full(int m);
  /// Letters with weight > tol.
  static SupportSet from_marginal(const Marginal& r, double tol = 0.0);
  /// Composition: this set's indices mapped through the parent set.
  SupportSet compose(const SupportSet& parent) const;
};

struct RdProblem {
  Eigen::VectorXd source;      // length N, a probability vector
  Eigen::MatrixXd distortion;  // N x M, d(x, x̂) >= 0
  std::vector<std::string> source_labels;  // optional, empty or length N
  std::vector<std::string> repro_labels;   // optional, empty or length M

  int source_size() const { return static_cast<int>(source.size()); }
  int repro_size() const { return static_cast<int>(distortion.cols()); }
  double max_distortion() const { return distortion.maxCoeff(); }
};

struct ValidationIssue {
  enum class Kind {
    negative_source,
    source_not_normalized,
    nonfinite_distortion,
    negative_distortion,
    duplicate_columns,
    near_duplicate_columns,  // warning
    empty_alphabet,
    bad_labels,
  };
  Kind kind;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;
  std::vector<ValidationIssue> warnings;
  bool ok() const { return errors.empty(); }
};

/// Report-style check of the RdProblem invariants: normalization within
/// 1e-12, finite non-negative distortions, no exactly-equal distortion
/// columns; columns closer than 1e-10 in max-norm only warn.
ValidationReport validate(const RdProblem& problem);

/// Deletes reproduction letters outside the support (and their distortion
/// columns).  Column order is preserved; the source is unchanged.
RdProblem reduce(const RdProblem& problem, const SupportSet& support);

/// Inverse of reduce for vectors: places the reduced weights at the support
/// indices of a length-m vector, zeros elsewhere.
Marginal embed(const Marginal& reduced, const SupportSet& support, int m);
Eigen::VectorXd embed(const Eigen::VectorXd& reduced, const SupportSet& support, int m);

/// Restriction of a full-alphabet vector to the support coordinates.
Eigen::VectorXd restrict_to(const Eigen::VectorXd& full, const SupportSet& support);

/// Problem file format: {"source": [..], "distortion": [[..] per source
/// letter], "labels": {"source": [..], "reproduction": [..]}} with labels
/// optional.
RdProblem load_problem(std::istream& is);
RdProblem load_problem_file(const std::string& path);
void save_problem(std::ostream& os, const RdProblem& problem);

}  // namespace rdtrack
