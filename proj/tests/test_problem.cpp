#include "rdtrack/problem.hpp"

#include <sstream>

#include "doctest.h"
#include "rdtrack/builtins.hpp"

using namespace rdtrack;

TEST_SUITE_BEGIN("problem");

TEST_CASE("validation accepts the Hamming problem") {
  CHECK(validate(binary_hamming_problem(0.3)).ok());
  CHECK(validate(fig3_problem()).ok());
  CHECK(validate(berger273_problem()).ok());
}

TEST_CASE("validation flags duplicate distortion columns") {
  RdProblem p = binary_hamming_problem(0.3);
  p.distortion.resize(2, 2);
  p.distortion << 0, 0, 1, 1;
  auto rep = validate(p);
  REQUIRE_FALSE(rep.ok());
  CHECK(rep.errors[0].kind == ValidationIssue::Kind::duplicate_columns);
}

TEST_CASE("validation warns on nearly-equal columns") {
  RdProblem p = binary_hamming_problem(0.3);
  p.distortion(0, 1) = 1e-11;  // column 1 ~ column 0 up to 1e-11
  p.distortion(1, 1) = 1.0;
  p.distortion(1, 0) = 1.0 + 5e-11;
  auto rep = validate(p);
  CHECK(rep.ok());
  REQUIRE(rep.warnings.size() == 1);
  CHECK(rep.warnings[0].kind == ValidationIssue::Kind::near_duplicate_columns);
}

TEST_CASE("validation flags a non-normalized source") {
  RdProblem p = binary_hamming_problem(0.3);
  p.source << 0.5, 0.6;
  auto rep = validate(p);
  REQUIRE_FALSE(rep.ok());
  CHECK(rep.errors[0].kind == ValidationIssue::Kind::source_not_normalized);
}

TEST_CASE("validation flags negative and non-finite entries") {
  RdProblem p = binary_hamming_problem(0.3);
  p.distortion(0, 1) = -0.5;
  CHECK_FALSE(validate(p).ok());
  p.distortion(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_FALSE(validate(p).ok());
  p = binary_hamming_problem(0.3);
  p.source << -0.1, 1.1;
  CHECK_FALSE(validate(p).ok());
}

TEST_CASE("reduce keeps the selected columns in order") {
  RdProblem fig3 = fig3_problem();
  SupportSet s{{0, 1, 3}};  // 1-based letters 1, 2, 4
  RdProblem red = reduce(fig3, s);
  CHECK(red.repro_size() == 3);
  CHECK(red.source == fig3.source);
  CHECK(red.distortion.col(0) == fig3.distortion.col(0));
  CHECK(red.distortion.col(1) == fig3.distortion.col(1));
  CHECK(red.distortion.col(2) == fig3.distortion.col(3));
  CHECK(validate(red).ok());

  RdProblem berger = berger273_problem();
  RdProblem red2 = reduce(berger, SupportSet{{1, 2}});  // letters 2, 3
  CHECK(red2.repro_size() == 2);
  CHECK(red2.distortion.col(0) == berger.distortion.col(1));
  CHECK(red2.distortion.col(1) == berger.distortion.col(2));
}

TEST_CASE("reduce to the full support is the identity") {
  RdProblem fig3 = fig3_problem();
  RdProblem red = reduce(fig3, SupportSet::full(4));
  CHECK(red.distortion == fig3.distortion);
}

TEST_CASE("reduce rejects an empty support") {
  CHECK_THROWS(reduce(fig3_problem(), SupportSet{}));
}

TEST_CASE("reduction preserves validity") {
  // deleting columns cannot create duplicates
  RdProblem fig3 = fig3_problem();
  REQUIRE(validate(fig3).ok());
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) {
      SupportSet s{{a, b}};
      CHECK(validate(reduce(fig3, s)).ok());
    }
}

TEST_CASE("embed places weights on the support") {
  Marginal r{Eigen::Vector2d(0.25, 0.75), true};
  Marginal full = embed(r, SupportSet{{0, 2}}, 3);
  CHECK(full.weights == Eigen::Vector3d(0.25, 0.0, 0.75));
  // full support: unchanged
  Marginal same = embed(r, SupportSet::full(2), 2);
  CHECK(same.weights == r.weights);
  // embed then restrict is exactly the identity
  CHECK(restrict_to(full.weights, SupportSet{{0, 2}}) == r.weights);
  CHECK_THROWS(embed(r, SupportSet{{0, 1, 2}}, 3));
}

TEST_CASE("problem files round-trip") {
  RdProblem p = fig3_problem();
  p.repro_labels = {"a", "b", "c", "d"};
  std::stringstream ss;
  save_problem(ss, p);
  RdProblem q = load_problem(ss);
  CHECK(q.source == p.source);
  CHECK(q.distortion == p.distortion);
  CHECK(q.repro_labels == p.repro_labels);
  std::stringstream bad("{\"source\": [1.0]}");
  CHECK_THROWS(load_problem(bad));
  std::stringstream notjson("not json at all");
  CHECK_THROWS(load_problem(notjson));
}

TEST_CASE("builtin lookup") {
  CHECK(builtin_problem("fig3").has_value());
  CHECK(builtin_problem("berger273").has_value());
  auto bh = builtin_problem("binary-hamming:p=0.25");
  REQUIRE(bh.has_value());
  CHECK(bh->source[0] == 0.25);
  CHECK_FALSE(builtin_problem("nope").has_value());
}

TEST_SUITE_END();
