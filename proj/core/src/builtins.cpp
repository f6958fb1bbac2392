#include "rdtrack/builtins.hpp"

#include <stdexcept>

namespace rdtrack {

RdProblem binary_hamming_problem(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("binary_hamming_problem: p must be in (0,1)");
  RdProblem out;
  out.source.resize(2);
  out.source << p, 1.0 - p;
  out.distortion.resize(2, 2);
  out.distortion << 0, 1, 1, 0;
  return out;
}

RdProblem fig3_problem() {
  RdProblem out;
  out.source.resize(4);
  out.source << 0.4, 0.3, 0.2, 0.1;
  out.distortion.resize(4, 4);
  out.distortion << 0, 1, 1, 2, 4, 1, 5, 2, 4, 5, 1, 2, 8, 5, 5, 2;
  out.distortion /= 8.0;
  return out;
}

RdProblem berger273_problem() {
  RdProblem out;
  out.source.resize(2);
  out.source << 0.4, 0.6;
  out.distortion.resize(2, 3);
  out.distortion << 1, 0, 0.3, 0, 1, 0.3;
  return out;
}

std::optional<RdProblem> builtin_problem(const std::string& name) {
  if (name == "fig3") return fig3_problem();
  if (name == "berger273") return berger273_problem();
  const std::string prefix = "binary-hamming:p=";
  if (name.rfind(prefix, 0) == 0) {
    double p = std::stod(name.substr(prefix.size()));
    return binary_hamming_problem(p);
  }
  return std::nullopt;
}

}  // namespace rdtrack
