#pragma once

#include <optional>
#include <string>

#include "rdtrack/problem.hpp"

namespace rdtrack {

/// Binary source (p, 1-p) with Hamming distortion; letter 0 carries mass p.
RdProblem binary_hamming_problem(double p);

/// 4x4 problem with d = (1/8)[[0,1,1,2],[4,1,5,2],[4,5,1,2],[8,5,5,2]] and
/// p_X = (0.4, 0.3, 0.2, 0.1).
RdProblem fig3_problem();

/// Berger's 2.7.3 example: d = [[1,0,0.3],[0,1,0.3]], p_X = (0.4, 0.6).
/// Exhibits a support-switching and a cluster-vanishing bifurcation.
RdProblem berger273_problem();

/// Resolves "fig3", "berger273" or "binary-hamming:p=<value>".
std::optional<RdProblem> builtin_problem(const std::string& name);

}  // namespace rdtrack
