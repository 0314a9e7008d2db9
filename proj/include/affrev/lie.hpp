#pragma once

#include "affrev/linalg.hpp"

#include <optional>
#include <string>
#include <vector>

namespace affrev {

/// Span of antisymmetric m×m matrices with a Frobenius-orthonormal basis.
struct LieAlgebraSpan {
  int ambient_dim = 0;
  std::vector<Mat> basis;
  int dim() const { return static_cast<int>(basis.size()); }
  int rounds = 0;  // bracket rounds until the span stopped growing
};

/// Rotation generators of the orthogonal complement of `fixed` (m × k,
/// orthonormal columns), written in ambient coordinates.
std::vector<Mat> embedded_so_generators(const Mat& fixed);

/// Smallest bracket-closed span containing the generators.
LieAlgebraSpan lie_bracket_closure(const std::vector<Mat>& generators, double rel_tol = 1e-9);

/// Vectors annihilated by every element of the span (orthonormal columns).
Mat common_fixed_space(const LieAlgebraSpan& g, double rel_tol = 1e-9);

/// dim{X p : X ∈ g}.
int orbit_dimension(const LieAlgebraSpan& g, const Vec& p, double rel_tol = 1e-9);

enum class Lemma7Verdict { FullOrthogonal, CodimOneRevolution, Undetermined };

struct Lemma7Result {
  Lemma7Verdict verdict = Lemma7Verdict::Undetermined;
  int pair_dims[3] = {0, 0, 0};  // closures of (0,1), (0,2), (1,2)
  int total_dim = 0;
  std::optional<Vec> fixed_line;  // for the codimension 1 verdict
  int pair = -1;                  // which pair produced it
};

/// Three codimension 2 revolution structures given by their 2-dim fixed
/// spaces, already in a common orthogonal position.
Lemma7Result lemma7_check(const std::vector<Mat>& fixed_planes);

/// Same, but rejects structures whose conjugators differ: the fixed
/// spaces are only comparable in a shared orthogonal position.
Lemma7Result lemma7_check(const std::vector<Mat>& fixed_planes, const std::vector<Mat>& conjugators);

const char* to_string(Lemma7Verdict v);

}  // namespace affrev
