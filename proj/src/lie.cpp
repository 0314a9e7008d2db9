#include "affrev/lie.hpp"

#include <cmath>

namespace affrev {

namespace {

// Antisymmetric matrix ↔ vector of its upper entries scaled by √2, so the
// Euclidean norm equals the Frobenius norm.
Vec pack(const Mat& X) {
  const int m = static_cast<int>(X.rows());
  Vec v(m * (m - 1) / 2);
  int c = 0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) v[c++] = std::sqrt(2.0) * X(i, j);
  return v;
}

Mat unpack(const Vec& v, int m) {
  Mat X = Mat::Zero(m, m);
  int c = 0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      X(i, j) = v[c++] / std::sqrt(2.0);
      X(j, i) = -X(i, j);
    }
  return X;
}

// Gram–Schmidt with one re-orthogonalization pass. Returns false when the
// candidate lies in the span up to rel_tol.
bool extend(std::vector<Vec>& basis, Vec v, double rel_tol) {
  const double n0 = v.norm();
  if (n0 == 0) return false;
  for (int pass = 0; pass < 2; ++pass)
    for (const Vec& b : basis) v -= b.dot(v) * b;
  const double n1 = v.norm();
  if (n1 <= rel_tol * n0) return false;
  basis.push_back(v / n1);
  return true;
}

}  // namespace

std::vector<Mat> embedded_so_generators(const Mat& fixed) {
  if (fixed.cols() > 0 && orthonormality_error(fixed) > 1e-10)
    throw Error("embedded_so_generators", "fixed space basis is not orthonormal");
  const Mat C = orthogonal_complement(fixed);
  const int r = static_cast<int>(C.cols());
  std::vector<Mat> out;
  for (int a = 0; a < r; ++a)
    for (int b = a + 1; b < r; ++b)
      out.push_back(C.col(a) * C.col(b).transpose() - C.col(b) * C.col(a).transpose());
  return out;
}

LieAlgebraSpan lie_bracket_closure(const std::vector<Mat>& generators, double rel_tol) {
  LieAlgebraSpan g;
  if (generators.empty()) return g;
  const int m = static_cast<int>(generators[0].rows());
  g.ambient_dim = m;
  std::vector<Vec> basis;
  for (const Mat& X : generators) {
    if (X.rows() != m || X.cols() != m) throw Error("lie_bracket_closure", "generators of mixed size");
    if ((X + X.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, X.cwiseAbs().maxCoeff()))
      throw Error("lie_bracket_closure", "generator is not antisymmetric");
    extend(basis, pack(X), rel_tol);
  }
  // Brackets of new elements against everything, until nothing new appears.
  size_t done = 0;
  for (int round = 0; round < m * m && done < basis.size(); ++round) {
    const size_t end = basis.size();
    for (size_t i = done; i < end; ++i)
      for (size_t j = 0; j < end; ++j) {
        if (j >= done && j <= i) continue;
        const Mat A = unpack(basis[i], m), B = unpack(basis[j], m);
        extend(basis, pack(A * B - B * A), rel_tol);
      }
    done = end;
    g.rounds = round + 1;
  }
  for (const Vec& v : basis) g.basis.push_back(unpack(v, m));
  return g;
}

Mat common_fixed_space(const LieAlgebraSpan& g, double rel_tol) {
  const int m = g.ambient_dim;
  if (g.basis.empty()) return Mat::Identity(m, m);
  Mat stacked(m * g.dim(), m);
  for (int i = 0; i < g.dim(); ++i) stacked.middleRows(i * m, m) = g.basis[i];
  return null_space(stacked, rel_tol);
}

int orbit_dimension(const LieAlgebraSpan& g, const Vec& p, double rel_tol) {
  if (g.basis.empty()) return 0;
  Mat V(p.size(), g.dim());
  for (int i = 0; i < g.dim(); ++i) V.col(i) = g.basis[i] * p;
  if (V.norm() == 0) return 0;
  return static_cast<int>(orthonormal_span(V, rel_tol).cols());
}

Lemma7Result lemma7_check(const std::vector<Mat>& planes) {
  if (planes.size() != 3) throw Error("lemma7_check", "exactly three structures are required");
  const int m = static_cast<int>(planes[0].rows());
  std::vector<std::vector<Mat>> gens;
  for (const Mat& P : planes) {
    if (P.rows() != m || P.cols() != 2) throw Error("lemma7_check", "each fixed space must be m × 2");
    gens.push_back(embedded_so_generators(P));
  }
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      if (orthonormal_span((Mat(m, 4) << planes[a], planes[b]).finished(), 1e-9).cols() == 2)
        throw Error("lemma7_check", "structures are not distinct");

  Lemma7Result r;
  const int full = m * (m - 1) / 2;
  const int codim1 = (m - 1) * (m - 2) / 2;
  const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (int k = 0; k < 3; ++k) {
    std::vector<Mat> u = gens[pairs[k][0]];
    u.insert(u.end(), gens[pairs[k][1]].begin(), gens[pairs[k][1]].end());
    const LieAlgebraSpan g = lie_bracket_closure(u);
    r.pair_dims[k] = g.dim();
    const Mat fixed = common_fixed_space(g);
    if (!r.fixed_line && g.dim() >= codim1 && fixed.cols() == 1) {
      r.fixed_line = canonical_sign(fixed.col(0));
      r.pair = k;
    }
  }
  std::vector<Mat> all;
  for (const auto& v : gens) all.insert(all.end(), v.begin(), v.end());
  r.total_dim = lie_bracket_closure(all).dim();
  if (r.total_dim == full) r.verdict = Lemma7Verdict::FullOrthogonal;
  else if (r.fixed_line) r.verdict = Lemma7Verdict::CodimOneRevolution;
  return r;
}

Lemma7Result lemma7_check(const std::vector<Mat>& planes, const std::vector<Mat>& conjugators) {
  if (conjugators.size() != planes.size()) throw Error("lemma7_check", "one conjugator per structure expected");
  for (size_t i = 1; i < conjugators.size(); ++i) {
    const double scale = std::max(1.0, conjugators[0].cwiseAbs().maxCoeff());
    if (conjugators[i].rows() != conjugators[0].rows() ||
        (conjugators[i] - conjugators[0]).cwiseAbs().maxCoeff() > 1e-8 * scale)
      throw Error("lemma7_check", "structures not in a common orthogonal position");
  }
  return lemma7_check(planes);
}

const char* to_string(Lemma7Verdict v) {
  switch (v) {
    case Lemma7Verdict::FullOrthogonal: return "full orthogonal group";
    case Lemma7Verdict::CodimOneRevolution: return "codim-1 revolution";
    case Lemma7Verdict::Undetermined: return "undetermined";
  }
  return "?";
}

}  // namespace affrev
