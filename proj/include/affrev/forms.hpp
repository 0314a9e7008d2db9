#pragma once

#include "affrev/hyperplane.hpp"
#include "affrev/linalg.hpp"
#include "affrev/tensor3.hpp"

#include <cstdint>
#include <vector>

namespace affrev {

/// Homogeneous cubic c(x) = Σ_{i,j,k} c_ijk x_i x_j x_k with a fully
/// symmetric coefficient tensor (symmetrized on construction).
class CubicForm {
 public:
  CubicForm() = default;
  explicit CubicForm(int dim) : t_(dim) {}
  explicit CubicForm(Tensor3 t) : t_(std::move(t)) { t_.symmetrize(); }

  int dim() const { return t_.dim(); }
  const Tensor3& tensor() const { return t_; }
  double operator()(const Vec& x) const { return t_.contract3(x); }
  double frobenius() const { return t_.frobenius(); }

  /// ⟨a,x⟩⟨b,x⟩⟨c,x⟩.
  static CubicForm product(const Vec& a, const Vec& b, const Vec& c) {
    return CubicForm(Tensor3::sym_outer(a, b, c));
  }
  /// ⟨u,x⟩·xᵀQx.
  static CubicForm linear_times(const Vec& u, const Mat& Q) {
    return CubicForm(Tensor3::sym_linear_times_quadratic(u, Q));
  }
  /// c(Mx) for square or rectangular M.
  CubicForm composed(const Mat& M) const { return CubicForm(t_.pullback(M)); }

 private:
  Tensor3 t_;
};

class QuadraticForm {
 public:
  QuadraticForm() = default;
  explicit QuadraticForm(const Mat& m) : m_(0.5 * (m + m.transpose())) {}

  int dim() const { return static_cast<int>(m_.rows()); }
  const Mat& matrix() const { return m_; }
  double operator()(const Vec& x) const { return x.dot(m_ * x); }

 private:
  Mat m_;
};

struct LinearFactor {
  Vec normal;
  QuadraticForm cofactor;
  double residual = 0.0;
};

struct LinearFactorization {
  std::vector<LinearFactor> factors;
  bool is_zero = false;
  /// No start reached a stationary point within the iteration cap.
  bool exhausted = false;
  /// Smallest relative restriction residual seen over all starts.
  double best_residual = 0.0;
};

struct LinearFactorOptions {
  double tol = 1e-7;         // relative: √R(u) ≤ tol·‖c‖_F accepts u
  double zero_floor = 1e-9;  // absolute: ‖c‖_F at or below is the zero cubic
  int starts = 64;
  int max_iterations = 200;
  std::uint64_t seed = 0x5eedULL;
};

/// c restricted to the hyperplane: c'(y) = c(Ey), E = hp.basis().
CubicForm restrict(const CubicForm& c, const Hyperplane& hp);

/// ‖c restricted to u^⊥‖_F computed basis-free as ‖c ×₁P ×₂P ×₃P‖_F, P = I − uuᵀ.
double restriction_norm(const CubicForm& c, const Vec& u);

/// Real linear factors of c via multi-start minimization of the restriction
/// norm on the unit sphere, deflation and quadratic splitting.
LinearFactorization linear_factors(const CubicForm& c, const LinearFactorOptions& opt = {});

struct Division {
  QuadraticForm quotient;
  double residual = 0.0;  // ‖c − ℓ_u q‖_F / ‖c‖_F, 0 for c = 0
};

/// Least-squares q with c ≈ ⟨u,x⟩ q(x) in coefficient space.
Division divide_by_linear(const CubicForm& c, const Vec& u);

/// Normals of the real hyperplanes in the zero set of q when q splits into
/// real linear factors (0, 1 or 2 normals).
std::vector<Vec> quadratic_factor_split(const QuadraticForm& q, double rel_tol = 1e-10);

struct RotationalFit {
  double a = 0.0;
  double b = 0.0;
  double residual = 0.0;
};

/// Least squares of q ≈ a·I + b·axis axisᵀ; residual relative to ‖q‖_F.
RotationalFit rotational_fit(const QuadraticForm& q, const Vec& axis);

/// (‖c‖_F, ‖t‖ with t_k = Σ_j c_jjk, ascending eigenvalues of Σ_jk c_ijk c_ljk).
Vec orthogonal_invariants(const CubicForm& c);

}  // namespace affrev
