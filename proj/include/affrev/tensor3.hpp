#pragma once

#include "affrev/linalg.hpp"

#include <vector>

namespace affrev {

/// Dense m×m×m array with row-major storage. Used both for third
/// derivatives and as the coefficient store of cubic forms.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(int dim) : dim_(dim), data_(static_cast<size_t>(dim) * dim * dim, 0.0) {}

  int dim() const { return dim_; }
  double operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }
  double& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  /// Sets every entry to its average over the 6 index permutations.
  void symmetrize();
  /// Max over entries of |T_ijk − T_σ(ijk)|.
  double asymmetry() const;
  double frobenius() const;

  /// Σ T_ijk x_i x_j x_k over all m³ index triples.
  double contract3(const Vec& x) const;
  /// v_i = Σ_jk T_ijk x_j x_k.
  Vec contract2(const Vec& x) const;
  /// M_ij = Σ_k T_ijk x_k.
  Mat contract1(const Vec& x) const;

  /// T'_abc = Σ T_ijk E_ia E_jb E_kc for E of shape m × m'.
  Tensor3 pullback(const Mat& E) const { return contract_modes(E, E, E); }
  /// T'_abc = Σ T_ijk A_ia B_jb C_kc; A, B, C share the same shape.
  Tensor3 contract_modes(const Mat& A, const Mat& B, const Mat& C) const;

  Tensor3& operator+=(const Tensor3& o);
  Tensor3& operator*=(double s);

  /// Symmetrized outer product a⊗b⊗c.
  static Tensor3 sym_outer(const Vec& a, const Vec& b, const Vec& c);
  /// Symmetrized u⊗Q; the cubic ⟨u,x⟩·xᵀQx.
  static Tensor3 sym_linear_times_quadratic(const Vec& u, const Mat& Q);

 private:
  size_t index(int i, int j, int k) const {
    return (static_cast<size_t>(i) * dim_ + j) * dim_ + k;
  }
  int dim_ = 0;
  std::vector<double> data_;
};

}  // namespace affrev
