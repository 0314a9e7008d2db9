#pragma once

#include "affrev/linalg.hpp"
#include "affrev/tensor3.hpp"

#include <memory>
#include <vector>

namespace affrev {

/// Value and derivatives of a scalar field at a point, up to `order`.
struct FieldJet {
  int order = 0;
  double value = 0.0;
  Vec grad;
  Mat hess;
  Tensor3 third;
};

/// Univariate polynomial Σ a_d t^d, lowest degree first.
struct RayPolynomial {
  std::vector<double> coeffs;

  double operator()(double t) const;
  /// p(t) and p'(t) by Horner.
  void eval(double t, double& p, double& dp) const;
};

/// Scalar field with exact derivative oracles up to order 3. Every
/// field also restricts exactly to rays through the origin, which is what
/// radial root-finding runs on.
class ScalarField {
 public:
  virtual ~ScalarField() = default;
  virtual int dim() const = 0;
  virtual double value(const Vec& x) const = 0;
  virtual FieldJet jet(const Vec& x, int order) const = 0;
  /// t ↦ F(t·d) as a polynomial in t (d need not be unit).
  virtual RayPolynomial ray(const Vec& d) const = 0;
};

using FieldPtr = std::shared_ptr<const ScalarField>;

/// Sparse multivariate polynomial.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  size_t terms() const { return coeffs_.size(); }
  int degree() const { return degree_; }

  /// Adds c·∏ x_i^{e_i}, merging with an existing equal monomial.
  void add_term(double c, const std::vector<int>& exps);
  int exponent(size_t term, int var) const { return exps_[term * dim_ + var]; }
  double coeff(size_t term) const { return coeffs_[term]; }

  double value(const Vec& x) const;
  FieldJet jet(const Vec& x, int order) const;
  RayPolynomial ray(const Vec& d) const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial scaled(double s) const;

  /// xᵀQx + c.
  static Polynomial quadratic(const Mat& Q, double c);
  /// Σ a_k x_var^k.
  static Polynomial univariate(int dim, int var, const std::vector<double>& a);
  /// True iff every monomial has even total degree.
  bool is_even() const;

 private:
  int dim_ = 0;
  int degree_ = 0;
  std::vector<int> exps_;  // terms × dim
  std::vector<double> coeffs_;
};

class PolynomialField final : public ScalarField {
 public:
  explicit PolynomialField(Polynomial p) : p_(std::move(p)) {}
  int dim() const override { return p_.dim(); }
  double value(const Vec& x) const override { return p_.value(x); }
  FieldJet jet(const Vec& x, int order) const override { return p_.jet(x, order); }
  RayPolynomial ray(const Vec& d) const override { return p_.ray(d); }
  const Polynomial& polynomial() const { return p_; }

 private:
  Polynomial p_;
};

/// G(y) = F(M y) for M of shape dim(F) × dim(G). Derivatives follow the
/// chain rule exactly.
class PullbackField final : public ScalarField {
 public:
  PullbackField(FieldPtr inner, Mat M);
  int dim() const override { return static_cast<int>(M_.cols()); }
  double value(const Vec& y) const override { return inner_->value(M_ * y); }
  FieldJet jet(const Vec& y, int order) const override;
  RayPolynomial ray(const Vec& d) const override { return inner_->ray(M_ * d); }
  const FieldPtr& inner() const { return inner_; }
  const Mat& matrix() const { return M_; }

 private:
  FieldPtr inner_;
  Mat M_;
};

/// a·F + b·G.
class SumField final : public ScalarField {
 public:
  SumField(double a, FieldPtr f, double b, FieldPtr g);
  int dim() const override { return f_->dim(); }
  double value(const Vec& x) const override { return a_ * f_->value(x) + b_ * g_->value(x); }
  FieldJet jet(const Vec& x, int order) const override;
  RayPolynomial ray(const Vec& d) const override;

 private:
  double a_, b_;
  FieldPtr f_, g_;
};

/// Pullback through M, flattening nested pullbacks into one matrix.
FieldPtr pullback(const FieldPtr& f, const Mat& M);

}  // namespace affrev
