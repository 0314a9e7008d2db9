#include "affrev/field.hpp"

#include <algorithm>
#include <map>

namespace affrev {

double RayPolynomial::operator()(double t) const {
  double p = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) p = p * t + *it;
  return p;
}

void RayPolynomial::eval(double t, double& p, double& dp) const {
  p = 0.0;
  dp = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
    dp = dp * t + p;
    p = p * t + *it;
  }
}

void Polynomial::add_term(double c, const std::vector<int>& exps) {
  if (static_cast<int>(exps.size()) != dim_) throw Error("polynomial", "exponent size mismatch");
  if (c == 0.0) return;
  const size_t n = coeffs_.size();
  for (size_t t = 0; t < n; ++t) {
    if (std::equal(exps.begin(), exps.end(), exps_.begin() + t * dim_)) {
      coeffs_[t] += c;
      return;
    }
  }
  exps_.insert(exps_.end(), exps.begin(), exps.end());
  coeffs_.push_back(c);
  int deg = 0;
  for (int e : exps) deg += e;
  degree_ = std::max(degree_, deg);
}

namespace {

// powers[v][k] = x_v^k for k ≤ deg
std::vector<double> power_table(const Vec& x, int deg) {
  const int m = static_cast<int>(x.size());
  std::vector<double> p(static_cast<size_t>(m) * (deg + 1));
  for (int v = 0; v < m; ++v) {
    double acc = 1.0;
    for (int k = 0; k <= deg; ++k) {
      p[v * (deg + 1) + k] = acc;
      acc *= x[v];
    }
  }
  return p;
}

double falling(int e, int d) {
  double r = 1.0;
  for (int i = 0; i < d; ++i) r *= (e - i);
  return r;
}

}  // namespace

double Polynomial::value(const Vec& x) const {
  const auto pw = power_table(x, degree_);
  double s = 0.0;
  for (size_t t = 0; t < coeffs_.size(); ++t) {
    double m = coeffs_[t];
    for (int v = 0; v < dim_; ++v) m *= pw[v * (degree_ + 1) + exps_[t * dim_ + v]];
    s += m;
  }
  return s;
}

FieldJet Polynomial::jet(const Vec& x, int order) const {
  const int m = dim_;
  const int D = degree_ + 1;
  const auto pw = power_table(x, degree_);
  FieldJet j;
  j.order = order;
  j.grad = Vec::Zero(m);
  if (order >= 2) j.hess = Mat::Zero(m, m);
  if (order >= 3) j.third = Tensor3(m);

  std::vector<int> d(m, 0);
  // Derivative of term t with multiplicities d.
  auto deriv = [&](size_t t) {
    double r = coeffs_[t];
    for (int v = 0; v < m; ++v) {
      const int e = exps_[t * m + v];
      if (d[v] > e) return 0.0;
      if (d[v]) r *= falling(e, d[v]);
      r *= pw[v * D + (e - d[v])];
    }
    return r;
  };

  for (size_t t = 0; t < coeffs_.size(); ++t) {
    j.value += deriv(t);
    if (order < 1) continue;
    for (int a = 0; a < m; ++a) {
      if (exps_[t * m + a] == 0) continue;
      ++d[a];
      j.grad[a] += deriv(t);
      if (order >= 2) {
        for (int b = a; b < m; ++b) {
          if (exps_[t * m + b] == 0) continue;
          ++d[b];
          const double hb = deriv(t);
          j.hess(a, b) += hb;
          if (order >= 3) {
            for (int c = b; c < m; ++c) {
              if (exps_[t * m + c] == 0) continue;
              ++d[c];
              j.third(a, b, c) += deriv(t);
              --d[c];
            }
          }
          --d[b];
        }
      }
      --d[a];
    }
  }
  if (order >= 2) {
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < a; ++b) j.hess(a, b) = j.hess(b, a);
  }
  if (order >= 3) {
    for (int a = 0; a < m; ++a)
      for (int b = a; b < m; ++b)
        for (int c = b; c < m; ++c) {
          const double v = j.third(a, b, c);
          j.third(a, c, b) = j.third(b, a, c) = j.third(b, c, a) = v;
          j.third(c, a, b) = j.third(c, b, a) = v;
        }
  }
  return j;
}

RayPolynomial Polynomial::ray(const Vec& dir) const {
  RayPolynomial r;
  r.coeffs.assign(degree_ + 1, 0.0);
  const auto pw = power_table(dir, degree_);
  for (size_t t = 0; t < coeffs_.size(); ++t) {
    double c = coeffs_[t];
    int deg = 0;
    for (int v = 0; v < dim_; ++v) {
      const int e = exps_[t * dim_ + v];
      c *= pw[v * (degree_ + 1) + e];
      deg += e;
    }
    r.coeffs[deg] += c;
  }
  return r;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  if (o.dim_ != dim_) throw Error("polynomial", "dimension mismatch in sum");
  Polynomial r = *this;
  for (size_t t = 0; t < o.coeffs_.size(); ++t) {
    std::vector<int> e(o.exps_.begin() + t * dim_, o.exps_.begin() + (t + 1) * dim_);
    r.add_term(o.coeffs_[t], e);
  }
  return r;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  if (o.dim_ != dim_) throw Error("polynomial", "dimension mismatch in product");
  std::map<std::vector<int>, double> acc;
  for (size_t a = 0; a < coeffs_.size(); ++a)
    for (size_t b = 0; b < o.coeffs_.size(); ++b) {
      std::vector<int> e(dim_);
      for (int v = 0; v < dim_; ++v) e[v] = exps_[a * dim_ + v] + o.exps_[b * dim_ + v];
      acc[e] += coeffs_[a] * o.coeffs_[b];
    }
  Polynomial r(dim_);
  for (const auto& [e, c] : acc) r.add_term(c, e);
  return r;
}

Polynomial Polynomial::scaled(double s) const {
  Polynomial r = *this;
  for (double& c : r.coeffs_) c *= s;
  return r;
}

Polynomial Polynomial::quadratic(const Mat& Q, double c) {
  const int m = static_cast<int>(Q.rows());
  Polynomial p(m);
  std::vector<int> e(m, 0);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) {
      std::fill(e.begin(), e.end(), 0);
      ++e[i];
      ++e[j];
      p.add_term(i == j ? Q(i, i) : Q(i, j) + Q(j, i), e);
    }
  std::fill(e.begin(), e.end(), 0);
  p.add_term(c, e);
  return p;
}

Polynomial Polynomial::univariate(int dim, int var, const std::vector<double>& a) {
  Polynomial p(dim);
  std::vector<int> e(dim, 0);
  for (size_t k = 0; k < a.size(); ++k) {
    e[var] = static_cast<int>(k);
    p.add_term(a[k], e);
  }
  return p;
}

bool Polynomial::is_even() const {
  for (size_t t = 0; t < coeffs_.size(); ++t) {
    int deg = 0;
    for (int v = 0; v < dim_; ++v) deg += exps_[t * dim_ + v];
    if (deg % 2) return false;
  }
  return true;
}

PullbackField::PullbackField(FieldPtr inner, Mat M) : inner_(std::move(inner)), M_(std::move(M)) {
  if (M_.rows() != inner_->dim()) throw Error("field", "pullback matrix rows must equal inner dim");
}

FieldJet PullbackField::jet(const Vec& y, int order) const {
  FieldJet in = inner_->jet(M_ * y, order);
  FieldJet out;
  out.order = order;
  out.value = in.value;
  if (order >= 1) out.grad = M_.transpose() * in.grad;
  if (order >= 2) out.hess = M_.transpose() * in.hess * M_;
  if (order >= 3) out.third = in.third.pullback(M_);
  return out;
}

SumField::SumField(double a, FieldPtr f, double b, FieldPtr g)
    : a_(a), b_(b), f_(std::move(f)), g_(std::move(g)) {
  if (f_->dim() != g_->dim()) throw Error("field", "sum of fields with different dims");
}

FieldJet SumField::jet(const Vec& x, int order) const {
  FieldJet p = f_->jet(x, order);
  FieldJet q = g_->jet(x, order);
  p.value = a_ * p.value + b_ * q.value;
  if (order >= 1) p.grad = a_ * p.grad + b_ * q.grad;
  if (order >= 2) p.hess = a_ * p.hess + b_ * q.hess;
  if (order >= 3) {
    p.third *= a_;
    q.third *= b_;
    p.third += q.third;
  }
  return p;
}

RayPolynomial SumField::ray(const Vec& d) const {
  RayPolynomial p = f_->ray(d);
  RayPolynomial q = g_->ray(d);
  if (q.coeffs.size() > p.coeffs.size()) p.coeffs.resize(q.coeffs.size(), 0.0);
  for (auto& c : p.coeffs) c *= a_;
  for (size_t i = 0; i < q.coeffs.size(); ++i) p.coeffs[i] += b_ * q.coeffs[i];
  return p;
}

FieldPtr pullback(const FieldPtr& f, const Mat& M) {
  if (auto pb = std::dynamic_pointer_cast<const PullbackField>(f)) {
    return std::make_shared<PullbackField>(pb->inner(), pb->matrix() * M);
  }
  return std::make_shared<PullbackField>(f, M);
}

}  // namespace affrev
