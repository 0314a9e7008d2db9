#include "affrev/tensor3.hpp"

#include <algorithm>
#include <cmath>

namespace affrev {

void Tensor3::symmetrize() {
  const int m = dim_;
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j)
      for (int k = j; k < m; ++k) {
        const double s = ((*this)(i, j, k) + (*this)(i, k, j) + (*this)(j, i, k) +
                          (*this)(j, k, i) + (*this)(k, i, j) + (*this)(k, j, i)) /
                         6.0;
        (*this)(i, j, k) = (*this)(i, k, j) = (*this)(j, i, k) = s;
        (*this)(j, k, i) = (*this)(k, i, j) = (*this)(k, j, i) = s;
      }
}

double Tensor3::asymmetry() const {
  double e = 0.0;
  const int m = dim_;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        const double v = (*this)(i, j, k);
        e = std::max({e, std::abs(v - (*this)(i, k, j)), std::abs(v - (*this)(j, i, k)),
                      std::abs(v - (*this)(k, j, i))});
      }
  return e;
}

double Tensor3::frobenius() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

double Tensor3::contract3(const Vec& x) const {
  double s = 0.0;
  const int m = dim_;
  for (int i = 0; i < m; ++i) {
    double si = 0.0;
    for (int j = 0; j < m; ++j) {
      double sj = 0.0;
      for (int k = 0; k < m; ++k) sj += (*this)(i, j, k) * x[k];
      si += sj * x[j];
    }
    s += si * x[i];
  }
  return s;
}

Vec Tensor3::contract2(const Vec& x) const {
  const int m = dim_;
  Vec v = Vec::Zero(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double sj = 0.0;
      for (int k = 0; k < m; ++k) sj += (*this)(i, j, k) * x[k];
      v[i] += sj * x[j];
    }
  return v;
}

Mat Tensor3::contract1(const Vec& x) const {
  const int m = dim_;
  Mat M = Mat::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) M(i, j) += (*this)(i, j, k) * x[k];
  return M;
}

Tensor3 Tensor3::contract_modes(const Mat& A, const Mat& B, const Mat& E) const {
  const int m = dim_;
  const int p = static_cast<int>(E.cols());
  // Contract one index at a time: m·m·m·p + m·m·p·p + m·p·p·p work.
  std::vector<double> a(static_cast<size_t>(m) * m * p, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        const double t = (*this)(i, j, k);
        if (t == 0.0) continue;
        for (int c = 0; c < p; ++c) a[(static_cast<size_t>(i) * m + j) * p + c] += t * E(k, c);
      }
  std::vector<double> b(static_cast<size_t>(m) * p * p, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int c = 0; c < p; ++c) {
        const double t = a[(static_cast<size_t>(i) * m + j) * p + c];
        if (t == 0.0) continue;
        for (int bb = 0; bb < p; ++bb) b[(static_cast<size_t>(i) * p + bb) * p + c] += t * B(j, bb);
      }
  Tensor3 out(p);
  for (int i = 0; i < m; ++i)
    for (int bb = 0; bb < p; ++bb)
      for (int c = 0; c < p; ++c) {
        const double t = b[(static_cast<size_t>(i) * p + bb) * p + c];
        if (t == 0.0) continue;
        for (int aa = 0; aa < p; ++aa) out(aa, bb, c) += t * A(i, aa);
      }
  return out;
}

Tensor3& Tensor3::operator+=(const Tensor3& o) {
  for (size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Tensor3& Tensor3::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Tensor3 Tensor3::sym_outer(const Vec& a, const Vec& b, const Vec& c) {
  const int m = static_cast<int>(a.size());
  Tensor3 t(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) t(i, j, k) = a[i] * b[j] * c[k];
  t.symmetrize();
  return t;
}

Tensor3 Tensor3::sym_linear_times_quadratic(const Vec& u, const Mat& Q) {
  const int m = static_cast<int>(u.size());
  Tensor3 t(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) t(i, j, k) = u[i] * Q(j, k);
  t.symmetrize();
  return t;
}

}  // namespace affrev
