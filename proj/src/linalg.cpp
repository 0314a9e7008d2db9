#include "affrev/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace affrev {

Vec canonical_sign(const Vec& v, double eps) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > eps) return v[i] < 0 ? Vec(-v) : v;
  }
  return v;
}

Mat householder_complement(const Vec& normal) {
  const Eigen::Index n = normal.size();
  const double nn = normal.norm();
  if (!(nn > 0)) throw Error("linalg", "householder_complement: zero normal");
  Vec u = normal / nn;
  Vec v = u;
  v[0] += (u[0] >= 0 ? 1.0 : -1.0);
  const double vv = v.squaredNorm();
  Mat Q = Mat::Identity(n, n) - (2.0 / vv) * v * v.transpose();
  return Q.rightCols(n - 1);
}

Mat orthogonal_complement(const Mat& B) {
  const Eigen::Index n = B.rows();
  if (B.cols() == 0) return Mat::Identity(n, n);
  // projector singular values are 0 or 1, so the cut is absolute
  Eigen::JacobiSVD<Mat> svd(Mat::Identity(n, n) - B * B.transpose(), Eigen::ComputeThinU);
  Eigen::Index r = 0;
  while (r < n && svd.singularValues()[r] > 0.5) ++r;
  return svd.matrixU().leftCols(r);
}

Mat spd_power(const Mat& A, double p) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (A + A.transpose()));
  const Vec& ev = es.eigenvalues();
  if (ev.minCoeff() <= 0) throw Error("linalg", "spd_power: matrix not positive definite");
  Vec d = ev.array().pow(p).matrix();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

double orthonormality_error(const Mat& A) {
  if (A.cols() == 0) return 0.0;
  return (A.transpose() * A - Mat::Identity(A.cols(), A.cols())).cwiseAbs().maxCoeff();
}

Mat orthonormal_span(const Mat& A, double rel_tol) {
  if (A.cols() == 0) return Mat(A.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU);
  const Vec& s = svd.singularValues();
  const double smax = s.size() ? s[0] : 0.0;
  Eigen::Index r = 0;
  while (r < s.size() && s[r] > rel_tol * std::max(smax, 1e-300)) ++r;
  if (smax == 0.0) r = 0;
  return svd.matrixU().leftCols(r);
}

Mat null_space(const Mat& A, double rel_tol) {
  const Eigen::Index n = A.cols();
  if (A.rows() == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  const double smax = s.size() ? s[0] : 0.0;
  Eigen::Index r = 0;
  while (r < s.size() && s[r] > rel_tol * std::max(smax, 1e-300)) ++r;
  if (smax == 0.0) r = 0;
  return svd.matrixV().rightCols(n - r);
}

double line_angle(const Vec& a, const Vec& b) {
  const double c = std::abs(a.normalized().dot(b.normalized()));
  // acos loses precision near 1; use the sine form instead.
  const Vec an = a.normalized();
  const Vec bn = b.normalized();
  const Vec perp = bn - an.dot(bn) * an;
  return std::atan2(perp.norm(), c);
}

}  // namespace affrev
