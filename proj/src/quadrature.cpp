#include "affrev/quadrature.hpp"

#include <cmath>

namespace affrev {

void gauss_legendre(int q, std::vector<double>& nodes, std::vector<double>& weights) {
  if (q < 1) throw Error("quadrature", "Gauss-Legendre needs q >= 1");
  nodes.assign(q, 0.0);
  weights.assign(q, 0.0);
  for (int i = 0; i < q; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (q + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= q; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = q * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

double normal_quantile(double p) {
  if (!(p > 0 && p < 1)) throw Error("quadrature", "normal quantile argument outside (0, 1)");
  // Acklam's rational approximation, then one Halley step against erfc.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                             1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                             6.680131188771972e+01, -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                             -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                             3.754408661907416e+00};
  double x;
  if (p < 0.02425) {
    const double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p > 1 - 0.02425) {
    const double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  }
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2 * M_PI) * std::exp(x * x / 2);
  return x - u / (1 + x * u / 2);
}

SphereRule fibonacci_sphere(int dim, int count) {
  if (dim < 2 || count < 1) throw Error("quadrature", "sphere net needs dim >= 2 and count >= 1");
  SphereRule r;
  r.nodes.reserve(count);
  r.weights.assign(count, 1.0 / count);
  if (dim == 2) {
    for (int i = 0; i < count; ++i) {
      const double a = 2 * M_PI * (i + 0.5) / count;
      Vec v(2);
      v << std::cos(a), std::sin(a);
      r.nodes.push_back(v);
    }
  } else if (dim == 3) {
    const double golden = (1 + std::sqrt(5.0)) / 2;
    for (int i = 0; i < count; ++i) {
      const double z = 1 - (2.0 * i + 1) / count;
      const double s = std::sqrt(std::max(0.0, 1 - z * z));
      const double a = 2 * M_PI * std::fmod(i / golden, 1.0);
      Vec v(3);
      v << s * std::cos(a), s * std::sin(a), z;
      r.nodes.push_back(v);
    }
  } else {
    // Generalized golden ratio: the root of x^{d+1} = x + 1.
    double g = 2.0;
    for (int it = 0; it < 64; ++it) g = std::pow(1 + g, 1.0 / (dim + 1));
    std::vector<double> alpha(dim);
    for (int k = 0; k < dim; ++k) alpha[k] = std::fmod(std::pow(1 / g, k + 1), 1.0);
    for (int i = 0; i < count; ++i) {
      Vec v(dim);
      for (int k = 0; k < dim; ++k) v[k] = normal_quantile(std::fmod(0.5 + alpha[k] * (i + 1), 1.0));
      r.nodes.push_back(v.normalized());
    }
  }
  return r;
}

namespace {

// Gauss rule for the weight (1 − t²)^{λ−1/2} on [−1, 1] from the
// eigen-decomposition of the Jacobi matrix.
void gauss_gegenbauer(int q, double lambda, std::vector<double>& nodes, std::vector<double>& weights) {
  Mat J = Mat::Zero(q, q);
  for (int n = 1; n < q; ++n) {
    const double b = n * (n + 2 * lambda - 1) / (4 * (n + lambda) * (n + lambda - 1));
    J(n, n - 1) = J(n - 1, n) = std::sqrt(b);
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(J);
  const double mu0 = std::sqrt(M_PI) * std::tgamma(lambda + 0.5) / std::tgamma(lambda + 1);
  nodes.resize(q);
  weights.resize(q);
  for (int i = 0; i < q; ++i) {
    nodes[i] = es.eigenvalues()[i];
    weights[i] = mu0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
  }
}

}  // namespace

SphereRule gauss_product_sphere(int dim, int q) {
  if (dim < 2 || q < 1) throw Error("quadrature", "product rule needs dim >= 2 and q >= 1");
  const int naz = 2 * q;
  const int npolar = dim - 2;
  // Polar angle k carries the weight sin^{dim−2−k}; in t = cos φ that is
  // (1 − t²)^{(dim−3−k)/2}, a Gegenbauer weight with λ = (dim−2−k)/2.
  std::vector<std::vector<double>> t(npolar), w(npolar);
  for (int k = 0; k < npolar; ++k) gauss_gegenbauer(q, 0.5 * (dim - 2 - k), t[k], w[k]);
  SphereRule r;
  std::vector<int> idx(npolar, 0);
  double total = 0.0;
  while (true) {
    double wp = 1.0;
    std::vector<double> s(npolar), c(npolar);
    for (int k = 0; k < npolar; ++k) {
      c[k] = t[k][idx[k]];
      s[k] = std::sqrt(std::max(0.0, 1 - c[k] * c[k]));
      wp *= w[k][idx[k]];
    }
    for (int j = 0; j < naz; ++j) {
      const double th = 2 * M_PI * (j + 0.5) / naz;
      Vec v(dim);
      double prod = 1.0;
      for (int k = 0; k < npolar; ++k) {
        v[k] = prod * c[k];
        prod *= s[k];
      }
      v[dim - 2] = prod * std::cos(th);
      v[dim - 1] = prod * std::sin(th);
      r.nodes.push_back(v);
      r.weights.push_back(wp);
      total += wp;
    }
    int k = npolar - 1;
    while (k >= 0 && ++idx[k] == q) idx[k--] = 0;
    if (k < 0) break;
  }
  for (double& x : r.weights) x /= total;
  return r;
}

}  // namespace affrev
