#pragma once

#include "affrev/linalg.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace affrev {

/// Seeded generator with platform-independent uniform and normal draws.
/// std::normal_distribution is implementation-defined, so it is avoided.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  Vec normal_vec(int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  Vec unit_vec(int n) {
    Vec v = normal_vec(n);
    while (v.norm() < 1e-12) v = normal_vec(n);
    return v.normalized();
  }

  /// Haar-ish random orthogonal matrix via QR of a Gaussian matrix.
  Mat orthogonal(int n) {
    Mat G(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) G(i, j) = normal();
    Eigen::HouseholderQR<Mat> qr(G);
    Mat Q = qr.householderQ();
    Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j)
      if (R(j, j) < 0) Q.col(j) *= -1.0;
    return Q;
  }

  std::uint64_t next_u64() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace affrev
