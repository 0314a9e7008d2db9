#pragma once

#include "affrev/linalg.hpp"

namespace affrev {

/// Linear hyperplane normal^⊥ through the origin. The normal is stored
/// unit length with its first nonzero coordinate positive, so ±normal
/// produce the same object.
class Hyperplane {
 public:
  explicit Hyperplane(const Vec& normal);

  int ambient_dim() const { return static_cast<int>(normal_.size()); }
  const Vec& normal() const { return normal_; }
  /// Orthonormal basis (ambient × ambient−1), Householder complement of the normal.
  Mat basis() const { return householder_complement(normal_); }

 private:
  Vec normal_;
};

}  // namespace affrev
