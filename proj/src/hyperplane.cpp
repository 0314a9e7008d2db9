#include "affrev/hyperplane.hpp"

#include <cmath>

namespace affrev {

Hyperplane::Hyperplane(const Vec& normal) {
  const double n = normal.norm();
  if (!(n > 0) || !std::isfinite(n)) throw Error("hyperplane", "normal must be a nonzero finite vector");
  normal_ = canonical_sign(normal / n);
}

}  // namespace affrev
