#pragma once

#include "affrev/linalg.hpp"

#include <vector>

namespace affrev {

/// Nodes on the unit sphere S^{dim−1} with weights summing to 1, so that
/// Σ w_i g(θ_i) approximates the mean of g over the sphere.
struct SphereRule {
  std::vector<Vec> nodes;
  std::vector<double> weights;
  size_t size() const { return nodes.size(); }
};

/// Gauss–Legendre nodes and weights on [−1, 1].
void gauss_legendre(int q, std::vector<double>& nodes, std::vector<double>& weights);

/// Equal-weight quasi-uniform net. dim 2: equally spaced angles; dim 3: the
/// spherical Fibonacci spiral; dim ≥ 4: a Kronecker sequence pushed through
/// the Gaussian inverse CDF and normalized.
SphereRule fibonacci_sphere(int dim, int count);

/// Tensor-product rule in hyperspherical angles: q Gauss–Gegenbauer nodes in
/// the cosine of each polar angle, 2q equispaced azimuths. Spectrally accurate for analytic
/// integrands; used where moments must be resolved to ~1e−10.
SphereRule gauss_product_sphere(int dim, int q);

/// Inverse of the standard normal CDF.
double normal_quantile(double p);

}  // namespace affrev
