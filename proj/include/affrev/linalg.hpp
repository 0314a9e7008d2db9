#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace affrev {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Thrown for violated preconditions and failed numerical stages.
/// `stage` names the pipeline step so reports can carry it.
class Error : public std::runtime_error {
 public:
  Error(std::string stage, const std::string& what)
      : std::runtime_error(what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Flips v so that its first entry with |v_i| > eps is positive.
Vec canonical_sign(const Vec& v, double eps = 1e-12);

/// Orthonormal basis (n × n−1) of normal^⊥, taken from the Householder
/// reflector that maps the normal onto ±e_0. Deterministic in the input.
Mat householder_complement(const Vec& normal);

/// Orthonormal basis of the orthogonal complement of span(columns of B).
/// B must have orthonormal columns (or be empty).
Mat orthogonal_complement(const Mat& B);

/// Symmetric PD matrix power A^p through the eigendecomposition.
Mat spd_power(const Mat& A, double p);

/// ‖AᵀA − I‖ max entry; used to validate orthonormal bases.
double orthonormality_error(const Mat& A);

/// Orthonormal basis of the column span of A, rank-revealed at rel_tol.
Mat orthonormal_span(const Mat& A, double rel_tol = 1e-10);

/// Orthonormal basis of the null space of A (columns), rank-revealed at rel_tol.
Mat null_space(const Mat& A, double rel_tol = 1e-9);

/// Angle between two lines through the origin, in [0, π/2].
double line_angle(const Vec& a, const Vec& b);

}  // namespace affrev
