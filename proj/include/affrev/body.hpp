#pragma once

#include "affrev/field.hpp"
#include "affrev/forms.hpp"
#include "affrev/hyperplane.hpp"
#include "affrev/linalg.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace affrev {

/// Star body {F ≤ 0} around the origin with exact derivative oracles of F.
/// Immutable; copies share the field.
class SmoothBody {
 public:
  SmoothBody(FieldPtr field, double radius_bound, std::string family, bool symmetric = true);

  int dim() const { return field_->dim(); }
  const ScalarField& field() const { return *field_; }
  const FieldPtr& field_ptr() const { return field_; }
  /// Upper bound on the radial function used to bracket roots.
  double radius_bound() const { return radius_bound_; }
  const std::string& family() const { return family_; }
  bool symmetric() const { return symmetric_; }

  /// Construction ground truth, when the generator knows it.
  const std::optional<Vec>& ground_truth_axis() const { return axis_; }
  SmoothBody with_ground_truth_axis(const Vec& axis) const;

  /// The body A·K, i.e. F(A⁻¹x).
  SmoothBody transformed(const Mat& A) const;

 private:
  FieldPtr field_;
  double radius_bound_;
  std::string family_;
  bool symmetric_;
  std::optional<Vec> axis_;
};

struct BoundaryPoint {
  Vec point;
  Vec direction;
  double radius = 0.0;
  bool sff_pd = false;
};

struct SectionBody {
  SmoothBody parent;
  Hyperplane hyperplane;
  Mat embed;  // n × (n−1), orthonormal columns spanning the hyperplane
  SmoothBody body;
};

struct SecondFundamentalForm {
  Mat tangent_basis;  // n × (n−1) orthonormal
  Mat shape;          // symmetric (n−1) × (n−1), outward normal convention
  Vec curvatures;     // ascending
};

/// Local graph of a level set over an affine frame: boundary points are
/// p + W y + s·d with s = f(y). Derivatives of f come from implicit
/// differentiation of G(y, s) = F(p + W y + s d).
class GraphChart {
 public:
  struct Jet {
    double value = 0.0;
    Vec grad;
    Mat hess;
    Tensor3 third;
  };

  GraphChart(FieldPtr field, Vec origin, Mat tangent, Vec transversal);

  int dim() const { return static_cast<int>(W_.cols()); }
  const Vec& origin() const { return p_; }
  const Mat& tangent() const { return W_; }
  const Vec& transversal() const { return d_; }
  /// [W, d]: chart coordinates (y, s) → world displacement from origin.
  Mat frame() const;

  /// Solves G(y, s) = 0 for s by Newton from `guess`.
  double value(const Vec& y, double guess = 0.0) const;
  /// f and its derivatives up to order 3 at y.
  Jet derivatives(const Vec& y) const;

 private:
  FieldPtr field_;
  Vec p_;
  Mat W_;
  Vec d_;
};

/// Canonical third-order jet at a boundary point: chart sending p → 0,
/// O → e_n, T_p∂K → e_n^⊥ with Hess f(0) = I, and the cubic part of f.
struct Jet3 {
  BoundaryPoint base;
  Mat to_world;    // n × n, [W, −p]; X = p + to_world · z
  Mat from_world;  // inverse of to_world
  Mat tangent_basis;  // orthonormal U with W = U L
  Mat normalizer;     // L = (U-chart Hessian)^{−1/2}
  CubicForm cubic;
  double hessian_error = 0.0;  // max |Hess f(0) − I|
  GraphChart chart;
};

SmoothBody make_ellipsoid(const Mat& Q);

/// Body {‖y_⊥‖² ≤ r(y_a)²(1 − y_a²)} with r(t) = Σ_k profile[k] t^{2k},
/// mapped by `conjugator`.
SmoothBody make_revolution_body(const std::vector<double>& profile, int axis_index, const Mat& conjugator);

struct Harmonics {
  enum class Kind { Generic, AxisInvariant };
  Kind kind = Kind::Generic;
  std::uint64_t seed = 0;
  int axis_index = 0;
};

/// Even polynomial of degree ≤ 4 without constant term, normalized to unit
/// RMS over the unit sphere. AxisInvariant builds it from ‖x_⊥‖² and x_a.
Polynomial perturbation_polynomial(int dim, const Harmonics& h);

/// F_base + amplitude·P; rejects the result if it is no longer star-shaped.
SmoothBody make_perturbed_body(const SmoothBody& base, double amplitude, const Polynomial& P);
SmoothBody make_perturbed_body(const SmoothBody& base, double amplitude, const Harmonics& h);

/// Radial function ρ(u): the first root of t ↦ F(t·u/‖u‖) on (0, bound].
double radial(const SmoothBody& body, const Vec& direction);
/// Number of sign changes of t ↦ F(tu) on (0, reach] at `samples` steps;
/// reach ≤ 0 means twice the radius bound.
int radial_sign_changes(const SmoothBody& body, const Vec& direction, int samples = 512, double reach = 0.0);

BoundaryPoint boundary_project(const SmoothBody& body, const Vec& direction);

SectionBody section(const SmoothBody& body, const Hyperplane& hp);

SecondFundamentalForm second_fundamental_form(const SmoothBody& body, const Vec& point);

Jet3 canonical_jet(const SmoothBody& body, const BoundaryPoint& p);
/// Same, with a caller-chosen orthonormal basis of the tangent space.
Jet3 canonical_jet(const SmoothBody& body, const BoundaryPoint& p, const Mat& tangent_basis);

}  // namespace affrev
