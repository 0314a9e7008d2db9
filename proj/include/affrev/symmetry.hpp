#pragma once

#include "affrev/blaschke.hpp"
#include "affrev/body.hpp"
#include "affrev/linalg.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace affrev {

/// 2·proj_W(a) − a for W with orthonormal columns.
Vec reflect_across(const Mat& W, const Vec& a);

/// Rotates the (u, v) component of a by `angle` (from u towards v).
Vec rotate_in_plane(const Vec& u, const Vec& v, double angle, const Vec& a);

struct CompositionCheck {
  Vec lhs;  // Ref_{ℓ2,w}(Ref_{ℓ1,w}(a))
  Vec rhs;  // Rot_{ℓ1,ℓ2}^{2∠(ℓ1,ℓ2)}(a)
};

/// Each Ref is the reflection across the hyperplane spanned by ⟨ℓ_i, w⟩
/// and the orthogonal complement of ⟨ℓ1, ℓ2, w⟩.
CompositionCheck reflection_composition_check(const Vec& l1, const Vec& l2, const Vec& w, const Vec& a);

struct IsotropicFrame {
  Mat transform;  // T; the whitened body is T·K
  Mat moment;     // volume second moment of T·K, ≈ I/m
  double off_identity = 0.0;  // max |moment/λ − I|
  int iterations = 0;
  int quadrature_q = 0;
};

struct IsotropicOptions {
  int q = 0;  // product-rule order; 0 picks a default by dimension
  double tol = 1e-8;
  int max_iterations = 8;
};

/// Mean over the sphere of ρ(θ)^{m+2} θθᵀ, proportional to ∫_K x xᵀ dx;
/// the unit ball has moment I/m.
Mat volume_moment(const SmoothBody& body, int q, int extra_power = 0);

IsotropicFrame isotropic_normalize(const SmoothBody& body, const IsotropicOptions& opt = {});
IsotropicFrame isotropic_normalize(const SectionBody& s, const IsotropicOptions& opt = {});

struct RevolutionStructure {
  int axis_dim = 1;
  Mat fixed_space;  // m × k, orthonormal, body coordinates
  Mat conjugator;   // T: T·K has the symmetry in orthogonal form
  double conjugator_condition = 1.0;
  double residual = 0.0;
  Vec whitened_axis;  // fixed axis in T coordinates
  Vec axis() const { return fixed_space.col(0); }
};

struct DetectOptions {
  double tol = 1e-4;  // acceptance on the relative radial RMS residual
  int net = 256;
  int coarse_dirs = 32, coarse_angles = 4;
  int medium_dirs = 128, medium_angles = 4;
  int full_dirs = 512, full_angles = 8;
  int refine_starts = 4;
  double merge_angle = 1e-4;
  // An axis passes only within `separation` × the best residual found (but
  // never below `noise_floor`): near-ball bodies have many approximate
  // axes, and the exact one resolves them.
  double separation = 1e3;
  double noise_floor = 1e-9;
  std::uint64_t seed = 0x0a11ce5ULL;
  IsotropicOptions isotropic;
};

struct RevolutionDetection {
  std::vector<RevolutionStructure> structures;  // ascending residual
  bool all_axes = false;  // every probed axis passes: the whitened body is a ball
  double best_residual = 0.0;  // smallest full-sample residual over refined candidates
  Vec best_axis;               // body coordinates, accepted or not
  IsotropicFrame frame;
};

/// Relative RMS of ρ(Rθ) − ρ(θ) over rotations R fixing `axis`, evaluated
/// on the body as given (no whitening).
double revolution_residual(const SmoothBody& body, const Vec& axis, int dirs, int angles, std::uint64_t seed);

RevolutionDetection detect_revolution(const SmoothBody& body, const DetectOptions& opt = {});

enum class SymmetryVerdict { NoRevolution, Revolution, Quadric, Inconsistent };

struct SymmetryClass {
  SymmetryVerdict verdict = SymmetryVerdict::NoRevolution;
  std::optional<Vec> axis;
  std::optional<QuadricFit> quadric;
};

/// Rules: none → NoRevolution; one → Revolution; two or more, or the ball
/// case → Quadric when the quadric fit agrees within quadric_tol, else
/// Inconsistent.
SymmetryClass classify_symmetry(const RevolutionDetection& det, const SmoothBody& body, double quadric_tol = 1e-6);

const char* to_string(SymmetryVerdict v);

/// Linear maps of the body fixing both the axis and the point p: conjugates
/// T⁻¹ R T of reflections R fixing T·axis and T·p. `count` elements.
std::vector<Mat> isotropy_elements(const RevolutionStructure& s, const Vec& p, int count, std::uint64_t seed);

/// ‖c restricted to fixed^⊥‖_F / max(‖c‖_F, floor); for a (near) zero
/// fixed direction the whole form is measured.
double claim33_residual(const CubicForm& c, const Vec& fixed, double floor);

}  // namespace affrev
