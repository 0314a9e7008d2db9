#pragma once

#include "affrev/body.hpp"
#include "affrev/linalg.hpp"
#include "affrev/tensor3.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace affrev {

/// Value and derivatives of a graph function f: R^m → R.
struct GraphJet {
  double value = 0.0;
  Vec grad;
  Mat hess;
  Tensor3 third;
};

/// Local graph x_{m+1} = f(x) with derivative data up to order 3.
class GraphOracle {
 public:
  virtual ~GraphOracle() = default;
  virtual int dim() const = 0;
  virtual GraphJet jet(const Vec& x) const = 0;
};

/// Graph given by a closure returning the jet.
class FunctionGraph final : public GraphOracle {
 public:
  FunctionGraph(int dim, std::function<GraphJet(const Vec&)> f) : dim_(dim), f_(std::move(f)) {}
  int dim() const override { return dim_; }
  GraphJet jet(const Vec& x) const override { return f_(x); }

 private:
  int dim_;
  std::function<GraphJet(const Vec&)> f_;
};

/// Graph of a body boundary over a chart (implicit differentiation).
class ChartGraph final : public GraphOracle {
 public:
  explicit ChartGraph(GraphChart chart) : chart_(std::move(chart)) {}
  int dim() const override { return chart_.dim(); }
  GraphJet jet(const Vec& x) const override;

 private:
  GraphChart chart_;
};

/// f = 1 − √(1 − ‖x‖²), the lower cap of the unit sphere centred at e_{m+1}.
FunctionGraph sphere_graph(int m);
/// f = ½‖x‖².
FunctionGraph paraboloid_graph(int m);
/// f = ½‖x‖² + ε·x_1³.
FunctionGraph cubic_graph(int m, double eps);

struct BlaschkeData {
  Vec point;
  Mat h;                   // affine metric
  Vec xi;                  // affine normal in R^{m+1}
  std::vector<Mat> gamma;  // gamma[k](i, j) = Γ^k_ij of the induced connection
  Mat S;                   // shape operator, from differences of ξ
  bool shape_available = false;
  Tensor3 C;               // cubic form (∇h), symmetrized
  double orientation = 1.0;     // sign of det Hess f
  double metric_mismatch = 0.0; // max |h recomputed from the structure equation − h|
  double system_residual = 0.0; // residual of the structure equation solve
  double xi_tangency = 0.0;     // transversal part of D ξ (zero for the Blaschke normal)
  double C_asymmetry = 0.0;     // before symmetrization
  double apolarity = 0.0;       // max_k |Σ h^{ij} C_ijk|
  double C_hnorm = 0.0;         // √(h^{ia} h^{jb} h^{kc} C_ijk C_abc)
};

struct BlaschkeOptions {
  bool shape = true;
  double shape_step = 1e-4;  // five-point stencil on ξ
};

BlaschkeData blaschke_at(const GraphOracle& graph, const Vec& x, const BlaschkeOptions& opt = {});

struct CProfile {
  double max = 0.0;
  double rms = 0.0;
  int count = 0;
};

/// ‖C‖_F at the origin of each point's canonical chart.
CProfile cubic_C_profile(const SmoothBody& body, const std::vector<BoundaryPoint>& sample);

/// Boundary points along a rotated quasi-uniform net of directions; points
/// without positive definite second fundamental form are dropped.
std::vector<BoundaryPoint> boundary_sample(const SmoothBody& body, int count, std::uint64_t seed,
                                           bool require_pd = true);

struct QuadricFit {
  Mat coeffs;           // symmetric (n+1) × (n+1), ‖·‖_F = 1, in (x, 1)
  double residual = 0.0;  // RMS of |x̃ᵀ Q x̃|
  double singular_gap = 0.0;  // σ_{min+1} / σ_max of the design matrix
};

QuadricFit fit_quadric(const std::vector<Vec>& points);

enum class MpbKind { Quadric, NotQuadric, Inconsistent };

struct MpbOptions {
  double tol = 1e-6;
  int profile_points = 50;
  int fit_points = 200;
  std::uint64_t seed = 0x3b1a5c4eULL;
};

struct MpbResult {
  MpbKind kind = MpbKind::NotQuadric;
  CProfile profile;
  std::optional<QuadricFit> fit;
};

MpbResult mpb_classify(const SmoothBody& body, const MpbOptions& opt = {});

const char* to_string(MpbKind k);

}  // namespace affrev
