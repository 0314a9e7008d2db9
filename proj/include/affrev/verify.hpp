#pragma once

#include "affrev/blaschke.hpp"
#include "affrev/body.hpp"
#include "affrev/forms.hpp"
#include "affrev/symmetry.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace affrev {

/// Serialized body description. Generated specs carry every parameter
/// explicitly, so a file alone rebuilds the body.
struct BodySpec {
  int dim = 4;
  std::string family;  // ellipsoid | revolution | perturbed
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 0;
};

nlohmann::json spec_to_json(const BodySpec& s);
BodySpec spec_from_json(const nlohmann::json& j);
BodySpec load_spec(const std::string& path);
void save_spec(const BodySpec& s, const std::string& path);

/// Seeded spec with resolved parameters:
///   ellipsoid  {"Q": n×n}
///   revolution {"profile": [r0, r2, r4], "axis": a, "conjugator": n×n}
///   perturbed  {"base": "ball" | {"Q": n×n}, "amplitude": ε, "kind": "generic" | "axis_invariant",
///               "harmonics_seed": s, "axis": a}
BodySpec generate_spec(const std::string& family, int dim, std::uint64_t seed);
SmoothBody build_body(const BodySpec& s);

/// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
std::string body_id(const BodySpec& s);

/// Maximizer of the radial function: best node of a quasi-uniform net, then
/// projected gradient ascent. Antipodes are identified and ties resolve to
/// the lexicographically smallest canonical direction.
BoundaryPoint find_max_radius_point(const SmoothBody& body, int net = 0);

struct VerifyOptions {
  int sections = 64;
  double tol = 1e-6;             // Claim 3.3, Eq. (2) fit, Blaschke C and quadric residual
  double revolution_tol = 1e-4;  // radial RMS residual for a revolution axis
  double factor_tol = 1e-7;      // relative restriction residual for linear factors
  double cubic_floor = 1e-9;     // ‖c_f‖_F at or below: the zero cubic
  double claim_floor = 1e-2;     // scale floor in the Claim 3.3 ratio
  double alignment_tol = 1e-3;   // radians, section fixed direction vs factor
  int threads = 1;
  std::uint64_t seed = 1;
  bool timings = false;
};

enum class Verdict { Revolution, Quadric, NotRevolution, Inconsistent };
const char* to_string(Verdict v);

struct SectionEvidence {
  int index = 0;
  Vec chart_normal;  // normal of H inside the chart domain
  Vec normal;        // world normal of the section hyperplane
  std::vector<RevolutionStructure> structures;  // axes in world coordinates
  bool all_axes = false;
  double best_residual = 0.0;
  std::optional<double> claim33;
  std::optional<double> eq4_orthogonality;
  std::optional<double> eq4_invariance;
  std::vector<double> factor_alignment;  // per factor; NaN when undefined
  std::optional<double> axis_consistency;
  std::optional<std::string> error;
  bool revolution() const { return !error && (all_axes || structures.size() == 1); }
};

struct FactorEvidence {
  LinearFactor factor;
  RotationalFit fit;
  double success_fraction = 0.0;
  double mean_alignment = 0.0;
};

struct VerificationReport {
  std::string body_id;
  BodySpec spec;
  VerifyOptions options;
  std::optional<BoundaryPoint> base_point;
  double cubic_norm = 0.0;
  double hessian_error = 0.0;
  std::optional<CubicForm> cubic;
  bool cubic_zero = false;
  double factor_best_residual = 0.0;
  std::vector<FactorEvidence> factors;
  int selected_factor = -1;
  std::vector<SectionEvidence> sections;
  std::optional<RevolutionDetection> global;
  std::optional<SymmetryClass> symmetry;
  std::optional<MpbResult> mpb;
  std::string branch;  // V_full | q_zero | mixed
  Verdict verdict = Verdict::Inconsistent;
  std::optional<Vec> axis;
  std::vector<std::string> notes;
  std::optional<std::string> error_stage, error_message;
  std::vector<std::pair<std::string, double>> timings;

  int exit_code() const;
  double min_section_residual() const;
  double max_claim33() const;
};

VerificationReport run_verify(const BodySpec& spec, const VerifyOptions& opt = {});

nlohmann::ordered_json report_to_json(const VerificationReport& r);

nlohmann::json vec_json(const Vec& v);
nlohmann::json mat_json(const Mat& m);
Vec json_vec(const nlohmann::json& j);
Mat json_mat(const nlohmann::json& j);

}  // namespace affrev
