#include "affrev/symmetry.hpp"

#include "affrev/quadrature.hpp"
#include "affrev/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace affrev {

Vec reflect_across(const Mat& W, const Vec& a) {
  if (W.rows() != a.size()) throw Error("reflect_across", "dimension mismatch");
  if (orthonormality_error(W) > 1e-10) throw Error("reflect_across", "basis is not orthonormal");
  return 2.0 * (W * (W.transpose() * a)) - a;
}

Vec rotate_in_plane(const Vec& u, const Vec& v, double angle, const Vec& a) {
  if (std::abs(u.norm() - 1) > 1e-10 || std::abs(v.norm() - 1) > 1e-10 || std::abs(u.dot(v)) > 1e-10)
    throw Error("rotate_in_plane", "plane basis is not an orthonormal pair");
  const double x = u.dot(a), y = v.dot(a);
  const double c = std::cos(angle), s = std::sin(angle);
  return a + (c * x - s * y - x) * u + (s * x + c * y - y) * v;
}

CompositionCheck reflection_composition_check(const Vec& l1, const Vec& l2, const Vec& w, const Vec& a) {
  const int n = static_cast<int>(a.size());
  if (l1.size() != n || l2.size() != n || w.size() != n) throw Error("reflection_composition", "dimension mismatch");
  const Vec u = l1.normalized();
  Vec v = l2.normalized() - u.dot(l2.normalized()) * u;
  const double sin_ang = v.norm();
  if (sin_ang < 1e-12) throw Error("reflection_composition", "l1 and l2 are collinear");
  v /= sin_ang;
  v -= u.dot(v) * u;  // second pass, cancellation at small angles
  v.normalize();
  Vec wn = w.normalized();
  if (std::abs(wn.dot(u)) > 1e-10 || std::abs(wn.dot(v)) > 1e-10)
    throw Error("reflection_composition", "w must be orthogonal to l1 and l2");
  wn -= wn.dot(u) * u + wn.dot(v) * v;
  wn.normalize();
  Mat P(n, 3);
  P << u, v, wn;
  const Mat rest = orthogonal_complement(P);
  auto ref = [&](const Vec& l, const Vec& x) {
    Mat W(n, 2 + rest.cols());
    W << l.normalized(), wn, rest;
    return reflect_across(W, x);
  };
  CompositionCheck c;
  c.lhs = ref(l2, ref(l1, a));
  const double ang = std::atan2(sin_ang, u.dot(l2.normalized()));
  c.rhs = rotate_in_plane(u, v, 2 * ang, a);
  return c;
}

// ---------------------------------------------------------------------------
// Isotropic position

namespace {

int default_q(int m) {
  switch (m) {
    case 2: return 48;
    case 3: return 32;
    case 4: return 20;
    case 5: return 12;
    default: return 8;
  }
}

}  // namespace

Mat volume_moment(const SmoothBody& body, int q, int extra_power) {
  const int m = body.dim();
  const SphereRule rule = gauss_product_sphere(m, q);
  Mat M = Mat::Zero(m, m);
  size_t failures = 0;
  double wsum = 0.0;
  for (size_t i = 0; i < rule.size(); ++i) {
    double r;
    try {
      r = radial(body, rule.nodes[i]);
    } catch (const Error&) {
      ++failures;
      continue;
    }
    const Vec& t = rule.nodes[i];
    M.noalias() += (rule.weights[i] * std::pow(r, m + 2 + extra_power)) * (t * t.transpose());
    wsum += rule.weights[i];
  }
  if (failures * 1000 > rule.size())
    throw Error("isotropic_normalize", "quadrature failure: radial root failed on more than 0.1% of nodes");
  return M / wsum;
}

IsotropicFrame isotropic_normalize(const SmoothBody& body, const IsotropicOptions& opt) {
  const int m = body.dim();
  IsotropicFrame f;
  f.quadrature_q = opt.q > 0 ? opt.q : default_q(m);
  f.transform = Mat::Identity(m, m);
  for (int it = 0; it <= opt.max_iterations; ++it) {
    const SmoothBody b = it == 0 ? body : body.transformed(f.transform);
    f.moment = volume_moment(b, f.quadrature_q);
    const double lambda = f.moment.trace() / m;
    f.off_identity = (f.moment / lambda - Mat::Identity(m, m)).cwiseAbs().maxCoeff();
    f.iterations = it;
    if (f.off_identity <= opt.tol && std::abs(m * lambda - 1) <= opt.tol) return f;
    if (it == opt.max_iterations) break;
    const double c = std::pow(1.0 / (m * lambda), 1.0 / (m + 2));
    f.transform = c * spd_power(f.moment / lambda, -0.5) * f.transform;
  }
  throw Error("isotropic_normalize", "whitening did not reach the requested off-identity tolerance");
}

IsotropicFrame isotropic_normalize(const SectionBody& s, const IsotropicOptions& opt) {
  return isotropic_normalize(s.body, opt);
}

// ---------------------------------------------------------------------------
// Radial invariance under rotations fixing an axis

namespace {

class RotationSampler {
 public:
  RotationSampler(const SmoothBody& body, int dirs, int angles, std::uint64_t seed) : body_(body), angles_(angles) {
    const int m = body.dim();
    Rng rng(seed);
    const Mat R = rng.orthogonal(m);
    const SphereRule net = fibonacci_sphere(m, dirs);
    double sum = 0.0;
    for (const Vec& u : net.nodes) {
      theta_.push_back(R * u);
      rho_.push_back(radial(body, theta_.back()));
      sum += rho_.back();
      g_.push_back(rng.normal_vec(m));
    }
    mean_rho_ = sum / dirs;
  }

  int size() const { return static_cast<int>(theta_.size()) * angles_; }

  // Entries (ρ(R θ_i) − ρ(θ_i)) / mean ρ, R rotating θ_i within its orbit.
  Vec residuals(const Vec& axis) const {
    const Vec v = axis.normalized();
    Vec out = Vec::Zero(size());
    for (size_t i = 0; i < theta_.size(); ++i) {
      const Vec& t = theta_[i];
      const double tv = t.dot(v);
      const Vec perp = t - tv * v;
      const double s = perp.norm();
      if (s < 1e-9) continue;
      const Vec e1 = perp / s;
      Vec e2 = g_[i] - g_[i].dot(v) * v;
      e2 -= e2.dot(e1) * e1;
      e2.normalize();
      for (int j = 0; j < angles_; ++j) {
        const double a = 2 * M_PI * (j + 1) / (angles_ + 1);
        const Vec r = tv * v + s * (std::cos(a) * e1 + std::sin(a) * e2);
        out[i * angles_ + j] = (radial(body_, r) - rho_[i]) / mean_rho_;
      }
    }
    return out;
  }

  double rms(const Vec& axis) const {
    const Vec r = residuals(axis);
    return std::sqrt(r.squaredNorm() / r.size());
  }

 private:
  const SmoothBody& body_;
  int angles_;
  std::vector<Vec> theta_;
  std::vector<double> rho_;
  std::vector<Vec> g_;
  double mean_rho_ = 1.0;
};

// Levenberg–Marquardt on the sphere in the chart δ ↦ normalize(v0 + Bδ).
Vec refine_axis(const RotationSampler& s, Vec v) {
  const int m = static_cast<int>(v.size());
  const double h = 1e-6;
  double lambda = 1e-3;
  Vec r = s.residuals(v);
  double cost = r.squaredNorm();
  for (int it = 0; it < 40 && cost > 1e-30; ++it) {
    const Mat B = householder_complement(v);
    Mat J(r.size(), m - 1);
    for (int k = 0; k < m - 1; ++k)
      J.col(k) = (s.residuals(v + h * B.col(k)) - s.residuals(v - h * B.col(k))) / (2 * h);
    const Mat JtJ = J.transpose() * J;
    const Vec g = J.transpose() * r;
    bool accepted = false, stalled = false;
    double step = 0.0;
    for (int tries = 0; tries < 12; ++tries) {
      Mat A = JtJ;
      A.diagonal() += lambda * JtJ.diagonal() + Vec::Constant(m - 1, 1e-300);
      const Vec d = A.ldlt().solve(-g);
      const Vec vn = (v + B * d).normalized();
      const Vec rn = s.residuals(vn);
      const double cn = rn.squaredNorm();
      if (cn < cost) {
        step = d.norm();
        stalled = cost - cn < 1e-6 * cost;
        v = vn;
        r = rn;
        cost = cn;
        lambda = std::max(lambda / 3, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 4;
    }
    if (!accepted || stalled || step < 1e-13) break;
  }
  return v;
}

}  // namespace

double revolution_residual(const SmoothBody& body, const Vec& axis, int dirs, int angles, std::uint64_t seed) {
  return RotationSampler(body, dirs, angles, seed).rms(axis);
}

RevolutionDetection detect_revolution(const SmoothBody& body, const DetectOptions& opt) {
  const int m = body.dim();
  if (m < 3) throw Error("detect_revolution", "dimension must be at least 3");
  RevolutionDetection det;
  det.frame = isotropic_normalize(body, opt.isotropic);
  const Mat& T = det.frame.transform;
  const Mat Tinv = T.inverse();
  const SmoothBody w = body.transformed(T);

  const RotationSampler coarse(w, opt.coarse_dirs, opt.coarse_angles, opt.seed);
  const SphereRule net = fibonacci_sphere(m, opt.net);
  std::vector<double> score(net.size());
  for (size_t i = 0; i < net.size(); ++i) score[i] = coarse.rms(net.nodes[i]);
  const double worst = *std::max_element(score.begin(), score.end());
  if (worst <= opt.noise_floor) {
    det.all_axes = true;
    det.best_residual = *std::min_element(score.begin(), score.end());
    det.best_axis = Vec::Unit(m, 0);
    return det;
  }

  std::vector<size_t> order(net.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return score[a] < score[b]; });
  // A weighted moment of higher order keeps the rotational symmetry, so
  // the axis is among its eigenvectors; these go first.
  std::vector<Vec> starts;
  const Eigen::SelfAdjointEigenSolver<Mat> es(volume_moment(w, det.frame.quadrature_q, 2));
  for (int k = 0; k < m; ++k) starts.push_back(canonical_sign(es.eigenvectors().col(k)));
  const size_t fixed_starts = starts.size();
  for (size_t i : order) {
    bool far = true;
    for (size_t j = fixed_starts; j < starts.size(); ++j) far = far && line_angle(starts[j], net.nodes[i]) >= 0.3;
    if (far) starts.push_back(net.nodes[i]);
    if (static_cast<int>(starts.size() - fixed_starts) >= opt.refine_starts) break;
  }

  const RotationSampler medium(w, opt.medium_dirs, opt.medium_angles, opt.seed + 1);
  const RotationSampler full(w, opt.full_dirs, opt.full_angles, opt.seed + 2);
  struct Cand {
    Vec v;
    double res;
  };
  std::vector<Cand> cands;
  // Polish on the coarse tier; an exact axis has zero residual on any
  // sample, so only near-zero candidates earn the expensive refinement.
  for (const Vec& s : starts) {
    Vec v = refine_axis(coarse, s);
    if (coarse.rms(v) <= 10 * opt.tol) v = refine_axis(medium, v);
    v = canonical_sign(v);
    cands.push_back({v, full.rms(v)});
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.res < b.res; });
  det.best_residual = cands.front().res;
  det.best_axis = canonical_sign((Tinv * cands.front().v).normalized());
  const double accept = std::min(opt.tol, std::max(opt.separation * det.best_residual, opt.noise_floor));
  if (worst <= accept) {
    det.all_axes = true;
    return det;
  }

  Eigen::JacobiSVD<Mat> svd(T);
  const double cond = svd.singularValues()[0] / svd.singularValues()[m - 1];
  for (const Cand& c : cands) {
    if (c.res > accept) continue;
    const Vec axis = canonical_sign((Tinv * c.v).normalized());
    bool dup = false;
    for (const RevolutionStructure& s : det.structures) dup = dup || line_angle(s.axis(), axis) < opt.merge_angle;
    if (dup) continue;
    RevolutionStructure rs;
    rs.fixed_space = axis;
    rs.conjugator = T;
    rs.conjugator_condition = cond;
    rs.residual = c.res;
    rs.whitened_axis = c.v;
    det.structures.push_back(std::move(rs));
  }
  return det;
}

SymmetryClass classify_symmetry(const RevolutionDetection& det, const SmoothBody& body, double quadric_tol) {
  SymmetryClass c;
  if (!det.all_axes && det.structures.empty()) {
    c.verdict = SymmetryVerdict::NoRevolution;
    return c;
  }
  if (!det.all_axes && det.structures.size() == 1) {
    c.verdict = SymmetryVerdict::Revolution;
    c.axis = det.structures.front().axis();
    return c;
  }
  const int n = body.dim();
  const int ncoef = (n + 1) * (n + 2) / 2;
  std::vector<Vec> pts;
  for (const BoundaryPoint& b : boundary_sample(body, std::max(200, 3 * ncoef), 0xf17ULL, false)) pts.push_back(b.point);
  c.quadric = fit_quadric(pts);
  c.verdict = c.quadric->residual <= quadric_tol ? SymmetryVerdict::Quadric : SymmetryVerdict::Inconsistent;
  return c;
}

const char* to_string(SymmetryVerdict v) {
  switch (v) {
    case SymmetryVerdict::NoRevolution: return "NoRevolution";
    case SymmetryVerdict::Revolution: return "Revolution";
    case SymmetryVerdict::Quadric: return "Quadric";
    case SymmetryVerdict::Inconsistent: return "Inconsistent";
  }
  return "?";
}

std::vector<Mat> isotropy_elements(const RevolutionStructure& s, const Vec& p, int count, std::uint64_t seed) {
  const int m = static_cast<int>(p.size());
  const Mat& T = s.conjugator;
  Mat P(m, 2);
  P << (T * s.axis()).normalized(), (T * p).normalized();
  const Mat C = orthogonal_complement(orthonormal_span(P, 1e-9));
  std::vector<Mat> out;
  if (C.cols() == 0) return out;
  Rng rng(seed);
  const Mat Tinv = T.inverse();
  for (int k = 0; k < count; ++k) {
    const Vec w = C * rng.unit_vec(static_cast<int>(C.cols()));
    const Mat R = Mat::Identity(m, m) - 2 * w * w.transpose();
    out.push_back(Tinv * R * T);
  }
  return out;
}

double claim33_residual(const CubicForm& c, const Vec& fixed, double floor) {
  const double scale = std::max(c.frobenius(), floor);
  if (fixed.norm() <= 1e-9) return c.frobenius() / scale;
  if (c.dim() == 1) return 0.0;
  return restrict(c, Hyperplane(fixed)).frobenius() / scale;
}

}  // namespace affrev
