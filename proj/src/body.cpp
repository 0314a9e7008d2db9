#include "affrev/body.hpp"

#include "affrev/quadrature.hpp"
#include "affrev/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace affrev {

SmoothBody::SmoothBody(FieldPtr field, double radius_bound, std::string family, bool symmetric)
    : field_(std::move(field)), radius_bound_(radius_bound), family_(std::move(family)), symmetric_(symmetric) {
  if (!field_) throw Error("body", "null field");
  if (field_->dim() < 2) throw Error("body", "body dimension must be at least 2");
  if (!(radius_bound_ > 0)) throw Error("body", "radius bound must be positive");
  if (!(field_->value(Vec::Zero(field_->dim())) < 0)) throw Error("body", "origin is not interior (F(O) >= 0)");
}

SmoothBody SmoothBody::with_ground_truth_axis(const Vec& axis) const {
  SmoothBody b = *this;
  b.axis_ = canonical_sign(axis.normalized());
  return b;
}

SmoothBody SmoothBody::transformed(const Mat& A) const {
  Eigen::JacobiSVD<Mat> svd(A);
  const Vec& s = svd.singularValues();
  if (s[s.size() - 1] <= 1e-12 * s[0]) throw Error("body", "transformed: singular map");
  SmoothBody b(pullback(field_, A.inverse()), radius_bound_ * s[0], family_, symmetric_);
  if (axis_) b.axis_ = canonical_sign((A * *axis_).normalized());
  return b;
}

// ---------------------------------------------------------------------------
// Radial root finding

namespace {

// First root of p on (0, bound]; p(0) < 0 is required.
double first_positive_root(const RayPolynomial& p, double bound, int scan) {
  double lo = 0.0;
  double plo = p(0.0);
  if (!(plo < 0)) throw Error("radial", "origin is not interior along direction");
  double hi = -1.0;
  for (int k = 1; k <= scan; ++k) {
    const double t = bound * k / scan;
    const double v = p(t);
    if (v >= 0) {
      if (v == 0) return t;
      hi = t;
      break;
    }
    lo = t;
    plo = v;
  }
  if (hi < 0) throw Error("radial", "not star-shaped along direction: no sign change within radius bound");

  // Newton safeguarded by the bracket.
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    double v, dv;
    p.eval(t, v, dv);
    if (v == 0) return t;
    if (v < 0) lo = t;
    else hi = t;
    double tn = (dv != 0) ? t - v / dv : 0.5 * (lo + hi);
    if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
    if (std::abs(tn - t) <= 1e-16 * t || hi - lo <= 4e-16 * hi) {
      t = tn;
      break;
    }
    t = tn;
  }
  return t;
}

double ray_scale(const RayPolynomial& p, double t) {
  double s = 0.0, tk = 1.0;
  for (double c : p.coeffs) {
    s += std::abs(c) * tk;
    tk *= t;
  }
  return s;
}

}  // namespace

double radial(const SmoothBody& body, const Vec& direction) {
  const double n = direction.norm();
  if (!(n > 0)) throw Error("radial", "zero direction");
  const RayPolynomial p = body.field().ray(direction / n);
  const double t = first_positive_root(p, body.radius_bound(), 64);
  if (std::abs(p(t)) > 1e-12 * std::max(1.0, ray_scale(p, t)))
    throw Error("radial", "root polish did not reach |F| <= 1e-12");
  return t;
}

int radial_sign_changes(const SmoothBody& body, const Vec& direction, int samples, double reach) {
  const RayPolynomial p = body.field().ray(direction.normalized());
  if (!(reach > 0)) reach = 2.0 * body.radius_bound();
  int changes = 0;
  bool neg = p(0.0) < 0;
  for (int k = 1; k <= samples; ++k) {
    const bool n = p(reach * k / samples) < 0;
    if (n != neg) ++changes;
    neg = n;
  }
  return changes;
}

SecondFundamentalForm second_fundamental_form(const SmoothBody& body, const Vec& point) {
  const FieldJet j = body.field().jet(point, 2);
  const double gn = j.grad.norm();
  if (!(gn > 1e-14)) throw Error("second_fundamental_form", "zero gradient: level set not regular");
  SecondFundamentalForm s;
  s.tangent_basis = householder_complement(j.grad);
  s.shape = s.tangent_basis.transpose() * j.hess * s.tangent_basis / gn;
  s.shape = 0.5 * (s.shape + s.shape.transpose());
  s.curvatures = Eigen::SelfAdjointEigenSolver<Mat>(s.shape, Eigen::EigenvaluesOnly).eigenvalues();
  return s;
}

BoundaryPoint boundary_project(const SmoothBody& body, const Vec& direction) {
  BoundaryPoint b;
  b.direction = direction.normalized();
  b.radius = radial(body, b.direction);
  b.point = b.radius * b.direction;
  b.sff_pd = second_fundamental_form(body, b.point).curvatures.minCoeff() > 1e-10;
  return b;
}

SectionBody section(const SmoothBody& body, const Hyperplane& hp) {
  if (hp.ambient_dim() != body.dim()) throw Error("section", "hyperplane dimension does not match body");
  Mat E = hp.basis();
  SmoothBody sb(pullback(body.field_ptr(), E), body.radius_bound(), body.family() + "-section", body.symmetric());
  return SectionBody{body, hp, std::move(E), std::move(sb)};
}

// ---------------------------------------------------------------------------
// Families

SmoothBody make_ellipsoid(const Mat& Q) {
  if (Q.rows() != Q.cols() || Q.rows() < 2) throw Error("make_ellipsoid", "Q must be square with n >= 2");
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, Q.cwiseAbs().maxCoeff()))
    throw Error("make_ellipsoid", "Q must be symmetric");
  const Mat Qs = 0.5 * (Q + Q.transpose());
  const Vec ev = Eigen::SelfAdjointEigenSolver<Mat>(Qs, Eigen::EigenvaluesOnly).eigenvalues();
  if (!(ev.minCoeff() > 0)) throw Error("make_ellipsoid", "Q must be positive definite");
  auto f = std::make_shared<PolynomialField>(Polynomial::quadratic(Qs, -1.0));
  return SmoothBody(f, 1.05 / std::sqrt(ev.minCoeff()), "ellipsoid");
}

namespace {

void require_star_shaped(const SmoothBody& body, const char* stage) {
  Rng rng(0x57a25ULL);
  for (int i = 0; i < 1000; ++i) {
    const Vec u = rng.unit_vec(body.dim());
    if (radial_sign_changes(body, u, 512, 1.5 * radial(body, u)) != 1)
      throw Error(stage, "body is not star-shaped: radial root is not unique along a sampled direction");
  }
}

}  // namespace

SmoothBody make_revolution_body(const std::vector<double>& profile, int axis_index, const Mat& conjugator) {
  const int n = static_cast<int>(conjugator.rows());
  if (conjugator.cols() != n || n < 2) throw Error("make_revolution_body", "conjugator must be square");
  if (axis_index < 0 || axis_index >= n) throw Error("make_revolution_body", "axis index out of range");
  if (profile.empty()) throw Error("make_revolution_body", "empty profile");
  Eigen::JacobiSVD<Mat> svd(conjugator);
  const Vec& sv = svd.singularValues();
  if (!(sv[n - 1] > 1e-12 * sv[0])) throw Error("make_revolution_body", "singular conjugator");

  // r(t) as a polynomial in t with only even powers.
  std::vector<double> r(2 * profile.size() - 1, 0.0);
  for (size_t k = 0; k < profile.size(); ++k) r[2 * k] = profile[k];
  double rmax = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double t = -1.0 + i / 1000.0;
    double v = 0.0;
    for (size_t k = r.size(); k-- > 0;) v = v * t + r[k];
    if (!(v > 0)) throw Error("make_revolution_body", "profile r(t) must be positive on [-1, 1]");
    rmax = std::max(rmax, v);
  }
  const Polynomial rp = Polynomial::univariate(n, axis_index, r);
  const Polynomial shell = Polynomial::univariate(n, axis_index, {1.0, 0.0, -1.0});
  Mat P = Mat::Identity(n, n);
  P(axis_index, axis_index) = 0.0;
  const Polynomial F0 = Polynomial::quadratic(P, 0.0) + (rp * rp * shell).scaled(-1.0);

  auto base = std::make_shared<PolynomialField>(F0);
  const double bound = 1.05 * std::sqrt(rmax * rmax + 1.0) * sv[0];
  SmoothBody body(pullback(base, conjugator.inverse()), bound, "revolution");
  require_star_shaped(body, "make_revolution_body");
  return body.with_ground_truth_axis(conjugator.col(axis_index));
}

Polynomial perturbation_polynomial(int dim, const Harmonics& h) {
  Rng rng(h.seed);
  Polynomial P(dim);
  if (h.kind == Harmonics::Kind::Generic) {
    // Monomials of degree 2 and 4 in lexicographic exponent order.
    std::vector<int> e(dim, 0);
    for (int deg : {2, 4}) {
      std::function<void(int, int)> rec = [&](int var, int left) {
        if (var == dim - 1) {
          e[var] = left;
          P.add_term(rng.normal(), e);
          return;
        }
        for (int k = left; k >= 0; --k) {
          e[var] = k;
          rec(var + 1, left - k);
        }
      };
      rec(0, deg);
    }
  } else {
    if (h.axis_index < 0 || h.axis_index >= dim) throw Error("perturbation", "axis index out of range");
    Mat Pp = Mat::Identity(dim, dim);
    Pp(h.axis_index, h.axis_index) = 0.0;
    const Polynomial perp2 = Polynomial::quadratic(Pp, 0.0);
    const Polynomial ax2 = Polynomial::univariate(dim, h.axis_index, {0.0, 0.0, 1.0});
    const double c[5] = {rng.normal(), rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    P = (perp2 * perp2).scaled(c[0]) + (perp2 * ax2).scaled(c[1]) + (ax2 * ax2).scaled(c[2]) +
        perp2.scaled(c[3]) + ax2.scaled(c[4]);
  }
  const SphereRule rule = fibonacci_sphere(dim, 2048);
  double ms = 0.0;
  for (size_t i = 0; i < rule.nodes.size(); ++i) {
    const double v = P.value(rule.nodes[i]);
    ms += rule.weights[i] * v * v;
  }
  if (!(ms > 0)) throw Error("perturbation", "degenerate perturbation polynomial");
  return P.scaled(1.0 / std::sqrt(ms));
}

SmoothBody make_perturbed_body(const SmoothBody& base, double amplitude, const Polynomial& P) {
  if (P.dim() != base.dim()) throw Error("make_perturbed_body", "perturbation dimension mismatch");
  if (!P.is_even()) throw Error("make_perturbed_body", "perturbation must be even to keep the body symmetric");
  if (amplitude == 0.0) return base;
  auto pf = std::make_shared<PolynomialField>(P);
  auto f = std::make_shared<SumField>(1.0, base.field_ptr(), amplitude, pf);
  // Probe with a generous bound, then tighten to the sampled maximum.
  SmoothBody probe(f, 2.0 * base.radius_bound(), "perturbed", base.symmetric());
  Rng rng(0x57a25ULL);
  double rmax = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec u = rng.unit_vec(base.dim());
    const double r = radial(probe, u);
    if (radial_sign_changes(probe, u, 512, 1.5 * r) != 1)
      throw Error("make_perturbed_body", "perturbed body is not star-shaped along a sampled direction");
    rmax = std::max(rmax, r);
  }
  return SmoothBody(f, 1.3 * rmax, "perturbed", base.symmetric());
}

SmoothBody make_perturbed_body(const SmoothBody& base, double amplitude, const Harmonics& h) {
  if (amplitude == 0.0) return base;
  return make_perturbed_body(base, amplitude, perturbation_polynomial(base.dim(), h));
}

// ---------------------------------------------------------------------------
// Charts

GraphChart::GraphChart(FieldPtr field, Vec origin, Mat tangent, Vec transversal)
    : field_(std::move(field)), p_(std::move(origin)), W_(std::move(tangent)), d_(std::move(transversal)) {
  const int n = field_->dim();
  if (p_.size() != n || W_.rows() != n || W_.cols() != n - 1 || d_.size() != n)
    throw Error("chart", "frame dimensions do not match the field");
}

Mat GraphChart::frame() const {
  Mat B(W_.rows(), W_.cols() + 1);
  B << W_, d_;
  return B;
}

double GraphChart::value(const Vec& y, double guess) const {
  const Vec base = p_ + W_ * y;
  double s = guess;
  for (int it = 0; it < 60; ++it) {
    const FieldJet j = field_->jet(base + s * d_, 1);
    const double gs = j.grad.dot(d_);
    if (gs == 0) throw Error("chart", "graph direction tangent to the level set");
    const double ds = -j.value / gs;
    s += ds;
    if (std::abs(ds) <= 1e-15 * (1.0 + std::abs(s))) return s;
  }
  throw Error("chart", "graph value did not converge");
}

GraphChart::Jet GraphChart::derivatives(const Vec& y) const {
  const int m = dim();
  const double s = value(y, 0.5 * y.squaredNorm());
  const Mat B = frame();
  const FieldJet J = field_->jet(p_ + W_ * y + s * d_, 3);
  const Vec G1 = B.transpose() * J.grad;
  const Mat G2 = B.transpose() * J.hess * B;
  const Tensor3 G3 = J.third.pullback(B);
  const int S = m;  // index of the transversal coordinate
  const double Gs = G1[S];
  if (std::abs(Gs) < 1e-300) throw Error("chart", "degenerate transversal derivative");

  Jet out;
  out.value = s;
  out.grad = Vec(m);
  for (int i = 0; i < m; ++i) out.grad[i] = -G1[i] / Gs;
  const Vec& f1 = out.grad;
  out.hess = Mat(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      out.hess(i, j) = -(G2(i, j) + G2(i, S) * f1[j] + G2(j, S) * f1[i] + G2(S, S) * f1[i] * f1[j]) / Gs;
  const Mat& f2 = out.hess;
  out.third = Tensor3(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        const double num = G3(i, j, k) + G3(i, j, S) * f1[k] + G3(i, k, S) * f1[j] + G3(j, k, S) * f1[i] +
                           G3(i, S, S) * f1[j] * f1[k] + G3(j, S, S) * f1[i] * f1[k] +
                           G3(k, S, S) * f1[i] * f1[j] + G3(S, S, S) * f1[i] * f1[j] * f1[k] +
                           G2(i, S) * f2(j, k) + G2(j, S) * f2(i, k) + G2(k, S) * f2(i, j) +
                           G2(S, S) * (f2(i, k) * f1[j] + f2(j, k) * f1[i] + f2(i, j) * f1[k]);
        out.third(i, j, k) = -num / Gs;
      }
  return out;
}

Jet3 canonical_jet(const SmoothBody& body, const BoundaryPoint& p) {
  const FieldJet j = body.field().jet(p.point, 1);
  if (!(j.grad.norm() > 1e-14)) throw Error("canonical_jet", "zero gradient at boundary point");
  return canonical_jet(body, p, householder_complement(j.grad));
}

Jet3 canonical_jet(const SmoothBody& body, const BoundaryPoint& p, const Mat& U) {
  const int n = body.dim();
  if (!p.sff_pd) throw Error("canonical_jet", "degenerate point: second fundamental form is not positive definite");
  const FieldJet j = body.field().jet(p.point, 1);
  const Vec& g = j.grad;
  const Vec toO = -p.point;
  if (std::abs(g.dot(toO)) <= 1e-9 * g.norm() * toO.norm())
    throw Error("canonical_jet", "canonical chart undefined: tangent plane passes through the origin");
  if (U.rows() != n || U.cols() != n - 1 || orthonormality_error(U) > 1e-10 ||
      (U.transpose() * g).norm() > 1e-10 * g.norm())
    throw Error("canonical_jet", "tangent basis must be orthonormal and orthogonal to the gradient");

  const GraphChart chart0(body.field_ptr(), p.point, U, toO);
  const GraphChart::Jet j0 = chart0.derivatives(Vec::Zero(n - 1));
  const Vec ev = Eigen::SelfAdjointEigenSolver<Mat>(j0.hess, Eigen::EigenvaluesOnly).eigenvalues();
  if (!(ev.minCoeff() > 0)) throw Error("canonical_jet", "degenerate point: graph Hessian is not positive definite");
  const Mat L = spd_power(j0.hess, -0.5);

  GraphChart chart(body.field_ptr(), p.point, U * L, toO);
  const GraphChart::Jet jc = chart.derivatives(Vec::Zero(n - 1));
  Tensor3 c = jc.third;
  c *= 1.0 / 6.0;
  const Mat B = chart.frame();
  return Jet3{p,
              B,
              B.inverse(),
              U,
              L,
              CubicForm(std::move(c)),
              (jc.hess - Mat::Identity(n - 1, n - 1)).cwiseAbs().maxCoeff(),
              std::move(chart)};
}

}  // namespace affrev
