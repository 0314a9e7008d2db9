#include "affrev/blaschke.hpp"

#include "affrev/quadrature.hpp"
#include "affrev/rng.hpp"

#include <cmath>

namespace affrev {

GraphJet ChartGraph::jet(const Vec& x) const {
  GraphChart::Jet j = chart_.derivatives(x);
  return GraphJet{j.value, std::move(j.grad), std::move(j.hess), std::move(j.third)};
}

FunctionGraph sphere_graph(int m) {
  return FunctionGraph(m, [m](const Vec& x) {
    const double r2 = x.squaredNorm();
    if (!(r2 < 1)) throw Error("blaschke", "sphere graph evaluated outside the unit disc");
    const double s = std::sqrt(1 - r2), s3 = s * s * s, s5 = s3 * s * s;
    GraphJet j;
    j.value = 1 - s;
    j.grad = x / s;
    j.hess = Mat::Identity(m, m) / s + x * x.transpose() / s3;
    j.third = Tensor3(m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int c = 0; c < m; ++c)
          j.third(a, b, c) = ((a == b) * x[c] + (a == c) * x[b] + (b == c) * x[a]) / s3 +
                             3 * x[a] * x[b] * x[c] / s5;
    return j;
  });
}

FunctionGraph paraboloid_graph(int m) {
  return FunctionGraph(m, [m](const Vec& x) {
    return GraphJet{0.5 * x.squaredNorm(), x, Mat::Identity(m, m), Tensor3(m)};
  });
}

FunctionGraph cubic_graph(int m, double eps) {
  return FunctionGraph(m, [m, eps](const Vec& x) {
    GraphJet j{0.5 * x.squaredNorm() + eps * x[0] * x[0] * x[0], x, Mat::Identity(m, m), Tensor3(m)};
    j.grad[0] += 3 * eps * x[0] * x[0];
    j.hess(0, 0) += 6 * eps * x[0];
    j.third(0, 0, 0) = 6 * eps;
    return j;
  });
}

namespace {

struct NormalData {
  Mat h, hinv;
  std::vector<Mat> dh;  // dh[k] = ∂_k h
  Mat tangents;         // (m+1) × m, columns φ_k
  Vec xi;
  double orientation = 1.0;
};

NormalData affine_normal(const GraphJet& j) {
  const int m = static_cast<int>(j.grad.size());
  NormalData d;
  const Mat& H = j.hess;
  Eigen::FullPivLU<Mat> lu(H);
  const double det = lu.determinant();
  const double scale = std::max(1e-300, H.cwiseAbs().maxCoeff());
  if (!(std::abs(det) > 1e-12 * std::pow(scale, m)))
    throw Error("blaschke", "degenerate Hessian: the hypersurface is not non-degenerate here");
  d.orientation = det > 0 ? 1.0 : -1.0;
  const Mat Hinv = lu.inverse();
  const double rho = std::pow(std::abs(det), -1.0 / (m + 2));
  d.h = rho * H;
  d.hinv = Hinv / rho;
  d.dh.resize(m);
  for (int k = 0; k < m; ++k) {
    Mat dH(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) dH(a, b) = j.third(a, b, k);
    const double drho = -rho / (m + 2) * (Hinv * dH).trace();
    d.dh[k] = drho * H + rho * dH;
  }
  d.tangents = Mat::Zero(m + 1, m);
  d.tangents.topRows(m).setIdentity();
  d.tangents.row(m) = j.grad.transpose();
  // ξ = (1/m) Δ_h φ with the Levi-Civita connection of h.
  Vec lap = Vec::Zero(m + 1);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      const double w = d.hinv(a, b);
      if (w == 0) continue;
      Vec phi_ab = Vec::Zero(m + 1);
      phi_ab[m] = H(a, b);
      for (int l = 0; l < m; ++l) {
        double g = 0.0;
        for (int q = 0; q < m; ++q) g += d.hinv(l, q) * (d.dh[a](q, b) + d.dh[b](q, a) - d.dh[q](a, b));
        phi_ab -= 0.5 * g * d.tangents.col(l);
      }
      lap += w * phi_ab;
    }
  d.xi = lap / m;
  return d;
}

}  // namespace

BlaschkeData blaschke_at(const GraphOracle& graph, const Vec& x, const BlaschkeOptions& opt) {
  const int m = graph.dim();
  if (x.size() != m) throw Error("blaschke", "point dimension does not match the graph");
  const GraphJet j = graph.jet(x);
  const NormalData nd = affine_normal(j);

  BlaschkeData out;
  out.point = x;
  out.h = nd.h;
  out.xi = nd.xi;
  out.orientation = nd.orientation;

  // Structure equation φ_ij = Γ^k_ij φ_k + h_ij ξ.
  Mat frame(m + 1, m + 1);
  frame << nd.tangents, nd.xi;
  Eigen::ColPivHouseholderQR<Mat> qr(frame);
  if (qr.rank() < m + 1) throw Error("blaschke", "affine normal is tangent: inconsistent structure equation");
  out.gamma.assign(m, Mat::Zero(m, m));
  Mat hrec(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      Vec rhs = Vec::Zero(m + 1);
      rhs[m] = j.hess(a, b);
      const Vec c = qr.solve(rhs);
      out.system_residual = std::max(out.system_residual, (frame * c - rhs).norm());
      for (int k = 0; k < m; ++k) out.gamma[k](a, b) = c[k];
      hrec(a, b) = c[m];
    }
  out.metric_mismatch = (hrec - nd.h).cwiseAbs().maxCoeff();
  if (out.system_residual > 1e-8 * std::max(1.0, j.hess.cwiseAbs().maxCoeff()))
    throw Error("blaschke", "structure equation residual above 1e-8: derivative oracle inconsistent");

  // C_ijk = ∂_k h_ij − Γ^l_ki h_lj − Γ^l_kj h_il.
  Tensor3 C(m);
  for (int i = 0; i < m; ++i)
    for (int jj = 0; jj < m; ++jj)
      for (int k = 0; k < m; ++k) {
        double v = nd.dh[k](i, jj);
        for (int l = 0; l < m; ++l)
          v -= out.gamma[l](k, i) * nd.h(l, jj) + out.gamma[l](k, jj) * nd.h(i, l);
        C(i, jj, k) = v;
      }
  out.C_asymmetry = C.asymmetry();
  C.symmetrize();
  out.C = C;
  for (int k = 0; k < m; ++k) {
    double tr = 0.0;
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) tr += nd.hinv(a, b) * C(a, b, k);
    out.apolarity = std::max(out.apolarity, std::abs(tr));
  }
  const Tensor3 raised = C.contract_modes(nd.hinv, nd.hinv, nd.hinv);
  double hn = 0.0;
  for (size_t i = 0; i < C.data().size(); ++i) hn += C.data()[i] * raised.data()[i];
  out.C_hnorm = std::sqrt(std::max(0.0, hn));

  if (opt.shape) {
    // D_k ξ = −S^l_k φ_l, with ∂_k ξ from a five-point stencil.
    const double hs = opt.shape_step;
    out.S = Mat(m, m);
    for (int k = 0; k < m; ++k) {
      auto xi_at = [&](double t) {
        Vec y = x;
        y[k] += t;
        return affine_normal(graph.jet(y)).xi;
      };
      const Vec dxi = (xi_at(-2 * hs) - 8 * xi_at(-hs) + 8 * xi_at(hs) - xi_at(2 * hs)) / (12 * hs);
      const Vec c = qr.solve(dxi);
      for (int l = 0; l < m; ++l) out.S(l, k) = -c[l];
      out.xi_tangency = std::max(out.xi_tangency, std::abs(c[m]));
    }
    out.shape_available = true;
  }
  return out;
}

CProfile cubic_C_profile(const SmoothBody& body, const std::vector<BoundaryPoint>& sample) {
  CProfile p;
  double ss = 0.0;
  for (const BoundaryPoint& b : sample) {
    if (!b.sff_pd) throw Error("cubic_C_profile", "sample point without positive definite second fundamental form");
    const Jet3 jet = canonical_jet(body, b);
    const BlaschkeData d = blaschke_at(ChartGraph(jet.chart), Vec::Zero(body.dim() - 1), {false, 1e-4});
    const double c = d.C.frobenius();
    p.max = std::max(p.max, c);
    ss += c * c;
    ++p.count;
  }
  if (p.count > 0) p.rms = std::sqrt(ss / p.count);
  return p;
}

std::vector<BoundaryPoint> boundary_sample(const SmoothBody& body, int count, std::uint64_t seed, bool require_pd) {
  Rng rng(seed);
  const Mat R = rng.orthogonal(body.dim());
  const SphereRule net = fibonacci_sphere(body.dim(), count);
  std::vector<BoundaryPoint> out;
  out.reserve(net.size());
  for (const Vec& u : net.nodes) {
    BoundaryPoint b = boundary_project(body, R * u);
    if (require_pd && !b.sff_pd) continue;
    out.push_back(std::move(b));
  }
  return out;
}

QuadricFit fit_quadric(const std::vector<Vec>& points) {
  if (points.empty()) throw Error("fit_quadric", "no samples");
  const int n = static_cast<int>(points[0].size());
  const int d = n + 1;
  const int ncoef = d * (d + 1) / 2;
  const int rows = static_cast<int>(points.size());
  if (rows < ncoef) throw Error("fit_quadric", "underdetermined: fewer samples than quadric coefficients");
  // Coefficient vector in the basis where its Euclidean norm is ‖Q‖_F.
  Mat D(rows, ncoef);
  for (int r = 0; r < rows; ++r) {
    if (points[r].size() != n) throw Error("fit_quadric", "samples of mixed dimension");
    Vec xt(d);
    xt << points[r], 1.0;
    int c = 0;
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) D(r, c++) = (i == j) ? xt[i] * xt[i] : std::sqrt(2.0) * xt[i] * xt[j];
  }
  Eigen::JacobiSVD<Mat> svd(D, Eigen::ComputeThinV);
  const Vec& s = svd.singularValues();
  QuadricFit fit;
  fit.singular_gap = s[ncoef - 2] / s[0];
  if (!(fit.singular_gap > 1e-8)) throw Error("fit_quadric", "underdetermined: samples lie on a lower-dimensional variety");
  const Vec q = svd.matrixV().col(ncoef - 1);
  fit.coeffs = Mat(d, d);
  int c = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      const double v = (i == j) ? q[c] : q[c] / std::sqrt(2.0);
      fit.coeffs(i, j) = fit.coeffs(j, i) = v;
      ++c;
    }
  // Sign fixed by the largest diagonal entry.
  Eigen::Index bi = 0;
  fit.coeffs.diagonal().cwiseAbs().maxCoeff(&bi);
  if (fit.coeffs(bi, bi) < 0) fit.coeffs = -fit.coeffs;
  double ss = 0.0;
  for (const Vec& p : points) {
    Vec xt(d);
    xt << p, 1.0;
    const double e = xt.dot(fit.coeffs * xt);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / rows);
  return fit;
}

MpbResult mpb_classify(const SmoothBody& body, const MpbOptions& opt) {
  MpbResult r;
  r.profile = cubic_C_profile(body, boundary_sample(body, opt.profile_points, opt.seed));
  if (r.profile.count == 0) throw Error("mpb_classify", "no sample point with positive definite second fundamental form");
  if (r.profile.max > opt.tol) {
    r.kind = MpbKind::NotQuadric;
    return r;
  }
  std::vector<Vec> pts;
  for (const BoundaryPoint& b : boundary_sample(body, opt.fit_points, opt.seed + 1, false)) pts.push_back(b.point);
  r.fit = fit_quadric(pts);
  r.kind = r.fit->residual <= opt.tol ? MpbKind::Quadric : MpbKind::Inconsistent;
  return r;
}

const char* to_string(MpbKind k) {
  switch (k) {
    case MpbKind::Quadric: return "Quadric";
    case MpbKind::NotQuadric: return "NotQuadric";
    case MpbKind::Inconsistent: return "Inconsistent";
  }
  return "?";
}

}  // namespace affrev
