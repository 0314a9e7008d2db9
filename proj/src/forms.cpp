#include "affrev/forms.hpp"

#include "affrev/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace affrev {

CubicForm restrict(const CubicForm& c, const Hyperplane& hp) {
  if (hp.ambient_dim() != c.dim()) throw Error("form_algebra", "restrict: dimension mismatch");
  return c.composed(hp.basis());
}

namespace {

Mat projector(const Vec& u) {
  return Mat::Identity(u.size(), u.size()) - u * u.transpose();
}

Eigen::Map<const Vec> flat(const Tensor3& t) {
  return Eigen::Map<const Vec>(t.data().data(), static_cast<Eigen::Index>(t.data().size()));
}

// Residual tensor D(u) = c ×₁P ×₂P ×₃P and its Jacobian with respect to
// tangent coordinates u(δ) = normalize(u + Bδ).
struct RestrictionModel {
  const Tensor3& c;

  Vec residual(const Vec& u) const {
    const Mat P = projector(u);
    return flat(c.pullback(P));
  }

  Mat jacobian(const Vec& u, const Mat& B) const {
    const int m = c.dim();
    const Mat P = projector(u);
    Mat J(static_cast<Eigen::Index>(m) * m * m, B.cols());
    for (Eigen::Index a = 0; a < B.cols(); ++a) {
      const Vec du = B.col(a);
      const Mat dP = -(du * u.transpose() + u * du.transpose());
      const Tensor3 X = c.contract_modes(dP, P, P);
      Tensor3 d(m);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          for (int k = 0; k < m; ++k) d(i, j, k) = X(i, j, k) + X(j, i, k) + X(k, i, j);
      J.col(a) = flat(d);
    }
    return J;
  }
};

struct Descent {
  Vec u;
  double residual;  // ‖D(u)‖_F
  bool converged;
};

// Levenberg–Marquardt on the sphere with backtracking on the damping.
Descent minimize_restriction(const RestrictionModel& model, Vec u, int max_iter) {
  u.normalize();
  Vec r = model.residual(u);
  double cost = r.squaredNorm();
  double mu = 1e-3;
  bool converged = false;
  for (int it = 0; it < max_iter && !converged; ++it) {
    if (cost == 0.0) {
      converged = true;
      break;
    }
    const Mat B = householder_complement(u);
    const Mat J = model.jacobian(u, B);
    const Mat JtJ = J.transpose() * J;
    const Vec g = J.transpose() * r;
    bool accepted = false;
    for (int bt = 0; bt < 30; ++bt) {
      Mat A = JtJ;
      A.diagonal().array() += mu * std::max(1.0, JtJ.diagonal().maxCoeff());
      const Vec step = A.ldlt().solve(-g);
      const Vec trial = (u + B * step).normalized();
      const Vec rt = model.residual(trial);
      const double ct = rt.squaredNorm();
      if (ct < cost) {
        const Vec from = u;
        u = trial;
        r = rt;
        cost = ct;
        // Doubling along an accepted step: rotationally symmetric cubics
        // have a degenerate stationary ring that plain steps crawl across.
        for (double f = 2.0; f < 1e12; f *= 2.0) {
          const Vec t2 = (from + B * (f * step)).normalized();
          const Vec r2 = model.residual(t2);
          const double c2 = r2.squaredNorm();
          if (!(c2 < cost)) break;
          u = t2;
          r = r2;
          cost = c2;
        }
        const double moved = (u - from).norm();
        mu = std::max(mu / 3.0, 1e-12);
        accepted = true;
        if (moved < 1e-12) converged = true;
        break;
      }
      mu *= 4.0;
      if (step.norm() < 1e-12) break;
    }
    if (!accepted) converged = true;  // no descent direction left: stationary
  }
  return {canonical_sign(u), std::sqrt(cost), converged};
}

}  // namespace

double restriction_norm(const CubicForm& c, const Vec& u) {
  return c.tensor().pullback(projector(u.normalized())).frobenius();
}

Division divide_by_linear(const CubicForm& c, const Vec& u) {
  const int m = c.dim();
  if (u.size() != m) throw Error("form_algebra", "divide_by_linear: dimension mismatch");
  const Vec un = u.normalized();
  const int nq = m * (m + 1) / 2;
  Mat A(static_cast<Eigen::Index>(m) * m * m, nq);
  int col = 0;
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) {
      Mat E = Mat::Zero(m, m);
      E(i, j) = 1.0;
      E(j, i) = 1.0;
      if (i == j) E(i, i) = 1.0;
      A.col(col++) = flat(Tensor3::sym_linear_times_quadratic(un, E));
    }
  const Vec b = flat(c.tensor());
  const Vec x = A.colPivHouseholderQr().solve(b);
  Mat Q = Mat::Zero(m, m);
  col = 0;
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) {
      Q(i, j) = x[col];
      Q(j, i) = x[col];
      ++col;
    }
  Division d{QuadraticForm(Q), 0.0};
  const double cn = b.norm();
  d.residual = cn > 0 ? (A * x - b).norm() / cn : 0.0;
  return d;
}

std::vector<Vec> quadratic_factor_split(const QuadraticForm& q, double rel_tol) {
  const Mat& M = q.matrix();
  const double qn = M.norm();
  if (qn == 0.0) return {};
  Eigen::SelfAdjointEigenSolver<Mat> es(M);
  const Vec& ev = es.eigenvalues();
  std::vector<int> nz;
  for (int i = 0; i < ev.size(); ++i)
    if (std::abs(ev[i]) > rel_tol * qn) nz.push_back(i);
  std::vector<Vec> out;
  if (nz.size() == 1) {
    out.push_back(canonical_sign(es.eigenvectors().col(nz[0])));
  } else if (nz.size() == 2 && ev[nz[0]] * ev[nz[1]] < 0) {
    const int ip = ev[nz[0]] > 0 ? nz[0] : nz[1];
    const int in = ev[nz[0]] > 0 ? nz[1] : nz[0];
    const Vec a = std::sqrt(ev[ip]) * es.eigenvectors().col(ip);
    const Vec b = std::sqrt(-ev[in]) * es.eigenvectors().col(in);
    out.push_back(canonical_sign((a - b).normalized()));
    out.push_back(canonical_sign((a + b).normalized()));
    std::sort(out.begin(), out.end(), [](const Vec& x, const Vec& y) {
      return std::lexicographical_compare(x.data(), x.data() + x.size(), y.data(), y.data() + y.size());
    });
  }
  return out;
}

LinearFactorization linear_factors(const CubicForm& c, const LinearFactorOptions& opt) {
  LinearFactorization out;
  const double cn = c.frobenius();
  if (!std::isfinite(cn)) throw Error("form_algebra", "linear_factors: non-finite cubic");
  if (cn <= opt.zero_floor) {
    out.is_zero = true;
    return out;
  }
  const int m = c.dim();
  // Unit scale, so the damping floor in the descent means the same for
  // every cubic.
  Tensor3 unit = c.tensor();
  unit *= 1.0 / cn;
  const RestrictionModel model{unit};
  Rng rng(opt.seed);

  struct Candidate {
    Vec u;
    double rel;
  };
  std::vector<Candidate> accepted;
  auto consider = [&](const Vec& u, double rel) {
    if (rel > opt.tol) return;
    for (auto& a : accepted) {
      if (std::abs(a.u.dot(u)) > 1.0 - 1e-8) {
        if (rel < a.rel) a = {u, rel};
        return;
      }
    }
    accepted.push_back({u, rel});
  };

  // Algebraic starts first: for ⟨u,x⟩·q with q rotational about u, u is the
  // trace direction and an eigenvector of Σ_jk c_ijk c_ljk.
  std::vector<Vec> starts;
  Vec trace = Vec::Zero(m);
  Mat gram = Mat::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        trace[k] += unit(j, j, k) * (i == j);
        for (int l = 0; l < m; ++l) gram(i, l) += unit(i, j, k) * unit(l, j, k);
      }
  if (trace.norm() > 1e-12) starts.push_back(trace.normalized());
  const Eigen::SelfAdjointEigenSolver<Mat> ges(gram);
  for (int k = 0; k < m; ++k) starts.push_back(ges.eigenvectors().col(k));
  while (static_cast<int>(starts.size()) < opt.starts + m + 1) starts.push_back(rng.unit_vec(m));

  double best = std::numeric_limits<double>::infinity();
  bool any_converged = false;
  for (const Vec& start : starts) {
    const Descent d = minimize_restriction(model, start, opt.max_iterations);
    any_converged = any_converged || d.converged;
    const double rel = d.residual;
    best = std::min(best, rel);
    consider(d.u, rel);
  }
  out.exhausted = !any_converged;
  out.best_residual = best;

  if (!accepted.empty()) {
    std::sort(accepted.begin(), accepted.end(),
              [](const Candidate& a, const Candidate& b) { return a.rel < b.rel; });
    // Deflate by the best factor; the quadratic cofactor may split further.
    const Division first = divide_by_linear(c, accepted.front().u);
    for (const Vec& v : quadratic_factor_split(first.quotient)) {
      const Descent d = minimize_restriction(model, v, opt.max_iterations);
      consider(d.u, d.residual);
    }
    std::sort(accepted.begin(), accepted.end(),
              [](const Candidate& a, const Candidate& b) { return a.rel < b.rel; });
    if (accepted.size() > 3) accepted.resize(3);
    for (const auto& a : accepted) {
      const Division d = divide_by_linear(c, a.u);
      out.factors.push_back({a.u, d.quotient, d.residual});
    }
    std::stable_sort(out.factors.begin(), out.factors.end(),
                     [](const LinearFactor& a, const LinearFactor& b) { return a.residual > b.residual; });
  }
  return out;
}

RotationalFit rotational_fit(const QuadraticForm& q, const Vec& axis) {
  const Mat& Q = q.matrix();
  const int m = q.dim();
  const Vec a = axis.normalized();
  Eigen::Matrix2d N;
  N << m, 1.0, 1.0, 1.0;
  const Eigen::Vector2d rhs(Q.trace(), a.dot(Q * a));
  const Eigen::Vector2d ab = N.fullPivLu().solve(rhs);
  RotationalFit f{ab[0], ab[1], 0.0};
  const double qn = Q.norm();
  if (qn > 0) {
    const Mat R = Q - f.a * Mat::Identity(m, m) - f.b * a * a.transpose();
    f.residual = R.norm() / qn;
  }
  return f;
}

Vec orthogonal_invariants(const CubicForm& c) {
  const int m = c.dim();
  const Tensor3& t = c.tensor();
  Vec tr = Vec::Zero(m);
  Mat M = Mat::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        if (i == j) tr[k] += t(i, j, k);
        for (int l = 0; l < m; ++l) M(i, l) += t(i, j, k) * t(l, j, k);
      }
  Eigen::SelfAdjointEigenSolver<Mat> es(M);
  Vec out(2 + m);
  out[0] = c.frobenius();
  out[1] = tr.norm();
  out.tail(m) = es.eigenvalues();
  return out;
}

}  // namespace affrev
