#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "affrev/blaschke.hpp"
#include "affrev/body.hpp"
#include "affrev/rng.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace affrev;

namespace {

double tdiff(const Tensor3& a, const Tensor3& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

oracle::FdBlaschke fd_of(const GraphOracle& g, const Vec& x) {
  return oracle::blaschke_fd([&](const Vec& y) { return g.jet(y).hess; }, g.jet(x).grad, x);
}

Mat random_spd(Rng& rng, int n, double lo, double hi) {
  const Mat O = rng.orthogonal(n);
  Vec ev(n);
  for (int i = 0; i < n; ++i) ev[i] = rng.uniform(lo, hi);
  return O * ev.asDiagonal() * O.transpose();
}

Mat unimodular(Rng& rng, int n) {
  Mat A(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) A(i, j) = (i == j ? 1.5 : 0.0) + 0.4 * rng.normal();
  if (A.determinant() < 0) A.col(0) *= -1.0;
  return A / std::pow(A.determinant(), 1.0 / n);
}

// (‖x − e_n‖²)² as a polynomial: vanishes to order 3 at e_n.
Polynomial quartic_at_pole(int n) {
  Polynomial s = Polynomial::quadratic(Mat::Identity(n, n), 1.0);
  std::vector<int> e(n, 0);
  e[n - 1] = 1;
  s.add_term(-2.0, e);
  return s * s;
}

// x1² (x_n − 1)², also vanishing to order 3 at e_n.
Polynomial other_quartic(int n) {
  Polynomial a = Polynomial::univariate(n, 0, {0, 0, 1});
  Polynomial b = Polynomial::univariate(n, n - 1, {1, -2, 1});
  return a * b;
}

SmoothBody poly_body(const Polynomial& P, const char* fam) {
  return SmoothBody(std::make_shared<PolynomialField>(P), 3.0, fam);
}

// Graph of ∂K over its tangent plane with the inward Euclidean normal as
// height direction; orthonormal frame, so the chart map has det ±1.
ChartGraph euclidean_chart(const SmoothBody& body, const Vec& p) {
  const SecondFundamentalForm sff = second_fundamental_form(body, p);
  const Vec n = body.field().jet(p, 1).grad.normalized();
  Mat W = sff.tangent_basis;
  Mat frame(p.size(), p.size());
  frame << W, -n;
  if (frame.determinant() < 0) W.col(0) *= -1.0;
  return ChartGraph(GraphChart(body.field_ptr(), p, W, -n));
}

}  // namespace

TEST_CASE("unit sphere: h = I, xi = e_{m+1}, S = I, C = 0") {
  for (int m : {2, 3, 4}) {
    const FunctionGraph g = sphere_graph(m);
    const BlaschkeData d = blaschke_at(g, Vec::Zero(m));
    CHECK((d.h - Mat::Identity(m, m)).cwiseAbs().maxCoeff() < 1e-14);
    Vec e = Vec::Zero(m + 1);
    e[m] = 1;
    CHECK((d.xi - e).norm() < 1e-14);
    REQUIRE(d.shape_available);
    CHECK((d.S - Mat::Identity(m, m)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(d.C.frobenius() < 1e-12);
    // off the pole too: the sphere is a proper affine sphere everywhere
    Rng rng(11 + m);
    for (int t = 0; t < 5; ++t) {
      const Vec x = 0.4 * rng.unit_vec(m);
      const BlaschkeData q = blaschke_at(g, x);
      CHECK((q.S - Mat::Identity(m, m)).cwiseAbs().maxCoeff() < 1e-8);
      CHECK(q.C.frobenius() < 1e-10);
      CHECK(q.apolarity < 1e-10);
    }
  }
}

TEST_CASE("paraboloid: h = I, xi constant, S = 0, C = 0") {
  Rng rng(4);
  for (int m : {2, 3}) {
    const FunctionGraph g = paraboloid_graph(m);
    for (int t = 0; t < 5; ++t) {
      const Vec x = rng.normal_vec(m);
      const BlaschkeData d = blaschke_at(g, x);
      CHECK((d.h - Mat::Identity(m, m)).cwiseAbs().maxCoeff() < 1e-14);
      Vec e = Vec::Zero(m + 1);
      e[m] = 1;
      CHECK((d.xi - e).norm() < 1e-14);
      CHECK(d.S.cwiseAbs().maxCoeff() < 1e-8);
      CHECK(d.C.frobenius() < 1e-12);
    }
  }
}

TEST_CASE("cubic graph: C at the origin is the trace-free part and linear in eps") {
  for (int m : {2, 3, 4}) {
    double prev = 0.0;
    for (double eps : {0.01, 0.02, 0.04}) {
      const FunctionGraph g = cubic_graph(m, eps);
      const BlaschkeData d = blaschke_at(g, Vec::Zero(m));
      const GraphJet j = g.jet(Vec::Zero(m));
      CHECK(tdiff(d.C, oracle::apolar_part(j.third)) < 1e-13);
      CHECK(d.C(0, 0, 0) == doctest::Approx(6 * eps * (m - 1) / (m + 2.0)).epsilon(1e-12));
      CHECK(d.xi[0] == doctest::Approx(-6 * eps / (m + 2.0)).epsilon(1e-12));
      if (prev != 0.0) CHECK(d.C(0, 0, 0) / prev == doctest::Approx(2.0).epsilon(1e-12));
      prev = d.C(0, 0, 0);
      CHECK(d.apolarity < 1e-13);
    }
  }
}

TEST_CASE("structure equation and stencil oracle agree away from special points") {
  Rng rng(21);
  for (int m : {2, 3}) {
    for (double eps : {0.05, 0.3}) {
      const FunctionGraph g = cubic_graph(m, eps);
      for (int t = 0; t < 4; ++t) {
        const Vec x = 0.3 * rng.normal_vec(m);
        const BlaschkeData d = blaschke_at(g, x);
        const oracle::FdBlaschke o = fd_of(g, x);
        CHECK((d.h - o.h).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((d.xi - o.xi).norm() < 1e-6);
        for (int l = 0; l < m; ++l) CHECK((d.gamma[l] - o.gamma[l]).cwiseAbs().maxCoeff() < 1e-6);
        Tensor3 oc = o.C;
        oc.symmetrize();
        CHECK(tdiff(d.C, oc) < 1e-6);
        CHECK(d.metric_mismatch < 1e-8);
        CHECK(d.C_asymmetry < 1e-6);
        CHECK(d.apolarity < 1e-6);
        // volume normalization det[φ_1..φ_m, ξ] = (det h)^{1/2}
        Mat F(m + 1, m + 1);
        F.setZero();
        F.topLeftCorner(m, m).setIdentity();
        F.block(m, 0, 1, m) = g.jet(x).grad.transpose();
        F.col(m) = d.xi;
        CHECK(F.determinant() == doctest::Approx(std::sqrt(d.h.determinant())).epsilon(1e-10));
      }
    }
  }
  // a body boundary over a tilted chart
  const SmoothBody rev = make_revolution_body({1.0, 0.2}, 3, Mat::Identity(4, 4));
  const BoundaryPoint b = boundary_project(rev, Eigen::Vector4d(0.3, -0.5, 0.2, 0.7));
  const ChartGraph cg = euclidean_chart(rev, b.point);
  for (const Vec& y : {Vec(Vec::Zero(3)), Vec(Eigen::Vector3d(0.02, -0.01, 0.03))}) {
    const BlaschkeData d = blaschke_at(cg, y);
    const oracle::FdBlaschke o = fd_of(cg, y);
    Tensor3 oc = o.C;
    oc.symmetrize();
    CHECK(tdiff(d.C, oc) < 1e-6);
    CHECK((d.xi - o.xi).norm() < 1e-6);
  }
}

TEST_CASE("degenerate Hessian is rejected") {
  const FunctionGraph flat(2, [](const Vec& x) {
    GraphJet j;
    j.value = 0.5 * x[0] * x[0];
    j.grad = Eigen::Vector2d(x[0], 0);
    j.hess = Mat::Zero(2, 2);
    j.hess(0, 0) = 1;
    j.third = Tensor3(2);
    return j;
  });
  CHECK_THROWS_AS(blaschke_at(flat, Vec::Zero(2)), Error);
  CHECK_THROWS_AS(blaschke_at(sphere_graph(2), Vec::Zero(3)), Error);
}

TEST_CASE("C profile: zero on ellipsoids, apolar and trace-free at canonical origins") {
  Rng rng(5);
  for (int s = 0; s < 3; ++s) {
    const SmoothBody e = make_ellipsoid(random_spd(rng, 4, 0.5, 3.0));
    const auto sample = boundary_sample(e, 50, 100 + s);
    REQUIRE(sample.size() == 50);
    const CProfile p = cubic_C_profile(e, sample);
    CHECK(p.count == 50);
    CHECK(p.max <= 1e-7);
  }
  const SmoothBody rev = make_revolution_body({1.0, 0.2}, 3, Mat::Identity(4, 4));
  const auto sample = boundary_sample(rev, 50, 7);
  const CProfile p = cubic_C_profile(rev, sample);
  CHECK(p.max > 1e-2);
  double omax = 0.0;
  for (const BoundaryPoint& b : sample) {
    const Jet3 jet = canonical_jet(rev, b);
    const ChartGraph cg(jet.chart);
    const BlaschkeData d = blaschke_at(cg, Vec::Zero(3), {false, 1e-4});
    CHECK(d.apolarity <= 1e-6);
    CHECK((d.h - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
    const Tensor3 oc = oracle::apolar_part(cg.jet(Vec::Zero(3)).third);
    CHECK(tdiff(d.C, oc) < 1e-9);
    omax = std::max(omax, oc.frobenius());
  }
  CHECK(p.max == doctest::Approx(omax).epsilon(1e-8));
}

TEST_CASE("C at p depends only on the 3-jet at p") {
  const int n = 4;
  Eigen::Vector4d pole(0, 0, 0, 1);
  // sphere plus a term of order 4 at the pole
  const SmoothBody osc = poly_body(Polynomial::quadratic(Mat::Identity(n, n), -1.0) + quartic_at_pole(n).scaled(0.3),
                                   "osculating");
  const BoundaryPoint bp = boundary_project(osc, pole);
  CHECK((bp.point - pole).norm() < 1e-12);
  const BlaschkeData at_p = blaschke_at(ChartGraph(canonical_jet(osc, bp).chart), Vec::Zero(3), {false, 1e-4});
  CHECK(at_p.C.frobenius() <= 1e-7);
  const CProfile away = cubic_C_profile(osc, boundary_sample(osc, 20, 3));
  CHECK(away.max > 1e-2);

  // two different bodies with a nonzero but equal 3-jet at the pole
  Polynomial base = Polynomial::quadratic(Mat::Identity(n, n), -1.0);
  base.add_term(0.4, {3, 0, 0, 0});
  base.add_term(0.3, {1, 1, 1, 0});
  base.add_term(0.2, {0, 2, 0, 1});
  base.add_term(-0.2, {0, 2, 0, 0});
  const SmoothBody k1 = poly_body(base + quartic_at_pole(n).scaled(0.3), "k1");
  const SmoothBody k2 = poly_body(base + other_quartic(n).scaled(-0.5), "k2");
  const BoundaryPoint p1 = boundary_project(k1, pole), p2 = boundary_project(k2, pole);
  CHECK((p1.point - pole).norm() < 1e-12);
  CHECK((p2.point - pole).norm() < 1e-12);
  const BlaschkeData c1 = blaschke_at(ChartGraph(canonical_jet(k1, p1).chart), Vec::Zero(3), {false, 1e-4});
  const BlaschkeData c2 = blaschke_at(ChartGraph(canonical_jet(k2, p2).chart), Vec::Zero(3), {false, 1e-4});
  CHECK(c1.C.frobenius() > 1e-2);
  CHECK(tdiff(c1.C, c2.C) <= 1e-8);
  // the bodies are genuinely different elsewhere
  const Eigen::Vector4d u(0.5, 0.4, -0.3, 0.6);
  const BlaschkeData d1 = blaschke_at(euclidean_chart(k1, boundary_project(k1, u).point), Vec::Zero(3), {false, 1e-4});
  const BlaschkeData d2 = blaschke_at(euclidean_chart(k2, boundary_project(k2, u).point), Vec::Zero(3), {false, 1e-4});
  CHECK(std::abs(d1.C_hnorm - d2.C_hnorm) > 1e-3);
}

TEST_CASE("equiaffine invariance of the h-norm of C") {
  Rng rng(31);
  const SmoothBody rev = make_revolution_body({1.0, 0.2}, 3, Mat::Identity(4, 4));
  const SmoothBody ell = make_ellipsoid(random_spd(rng, 4, 0.5, 3.0));
  for (const SmoothBody* body : {&rev, &ell}) {
    for (int t = 0; t < 5; ++t) {
      const Mat A = unimodular(rng, 4);
      REQUIRE(A.determinant() == doctest::Approx(1.0).epsilon(1e-12));
      const SmoothBody AK = body->transformed(A);
      const BoundaryPoint b = boundary_project(*body, rng.unit_vec(4));
      REQUIRE(b.sff_pd);
      const BlaschkeData d1 = blaschke_at(euclidean_chart(*body, b.point), Vec::Zero(3), {false, 1e-4});
      const BlaschkeData d2 = blaschke_at(euclidean_chart(AK, A * b.point), Vec::Zero(3), {false, 1e-4});
      CHECK(std::abs(d1.C_hnorm - d2.C_hnorm) <= 1e-6);
      CHECK(d1.apolarity <= 1e-6);
      CHECK(d2.apolarity <= 1e-6);
      if (body == &rev) CHECK(d1.C_hnorm > 1e-3);
    }
  }
}

TEST_CASE("quadric fit") {
  SUBCASE("exact ellipsoid diag(1,4,9,16)") {
    const SmoothBody e = make_ellipsoid(Eigen::Vector4d(1, 4, 9, 16).asDiagonal().toDenseMatrix());
    std::vector<Vec> pts;
    for (const BoundaryPoint& b : boundary_sample(e, 200, 1, false)) pts.push_back(b.point);
    const QuadricFit f = fit_quadric(pts);
    CHECK(f.residual <= 1e-10);
    Vec d(5);
    d << 1, 4, 9, 16, -1;
    const Mat expect = d.asDiagonal().toDenseMatrix() / d.norm();
    CHECK((f.coeffs - expect).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(f.coeffs.norm() == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("revolution body is not a quadric") {
    const SmoothBody rev = make_revolution_body({1.0, 0.2}, 3, Mat::Identity(4, 4));
    std::vector<Vec> pts;
    for (const BoundaryPoint& b : boundary_sample(rev, 200, 2, false)) pts.push_back(b.point);
    const QuadricFit f = fit_quadric(pts);
    CHECK(f.residual >= 1e-3);
    // residual is the RMS of the fitted form over the samples
    double ss = 0.0;
    for (const Vec& p : pts) {
      Vec xt(5);
      xt << p, 1.0;
      ss += std::pow(xt.dot(f.coeffs * xt), 2);
    }
    CHECK(f.residual == doctest::Approx(std::sqrt(ss / pts.size())).epsilon(1e-10));
  }
  SUBCASE("noisy random ellipsoid") {
    Rng rng(77);
    const SmoothBody e = make_ellipsoid(random_spd(rng, 4, 0.5, 3.0));
    std::vector<Vec> pts;
    for (const BoundaryPoint& b : boundary_sample(e, 200, 3, false)) pts.push_back(b.point + 1e-8 * rng.normal_vec(4));
    CHECK(fit_quadric(pts).residual <= 1e-7);
  }
  SUBCASE("underdetermined") {
    const SmoothBody e = make_ellipsoid(Mat::Identity(4, 4));
    std::vector<Vec> pts;
    for (const BoundaryPoint& b : boundary_sample(e, 10, 4, false)) pts.push_back(b.point);
    CHECK_THROWS_AS(fit_quadric(pts), Error);
    // a great 2-sphere inside a hyperplane lies on many quadrics
    Rng rng(5);
    pts.clear();
    for (int i = 0; i < 100; ++i) {
      Vec u = rng.unit_vec(3);
      pts.push_back(Eigen::Vector4d(u[0], u[1], u[2], 0.0));
    }
    CHECK_THROWS_AS(fit_quadric(pts), Error);
    CHECK_THROWS_AS(fit_quadric({}), Error);
  }
}

TEST_CASE("Maschke-Pick-Berwald classification") {
  Rng rng(8);
  const SmoothBody e = make_ellipsoid(random_spd(rng, 4, 0.5, 3.0));
  const MpbResult a = mpb_classify(e);
  CHECK(a.kind == MpbKind::Quadric);
  REQUIRE(a.fit.has_value());
  CHECK(a.fit->residual <= 1e-6);

  const SmoothBody rev = make_revolution_body({1.0, 0.2}, 3, Mat::Identity(4, 4));
  const MpbResult b = mpb_classify(rev);
  CHECK(b.kind == MpbKind::NotQuadric);
  CHECK(!b.fit.has_value());

  Harmonics h;
  h.seed = 3;
  const SmoothBody ball = make_ellipsoid(Mat::Identity(4, 4));
  const SmoothBody tiny = make_perturbed_body(ball, 1e-9, h);
  const MpbResult c = mpb_classify(tiny);
  CHECK(c.kind == MpbKind::Quadric);
  CHECK(c.profile.max > 0.0);
  CHECK(c.profile.max <= 1e-6);
  // at amplitude 0.05 the same perturbation is resolved
  CHECK(mpb_classify(make_perturbed_body(ball, 0.05, h)).kind == MpbKind::NotQuadric);
  CHECK(std::string(to_string(MpbKind::Inconsistent)) == "Inconsistent");
}
