// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Tolerances are fixed below and printed with each line.

#include "affrev/blaschke.hpp"
#include "affrev/body.hpp"
#include "affrev/forms.hpp"
#include "affrev/lie.hpp"
#include "affrev/rng.hpp"
#include "affrev/symmetry.hpp"
#include "affrev/verify.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

using namespace affrev;

namespace {

constexpr int kBodies = 10;
constexpr int kSections = 64;

constexpr double kCubicZero = 1e-10;
constexpr double kBlaschkeC = 1e-7;
constexpr double kQuadricSeconds = 60.0;
constexpr double kAxisRad = 1e-4;
constexpr double kClaim33 = 1e-6;
constexpr double kNegResidual = 1e-3;
constexpr double kGap = 10.0;
constexpr double kFactorCos = 1e-6;
constexpr double kNoFactorOracle = 1e-3;
constexpr double kComposition = 1e-12;
constexpr double kLemma7Seconds = 1.0;
constexpr double kApolarity = 1e-6;
constexpr double kSphereS = 1e-8;
constexpr double kJet = 1e-8;
constexpr double kFd = 1e-5;

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("%s %d %s: %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  failures += !ok;
}

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double angle_oracle(const Vec& a, const Vec& b) {
  const Vec x = a.normalized(), y = b.normalized();
  const double c = std::abs(x.dot(y));
  const double s = (x - x.dot(y) * y).norm();
  return std::atan2(s, c);
}

std::string dump(const VerificationReport& r) { return report_to_json(r).dump(2); }

// Reports of the first body of each family, kept for the determinism check.
std::vector<std::pair<BodySpec, std::string>> first_reports;

void quadric_null() {
  const auto t0 = std::chrono::steady_clock::now();
  double cubic = 0, cmax = 0;
  int quadric = 0;
  for (int s = 1; s <= kBodies; ++s) {
    const BodySpec spec = generate_spec("ellipsoid", 4, s);
    VerifyOptions opt;
    opt.sections = kSections;
    const VerificationReport r = run_verify(spec, opt);
    if (s == 1) first_reports.push_back({spec, dump(r)});
    cubic = std::max(cubic, r.cubic_norm);
    cmax = std::max(cmax, r.mpb ? r.mpb->profile.max : std::numeric_limits<double>::infinity());
    quadric += r.verdict == Verdict::Quadric;
  }
  const double t = seconds_since(t0);
  const bool ok = cubic <= kCubicZero && cmax <= kBlaschkeC && quadric == kBodies && t <= kQuadricSeconds;
  report(1, "quadric_null", ok,
         fmt("max |c_f| %.2e (<= %.0e), max C %.2e (<= %.0e), ", cubic, kCubicZero, cmax, kBlaschkeC) +
             std::to_string(quadric) + "/10 Quadric, " + fmt("%.1f s (<= %.0f s)", t, kQuadricSeconds));
}

void revolution_recovery() {
  double worst_angle = 0, worst_claim = 0, worst_cond = 0;
  int revolution = 0, missing_claim = 0;
  for (int s = 1; s <= kBodies; ++s) {
    const BodySpec spec = generate_spec("revolution", 4, s);
    const Mat T = json_mat(spec.params["conjugator"]);
    const Vec truth = T.col(spec.params["axis"].get<int>());
    const Vec sv = Eigen::JacobiSVD<Mat>(T).singularValues();
    worst_cond = std::max(worst_cond, sv[0] / sv[sv.size() - 1]);
    VerifyOptions opt;
    opt.sections = kSections;
    const VerificationReport r = run_verify(spec, opt);
    if (s == 1) first_reports.push_back({spec, dump(r)});
    revolution += r.verdict == Verdict::Revolution;
    worst_angle = std::max(worst_angle, r.axis ? angle_oracle(*r.axis, truth) : M_PI);
    for (const SectionEvidence& e : r.sections) {
      if (!e.claim33) ++missing_claim;
      else worst_claim = std::max(worst_claim, *e.claim33);
    }
  }
  const bool ok = revolution == kBodies && worst_angle <= kAxisRad && worst_claim <= kClaim33 && missing_claim == 0 &&
                  worst_cond <= 10;
  report(2, "revolution_recovery", ok,
         std::to_string(revolution) + "/10 Revolution, " +
             fmt("max axis error %.2e rad (<= %.0e), max Claim 3.3 residual %.2e (<= %.0e), ", worst_angle, kAxisRad,
                 worst_claim, kClaim33) +
             std::to_string(missing_claim) + " sections without residual, " + fmt("max cond %.2f (<= 10)", worst_cond));
}

void negative_controls() {
  double min_res = std::numeric_limits<double>::infinity();
  int neg = 0;
  VerifyOptions opt;
  opt.sections = kSections;
  for (int s = 1; s <= kBodies; ++s) {
    const BodySpec spec = generate_spec("perturbed", 4, s);
    const VerificationReport r = run_verify(spec, opt);
    if (s == 1) first_reports.push_back({spec, dump(r)});
    neg += r.verdict == Verdict::NotRevolution && spec.params["amplitude"].get<double>() == 0.05;
    min_res = std::min(min_res, r.min_section_residual());
  }
  const double gap = min_res / opt.revolution_tol;
  const bool ok = neg == kBodies && min_res >= kNegResidual && gap >= kGap;
  report(3, "negative_controls", ok,
         std::to_string(neg) + "/10 NotRevolution, " +
             fmt("min section residual %.2e (>= %.0e), ", min_res, kNegResidual) +
             fmt("gap to the acceptance tol %.0e is %.1fx (>= %.0fx)", opt.revolution_tol, gap, kGap));
}

// Smallest sampled division residual over a net of directions followed by
// a shrinking random search from the best few.
double oracle_min_division(int m, const std::function<double(const Vec&)>& f, Rng& rng) {
  std::vector<std::pair<double, Vec>> net;
  const int count = m == 3 ? 600 : 1500;
  for (int i = 0; i < count; ++i) {
    const Vec u = rng.unit_vec(m);
    net.push_back({oracle::division_residual(m, f, u, nullptr, 40, 7), u});
  }
  std::sort(net.begin(), net.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double best = net[0].first;
  for (int k = 0; k < 3; ++k) {
    Vec u = net[k].second;
    double r = net[k].first, step = 0.2;
    for (int it = 0; it < 150; ++it) {
      const Vec v = (u + step * rng.normal_vec(m)).normalized();
      const double rv = oracle::division_residual(m, f, v, nullptr, 40, 7);
      if (rv < r) r = rv, u = v;
      else step *= 0.95;
    }
    best = std::min(best, r);
  }
  return best;
}

void cubic_factorization() {
  Rng rng(4004);
  int recovered = 0, spurious = 0;
  double worst_cos_gap = 0;
  for (int t = 0; t < 100; ++t) {
    const int m = 3 + t % 2;
    std::vector<Vec> normals;
    std::function<double(const Vec&)> f;
    if (t < 50) {
      const Vec u = rng.unit_vec(m);
      const Mat G = rng.normal_vec(m * m).reshaped(m, m);
      const Mat q = 0.5 * (G + G.transpose());
      normals = {u};
      f = [u, q](const Vec& x) { return u.dot(x) * x.dot(q * x); };
    } else {
      while (normals.size() < 3) {
        const Vec u = rng.unit_vec(m);
        bool sep = true;
        for (const Vec& v : normals) sep = sep && angle_oracle(u, v) > 0.3;
        if (sep) normals.push_back(u);
      }
      f = [normals](const Vec& x) { return normals[0].dot(x) * normals[1].dot(x) * normals[2].dot(x); };
    }
    const LinearFactorization lf = linear_factors(CubicForm(oracle::tensor_of(m, f)));
    bool all = true;
    for (const Vec& u : normals) {
      double best = 0;
      for (const LinearFactor& F : lf.factors) best = std::max(best, std::abs(F.normal.dot(u)));
      worst_cos_gap = std::max(worst_cos_gap, 1 - best);
      all = all && best >= 1 - kFactorCos;
    }
    recovered += all;
    spurious += lf.factors.size() > normals.size();
  }
  int controls_clean = 0;
  double oracle_min = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 100; ++t) {
    const int m = 3 + t % 2;
    Tensor3 g(m);
    for (double& v : g.data()) v = rng.normal();
    g.symmetrize();
    const CubicForm c(g);
    const auto f = [&c](const Vec& x) { return c(x); };
    controls_clean += linear_factors(c).factors.empty();
    oracle_min = std::min(oracle_min, oracle_min_division(m, f, rng));
  }
  const bool ok = recovered == 100 && spurious == 0 && controls_clean == 100 && oracle_min >= kNoFactorOracle;
  report(4, "cubic_factorization", ok,
         std::to_string(recovered) + "/100 products fully recovered (" + std::to_string(spurious) +
             " with extra factors), " + fmt("max 1-cos %.1e (<= %.0e), ", worst_cos_gap, kFactorCos) +
             std::to_string(controls_clean) + "/100 irreducible controls without factors, " +
             fmt("min division-oracle residual %.2e (>= %.0e)", oracle_min, kNoFactorOracle));
}

// 2PPᵀ − I with P an orthonormal basis of span(cols).
Mat reflection_oracle(const Mat& span) {
  const Eigen::HouseholderQR<Mat> qr(span);
  const Mat P = Mat(qr.householderQ()).leftCols(span.cols());
  return 2 * P * P.transpose() - Mat::Identity(span.rows(), span.rows());
}

void reflection_composition() {
  Rng rng(5005);
  double worst_lib = 0, worst_oracle = 0;
  for (int t = 0; t < 1000; ++t) {
    const int n = 3 + t % 2;
    const Mat Q = rng.orthogonal(n);
    const Vec w = Q.col(n - 1);
    const Vec l1 = (rng.normal() * Q.col(0) + rng.normal() * Q.col(1)).normalized();
    const Vec l2 = (rng.normal() * Q.col(0) + rng.normal() * Q.col(1)).normalized();
    // hyperplanes ⟨ℓ_i, w⟩ ⊕ ⟨ℓ1, ℓ2, w⟩^⊥; the complement is Q's middle columns
    Mat s1(n, n - 1), s2(n, n - 1);
    s1.col(0) = l1;
    s2.col(0) = l2;
    s1.col(1) = s2.col(1) = w;
    for (int k = 2; k < n - 1; ++k) s1.col(k) = s2.col(k) = Q.col(k);
    const Mat lhs_oracle = reflection_oracle(s2) * reflection_oracle(s1);
    const Vec e1 = l1, e2 = (l2 - l2.dot(l1) * l1).normalized();
    const double th = std::atan2(l2.dot(e2), l2.dot(l1));
    const Mat rot = Mat::Identity(n, n) + (std::cos(2 * th) - 1) * (e1 * e1.transpose() + e2 * e2.transpose()) +
                    std::sin(2 * th) * (e2 * e1.transpose() - e1 * e2.transpose());
    Mat lhs(n, n), rhs(n, n);
    for (int k = 0; k < n; ++k) {
      const CompositionCheck c = reflection_composition_check(l1, l2, w, Vec::Unit(n, k));
      lhs.col(k) = c.lhs;
      rhs.col(k) = c.rhs;
    }
    worst_lib = std::max(worst_lib, (lhs - rhs).norm());
    worst_oracle = std::max({worst_oracle, (lhs_oracle - rot).norm(), (lhs - lhs_oracle).norm()});
  }
  const bool ok = worst_lib <= kComposition && worst_oracle <= kComposition;
  report(5, "reflection_composition", ok,
         fmt("1000 configurations in R^3/R^4: max |Ref*Ref - Rot| %.2e, oracle disagreement %.2e (<= %.0e)",
             worst_lib, worst_oracle, kComposition));
}

void lemma7() {
  Rng rng(6006);
  struct Case {
    int m;
    bool shared;
    int expect;
  };
  bool ok = true;
  std::string detail;
  for (const Case& c : {Case{5, true, 6}, Case{5, false, 10}, Case{4, true, 3}, Case{4, false, 6}}) {
    std::vector<Mat> planes;
    const Vec line = rng.unit_vec(c.m);
    for (int i = 0; i < 3; ++i) {
      Mat P(c.m, 2);
      P.col(0) = c.shared ? line : rng.normal_vec(c.m);
      P.col(1) = rng.normal_vec(c.m);
      planes.push_back(Mat(Eigen::HouseholderQR<Mat>(P).householderQ()).leftCols(2));
    }
    const auto t0 = std::chrono::steady_clock::now();
    const Lemma7Result r = lemma7_check(planes);
    const double t = seconds_since(t0);
    const Lemma7Verdict want = c.shared ? Lemma7Verdict::CodimOneRevolution : Lemma7Verdict::FullOrthogonal;
    const bool good = r.total_dim == c.expect && r.verdict == want && t <= kLemma7Seconds;
    ok = ok && good;
    detail += "R^" + std::to_string(c.m) + (c.shared ? " shared-line " : " transversal ") +
              std::to_string(r.total_dim) + " (want " + std::to_string(c.expect) + ", " + to_string(r.verdict) +
              fmt(", %.3f s); ", t);
  }
  report(6, "lemma7", ok, detail + fmt("time limit %.0f s each", kLemma7Seconds));
}

void blaschke_identities() {
  Rng rng(7007);
  double apol = 0, quadric_c = 0;
  int points = 0;
  for (int s = 1; s <= kBodies; ++s) {
    for (const char* fam : {"ellipsoid", "revolution"}) {
      const SmoothBody body = build_body(generate_spec(fam, 4, s));
      const auto sample = boundary_sample(body, 50, 900 + s);
      for (const BoundaryPoint& b : sample) {
        const BlaschkeData d = blaschke_at(ChartGraph(canonical_jet(body, b).chart), Vec::Zero(3), {false, 1e-4});
        apol = std::max(apol, d.apolarity);
        if (std::string(fam) == "ellipsoid") quadric_c = std::max(quadric_c, d.C.frobenius());
        ++points;
      }
    }
  }
  double sphere = 0;
  for (int m : {2, 3, 4}) {
    const FunctionGraph g = sphere_graph(m);
    for (int t = 0; t < 5; ++t) {
      const Vec x = t == 0 ? Vec(Vec::Zero(m)) : Vec(0.4 * rng.unit_vec(m));
      sphere = std::max(sphere, (blaschke_at(g, x).S - Mat::Identity(m, m)).cwiseAbs().maxCoeff());
    }
  }
  // two bodies agreeing to third order at the pole e_4
  const int n = 4;
  Polynomial base = Polynomial::quadratic(Mat::Identity(n, n), -1.0);
  base.add_term(0.4, {3, 0, 0, 0});
  base.add_term(0.3, {1, 1, 1, 0});
  base.add_term(0.2, {0, 2, 0, 1});
  base.add_term(-0.2, {0, 2, 0, 0});
  Polynomial s = Polynomial::quadratic(Mat::Identity(n, n), 1.0);
  s.add_term(-2.0, {0, 0, 0, 1});
  const Polynomial q1 = (s * s).scaled(0.3);
  const Polynomial q2 = (Polynomial::univariate(n, 0, {0, 0, 1}) * Polynomial::univariate(n, 3, {1, -2, 1})).scaled(-0.5);
  const SmoothBody k1(std::make_shared<PolynomialField>(base + q1), 3.0, "k1");
  const SmoothBody k2(std::make_shared<PolynomialField>(base + q2), 3.0, "k2");
  const Vec pole = Vec::Unit(n, 3);
  auto C_at = [&](const SmoothBody& k) {
    return blaschke_at(ChartGraph(canonical_jet(k, boundary_project(k, pole)).chart), Vec::Zero(3), {false, 1e-4}).C;
  };
  const Tensor3 c1 = C_at(k1), c2 = C_at(k2);
  double jet = 0;
  for (size_t i = 0; i < c1.data().size(); ++i) jet = std::max(jet, std::abs(c1.data()[i] - c2.data()[i]));
  const double c_norm = c1.frobenius();
  const bool distinct = std::abs(k1.field().value(Vec::Constant(n, 0.5)) - k2.field().value(Vec::Constant(n, 0.5))) > 1e-3;
  const bool ok = apol <= kApolarity && quadric_c <= kBlaschkeC && sphere <= kSphereS && jet <= kJet && distinct &&
                  c_norm > 1e-2;
  report(7, "blaschke_identities", ok,
         fmt("apolarity %.2e (<= %.0e) and ellipsoid C %.2e (<= %.0e) over ", apol, kApolarity, quadric_c, kBlaschkeC) +
             std::to_string(points) + " points, " + fmt("sphere |S - I| %.2e (<= %.0e), ", sphere, kSphereS) +
             fmt("equal-jet |C1 - C2| %.2e (<= %.0e) at |C| = %.3f", jet, kJet, c_norm));
}

// Central five-point stencil of a vector-valued function along e_k.
template <class F>
auto stencil(F f, const Vec& x, int k, double h) {
  using R = decltype(f(x));
  auto at = [&](double t) {
    Vec y = x;
    y[k] += t;
    return f(y);
  };
  const R out = (at(-2 * h) - 8 * at(-h) + 8 * at(h) - at(2 * h)) / (12 * h);
  return out;
}

void hygiene() {
  Rng rng(8008);
  double worst = 0;
  for (int dim : {4, 5})
    for (const char* fam : {"ellipsoid", "revolution", "perturbed"}) {
      const SmoothBody body = build_body(generate_spec(fam, dim, 3));
      const ScalarField& F = body.field();
      for (int t = 0; t < 20; ++t) {
        const Vec x = boundary_project(body, rng.unit_vec(dim)).point * rng.uniform(0.8, 1.1);
        const FieldJet j = F.jet(x, 3);
        const double h = 1e-3;
        Vec g(dim);
        Mat H(dim, dim);
        Tensor3 T(dim);
        for (int k = 0; k < dim; ++k) {
          g[k] = stencil([&](const Vec& y) { return F.value(y); }, x, k, h);
          H.col(k) = stencil([&](const Vec& y) { return Vec(F.jet(y, 1).grad); }, x, k, h);
          const Mat dk = stencil([&](const Vec& y) { return Mat(F.jet(y, 2).hess); }, x, k, h);
          for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b) T(a, b, k) = dk(a, b);
        }
        Tensor3 dT = T;
        dT *= -1.0;
        dT += j.third;
        worst = std::max({worst, (g - j.grad).norm() / std::max(1.0, j.grad.norm()),
                          (H - j.hess).norm() / std::max(1.0, j.hess.norm()),
                          dT.frobenius() / std::max(1.0, j.third.frobenius())});
      }
      // implicit chart derivatives against differences of the solved chart
      const BoundaryPoint b = boundary_project(body, rng.unit_vec(dim));
      const Jet3 jet = canonical_jet(body, b);
      const Vec y = 0.01 * rng.normal_vec(dim - 1);
      const GraphChart::Jet cj = jet.chart.derivatives(y);
      Vec cg(dim - 1);
      for (int k = 0; k < dim - 1; ++k)
        cg[k] = stencil([&](const Vec& z) { return jet.chart.value(z, cj.value); }, y, k, 1e-3);
      worst = std::max(worst, (cg - cj.grad).norm() / std::max(1.0, cj.grad.norm()));
    }
  // determinism: the first report of each family again, then with 3 threads
  int identical = 0, compared = 0;
  for (const auto& [spec, text] : first_reports) {
    for (int threads : {1, 3}) {
      VerifyOptions opt;
      opt.sections = kSections;
      opt.threads = threads;
      identical += dump(run_verify(spec, opt)) == text;
      ++compared;
    }
  }
  const bool ok = worst <= kFd && identical == compared && compared == 6;
  report(8, "hygiene", ok,
         fmt("max relative analytic-vs-stencil error %.2e (<= %.0e, norm floor 1), ", worst, kFd) +
             std::to_string(identical) + "/" + std::to_string(compared) + " reruns byte-identical (threads 1 and 3)");
}

}  // namespace

int main() {
  const std::pair<const char*, void (*)()> criteria[] = {
      {"quadric_null", quadric_null},           {"revolution_recovery", revolution_recovery},
      {"negative_controls", negative_controls}, {"cubic_factorization", cubic_factorization},
      {"reflection_composition", reflection_composition}, {"lemma7", lemma7},
      {"blaschke_identities", blaschke_identities}, {"hygiene", hygiene}};
  int id = 0;
  for (const auto& [name, run] : criteria) {
    ++id;
    try {
      run();
    } catch (const std::exception& e) {
      report(id, name, false, std::string("threw: ") + e.what());
    }
  }
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
