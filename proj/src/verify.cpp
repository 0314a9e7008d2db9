#include "affrev/verify.hpp"

#include "affrev/quadrature.hpp"
#include "affrev/rng.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

namespace affrev {

using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// JSON helpers

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json mat_json(const Mat& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i).transpose()));
  return a;
}

Vec json_vec(const json& j) {
  if (!j.is_array()) throw Error("spec", "expected an array of numbers");
  Vec v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error("spec", "expected an array of numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

Mat json_mat(const json& j) {
  if (!j.is_array() || j.empty()) throw Error("spec", "expected a non-empty array of rows");
  const size_t cols = j[0].is_array() ? j[0].size() : 0;
  Mat m(j.size(), cols);
  for (size_t i = 0; i < j.size(); ++i) {
    const Vec r = json_vec(j[i]);
    if (static_cast<size_t>(r.size()) != cols) throw Error("spec", "ragged matrix");
    m.row(i) = r.transpose();
  }
  return m;
}

// ---------------------------------------------------------------------------
// Specs

json spec_to_json(const BodySpec& s) {
  return json{{"dim", s.dim}, {"family", s.family}, {"params", s.params}, {"seed", s.seed}};
}

BodySpec spec_from_json(const json& j) {
  if (!j.is_object()) throw Error("spec", "spec must be a JSON object");
  for (const char* k : {"dim", "family", "params"})
    if (!j.contains(k)) throw Error("spec", std::string("missing field \"") + k + "\"");
  BodySpec s;
  if (!j["dim"].is_number_integer()) throw Error("spec", "\"dim\" must be an integer");
  s.dim = j["dim"].get<int>();
  if (!j["family"].is_string()) throw Error("spec", "\"family\" must be a string");
  s.family = j["family"].get<std::string>();
  if (!j["params"].is_object()) throw Error("spec", "\"params\" must be an object");
  s.params = j["params"];
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw Error("spec", "\"seed\" must be a non-negative integer");
    s.seed = j["seed"].get<std::uint64_t>();
  }
  return s;
}

BodySpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("spec", "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("spec", "malformed JSON in " + path + ": " + e.what());
  }
  return spec_from_json(j);
}

void save_spec(const BodySpec& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("spec", "cannot write " + path);
  out << spec_to_json(s).dump(2) << "\n";
}

namespace {

Mat random_spd(Rng& rng, int n, double lo, double hi) {
  const Mat R = rng.orthogonal(n);
  Vec l(n);
  for (int i = 0; i < n; ++i) l[i] = rng.uniform(lo, hi);
  Mat Q = R * l.asDiagonal() * R.transpose();
  return 0.5 * (Q + Q.transpose());
}

}  // namespace

BodySpec generate_spec(const std::string& family, int dim, std::uint64_t seed) {
  if (dim < 3 || dim > 6) throw Error("spec", "dim must be in 3..6");
  BodySpec s;
  s.dim = dim;
  s.family = family;
  s.seed = seed;
  Rng rng(seed);
  if (family == "ellipsoid") {
    s.params["Q"] = mat_json(random_spd(rng, dim, 0.5, 3.0));
  } else if (family == "revolution") {
    s.params["profile"] = json::array({1.0, rng.uniform(-0.3, 0.3), rng.uniform(-0.15, 0.15)});
    s.params["axis"] = dim - 1;
    Vec sv(dim);
    for (int i = 0; i < dim; ++i) sv[i] = rng.uniform(0.6, 1.8);
    const Mat A = rng.orthogonal(dim) * sv.asDiagonal() * rng.orthogonal(dim);
    s.params["conjugator"] = mat_json(A);
  } else if (family == "perturbed") {
    s.params["base"] = "ball";
    s.params["amplitude"] = 0.05;
    s.params["kind"] = "generic";
    s.params["harmonics_seed"] = seed;
    s.params["axis"] = dim - 1;
  } else {
    throw Error("spec", "unknown family \"" + family + "\"");
  }
  return s;
}

namespace {

const json& param(const BodySpec& s, const char* key) {
  if (!s.params.contains(key)) throw Error("spec", "family " + s.family + " needs params." + key);
  return s.params[key];
}

Mat square_param(const BodySpec& s, const char* key) {
  const Mat M = json_mat(param(s, key));
  if (M.rows() != s.dim || M.cols() != s.dim) throw Error("spec", std::string("params.") + key + " must be dim × dim");
  return M;
}

int axis_param(const BodySpec& s) {
  if (!s.params.contains("axis")) return s.dim - 1;
  const json& a = s.params["axis"];
  if (!a.is_number_integer() || a.get<int>() < 0 || a.get<int>() >= s.dim)
    throw Error("spec", "params.axis must be an integer in [0, dim)");
  return a.get<int>();
}

}  // namespace

SmoothBody build_body(const BodySpec& s) {
  if (s.dim < 3 || s.dim > 6) throw Error("spec", "dim must be in 3..6");
  if (s.family == "ellipsoid") return make_ellipsoid(square_param(s, "Q"));
  if (s.family == "revolution") {
    const Vec prof = json_vec(param(s, "profile"));
    if (prof.size() == 0) throw Error("spec", "params.profile must be non-empty");
    const Mat A = s.params.contains("conjugator") ? square_param(s, "conjugator") : Mat::Identity(s.dim, s.dim);
    return make_revolution_body(std::vector<double>(prof.data(), prof.data() + prof.size()), axis_param(s), A);
  }
  if (s.family == "perturbed") {
    const json& b = param(s, "base");
    SmoothBody base = make_ellipsoid(Mat::Identity(s.dim, s.dim));
    if (b.is_object()) {
      BodySpec bs{s.dim, "ellipsoid", b, s.seed};
      base = make_ellipsoid(square_param(bs, "Q"));
    } else if (!(b.is_string() && b.get<std::string>() == "ball")) {
      throw Error("spec", "params.base must be \"ball\" or {\"Q\": ...}");
    }
    const json& amp = param(s, "amplitude");
    if (!amp.is_number()) throw Error("spec", "params.amplitude must be a number");
    Harmonics h;
    const std::string kind = s.params.value("kind", std::string("generic"));
    if (kind == "generic") h.kind = Harmonics::Kind::Generic;
    else if (kind == "axis_invariant") h.kind = Harmonics::Kind::AxisInvariant;
    else throw Error("spec", "params.kind must be \"generic\" or \"axis_invariant\"");
    const json& hs = param(s, "harmonics_seed");
    if (!hs.is_number_unsigned()) throw Error("spec", "params.harmonics_seed must be a non-negative integer");
    h.seed = hs.get<std::uint64_t>();
    h.axis_index = axis_param(s);
    SmoothBody body = make_perturbed_body(base, amp.get<double>(), h);
    if (h.kind == Harmonics::Kind::AxisInvariant && !b.is_object()) body = body.with_ground_truth_axis(Vec::Unit(s.dim, h.axis_index));
    return body;
  }
  throw Error("spec", "unknown family \"" + s.family + "\"");
}

std::string body_id(const BodySpec& s) {
  const std::string text = spec_to_json(s).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream o;
  o << std::hex;
  o.width(16);
  o.fill('0');
  o << h;
  return o.str();
}

// ---------------------------------------------------------------------------
// Maximal radius point

BoundaryPoint find_max_radius_point(const SmoothBody& body, int net_size) {
  const int n = body.dim();
  if (net_size <= 0) net_size = n <= 4 ? 4096 : 8192;
  const SphereRule net = fibonacci_sphere(n, net_size);
  std::vector<double> rho(net.size());
  double best = 0.0;
  for (size_t i = 0; i < net.size(); ++i) {
    rho[i] = radial(body, net.nodes[i]);
    best = std::max(best, rho[i]);
  }
  Vec theta;
  for (size_t i = 0; i < net.size(); ++i) {
    if (rho[i] < best * (1 - 1e-12)) continue;
    const Vec c = body.symmetric() ? canonical_sign(net.nodes[i]) : net.nodes[i];
    if (theta.size() == 0 || std::lexicographical_compare(c.data(), c.data() + n, theta.data(), theta.data() + n))
      theta = c;
  }

  auto grad = [&](const Vec& t, double& r) {
    r = radial(body, t);
    const Vec g = body.field().jet(r * t, 1).grad;
    return Vec(-r * (g - g.dot(t) * t) / g.dot(t));
  };
  double r;
  Vec g = grad(theta, r);
  double eta = 1.0;
  for (int it = 0; it < 500 && g.norm() > 1e-13; ++it) {
    bool moved = false;
    while (eta > 1e-16) {
      const Vec tn = (theta + eta * g).normalized();
      double rn;
      const Vec gn = grad(tn, rn);
      if (rn > r + 1e-4 * eta * g.squaredNorm()) {
        theta = tn;
        r = rn;
        g = gn;
        eta *= 2;
        moved = true;
        break;
      }
      eta *= 0.5;
    }
    if (!moved) break;
  }
  if (body.symmetric()) theta = canonical_sign(theta);
  BoundaryPoint p = boundary_project(body, theta);
  if (!p.sff_pd)
    throw Error("find_max_radius_point", "maximizer without positive definite second fundamental form");
  return p;
}

// ---------------------------------------------------------------------------
// Pipeline

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Revolution: return "Revolution";
    case Verdict::Quadric: return "Quadric";
    case Verdict::NotRevolution: return "NotRevolution";
    case Verdict::Inconsistent: return "Inconsistent";
  }
  return "?";
}

int VerificationReport::exit_code() const {
  if (error_stage) return 1;
  return verdict == Verdict::Inconsistent ? 2 : 0;
}

double VerificationReport::min_section_residual() const {
  double m = std::numeric_limits<double>::infinity();
  for (const SectionEvidence& s : sections)
    if (!s.error) m = std::min(m, s.best_residual);
  return m;
}

double VerificationReport::max_claim33() const {
  double m = 0.0;
  for (const SectionEvidence& s : sections)
    if (s.claim33) m = std::max(m, *s.claim33);
  return m;
}

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a * 0x9e3779b97f4a7c15ULL + b + 0x632be59bd9b4e5ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct SectionContext {
  const SmoothBody& body;
  const Jet3& jet;
  const std::vector<FactorEvidence>& factors;
  const std::optional<SymmetryClass>& global_class;
  const RevolutionDetection* global;
  const VerifyOptions& opt;
};

SectionEvidence evaluate_section(const SectionContext& ctx, int index, const Vec& nu) {
  const int n = ctx.body.dim();
  SectionEvidence ev;
  ev.index = index;
  ev.chart_normal = nu;
  try {
    const Hyperplane hc(nu);
    const Mat Hb = hc.basis();
    const Mat W = ctx.jet.to_world.leftCols(n - 1);
    const Mat WH = W * Hb;
    const Vec& p = ctx.jet.base.point;
    Mat S(n, n - 1);
    S << p, WH;
    const Mat nullv = null_space(S.transpose(), 1e-10);
    if (nullv.cols() != 1) throw Error("section", "degenerate section hyperplane");
    const Hyperplane hw(nullv.col(0));
    ev.normal = hw.normal();
    const SectionBody sec = section(ctx.body, hw);
    const Mat& E = sec.embed;

    DetectOptions dopt;
    dopt.tol = ctx.opt.revolution_tol;
    dopt.seed = mix(ctx.opt.seed, static_cast<std::uint64_t>(index) + 1);
    const RevolutionDetection det = detect_revolution(sec.body, dopt);
    ev.all_axes = det.all_axes;
    ev.best_residual = det.best_residual;
    for (RevolutionStructure s : det.structures) {
      s.fixed_space = E * s.fixed_space;
      ev.structures.push_back(std::move(s));
    }

    const CubicForm cg = restrict(ctx.jet.cubic, hc);
    ev.factor_alignment.assign(ctx.factors.size(), std::numeric_limits<double>::quiet_NaN());
    if (det.all_axes) {
      ev.claim33 = claim33_residual(cg, Vec::Zero(n - 2), ctx.opt.claim_floor);
    } else if (det.structures.size() == 1) {
      const Vec a = ev.structures[0].axis();
      Mat basis(n, n - 1);
      basis << WH, p;
      const Vec coef = basis.colPivHouseholderQr().solve(a);
      const Vec z = coef.head(n - 2);
      ev.claim33 = claim33_residual(cg, z, ctx.opt.claim_floor);
      for (size_t k = 0; k < ctx.factors.size(); ++k) {
        const Vec u = Hb.transpose() * ctx.factors[k].factor.normal;
        if (u.norm() > 1e-9 && z.norm() > 1e-9) ev.factor_alignment[k] = line_angle(z, u);
      }

      // Isotropy of the section at p in chart coordinates: g(Bx) = g(x).
      const Vec ps = E.transpose() * p;
      const Mat Ws = E.transpose() * WH;
      Mat frame(n - 1, n - 1);
      frame << Ws, ps;
      const Eigen::ColPivHouseholderQR<Mat> fqr(frame);
      double orth = 0.0, inv = 0.0;
      Rng rng(mix(dopt.seed, 0xe4));
      std::vector<Vec> probes;
      for (int k = 0; k < 16; ++k) probes.push_back(0.05 * rng.uniform() * rng.unit_vec(n - 2));
      for (const Mat& As : isotropy_elements(det.structures[0], ps, 2, mix(dopt.seed, 0xa5))) {
        const Mat coords = fqr.solve(As * Ws);
        const Mat B = coords.topRows(n - 2);
        orth = std::max(orth, (B.transpose() * B - Mat::Identity(n - 2, n - 2)).cwiseAbs().maxCoeff());
        orth = std::max(orth, coords.bottomRows(1).cwiseAbs().maxCoeff());
        for (const Vec& x : probes) {
          const double gx = ctx.jet.chart.value(Hb * x, 0.5 * x.squaredNorm());
          const Vec bx = B * x;
          const double gbx = ctx.jet.chart.value(Hb * bx, 0.5 * bx.squaredNorm());
          inv = std::max(inv, std::abs(gbx - gx));
        }
      }
      ev.eq4_orthogonality = orth;
      ev.eq4_invariance = inv;

      if (ctx.global_class && ctx.global_class->verdict == SymmetryVerdict::Revolution && ctx.global) {
        // Predicted section axis: the whitened global axis projected into the
        // whitened section hyperplane.
        const RevolutionStructure& gs = ctx.global->structures.front();
        const Mat& T = gs.conjugator;
        const Vec v = (T * gs.axis()).normalized();
        const Vec mu = T.transpose().fullPivLu().solve(hw.normal()).normalized();
        const Vec proj = v - v.dot(mu) * mu;
        if (proj.norm() > 1e-6) ev.axis_consistency = line_angle(T.fullPivLu().solve(proj), a);
      }
    }
  } catch (const Error& e) {
    ev.error = e.stage() + ": " + e.what();
  }
  return ev;
}

}  // namespace

VerificationReport run_verify(const BodySpec& spec, const VerifyOptions& opt) {
  using clock = std::chrono::steady_clock;
  VerificationReport rep;
  rep.spec = spec;
  rep.options = opt;
  rep.body_id = body_id(spec);
  std::string stage = "build_body";
  auto t0 = clock::now();
  auto lap = [&](const std::string& name) {
    const auto t1 = clock::now();
    rep.timings.emplace_back(name, std::chrono::duration<double>(t1 - t0).count());
    t0 = t1;
  };
  try {
    const SmoothBody body = build_body(spec);
    if (body.dim() < 4) throw Error("build_body", "verification needs dim >= 4; sections of a 3-body are planar");
    lap("build_body");

    stage = "find_max_radius_point";
    rep.base_point = find_max_radius_point(body);
    lap(stage);

    stage = "canonical_jet";
    const Jet3 jet = canonical_jet(body, *rep.base_point);
    rep.cubic = jet.cubic;
    rep.cubic_norm = jet.cubic.frobenius();
    rep.hessian_error = jet.hessian_error;
    lap(stage);

    stage = "linear_factors";
    LinearFactorOptions fo;
    fo.tol = opt.factor_tol;
    fo.zero_floor = opt.cubic_floor;
    fo.seed = mix(opt.seed, 0xfac);
    const LinearFactorization lf = linear_factors(jet.cubic, fo);
    rep.cubic_zero = lf.is_zero;
    rep.factor_best_residual = lf.best_residual;
    for (const LinearFactor& f : lf.factors) {
      FactorEvidence fe;
      fe.factor = f;
      fe.fit = rotational_fit(f.cofactor, f.normal);
      rep.factors.push_back(fe);
    }
    lap(stage);

    stage = "detect_revolution";
    DetectOptions gopt;
    gopt.tol = opt.revolution_tol;
    gopt.seed = mix(opt.seed, 0x61);
    rep.global = detect_revolution(body, gopt);
    rep.symmetry = classify_symmetry(*rep.global, body, opt.tol);
    lap(stage);

    stage = "mpb_classify";
    MpbOptions mo;
    mo.tol = opt.tol;
    mo.seed = mix(opt.seed, 0xb1a);
    rep.mpb = mpb_classify(body, mo);
    lap(stage);

    stage = "sections";
    Rng srng(mix(opt.seed, 0x5ec));
    const Mat R = srng.orthogonal(body.dim() - 1);
    const SphereRule net = fibonacci_sphere(body.dim() - 1, std::max(1, opt.sections));
    rep.sections.resize(opt.sections);
    const SectionContext ctx{body, jet, rep.factors, rep.symmetry, &*rep.global, opt};
    std::atomic<int> next{0};
    auto worker = [&]() {
      for (int k = next++; k < opt.sections; k = next++) rep.sections[k] = evaluate_section(ctx, k, R * net.nodes[k]);
    };
    const int threads = std::max(1, std::min(opt.threads, opt.sections));
    if (threads == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
      for (std::thread& t : pool) t.join();
    }
    lap(stage);

    // Factor selection by section evidence.
    for (size_t k = 0; k < rep.factors.size(); ++k) {
      int ok = 0, cnt = 0;
      double sum = 0.0;
      for (const SectionEvidence& s : rep.sections) {
        if (!s.revolution() || k >= s.factor_alignment.size() || std::isnan(s.factor_alignment[k])) continue;
        ++cnt;
        sum += s.factor_alignment[k];
        ok += s.factor_alignment[k] <= opt.alignment_tol;
      }
      rep.factors[k].success_fraction = rep.sections.empty() ? 0.0 : static_cast<double>(ok) / rep.sections.size();
      rep.factors[k].mean_alignment = cnt ? sum / cnt : std::numeric_limits<double>::quiet_NaN();
      const auto& best = rep.selected_factor >= 0 ? rep.factors[rep.selected_factor] : rep.factors[k];
      if (rep.selected_factor < 0 || rep.factors[k].success_fraction > best.success_fraction ||
          (rep.factors[k].success_fraction == best.success_fraction && rep.factors[k].mean_alignment < best.mean_alignment))
        rep.selected_factor = static_cast<int>(k);
    }

    stage = "aggregate";
    if (lf.is_zero) {
      rep.branch = "q_zero";
    } else {
      rep.branch = "mixed";
      for (const FactorEvidence& f : rep.factors)
        if (f.fit.residual <= opt.tol) rep.branch = "V_full";
    }
    int rev_sections = 0;
    for (const SectionEvidence& s : rep.sections) rev_sections += s.revolution();
    const bool all_sections = rev_sections == static_cast<int>(rep.sections.size());
    const SymmetryVerdict g = rep.symmetry->verdict;
    const MpbKind mk = rep.mpb->kind;

    if (g == SymmetryVerdict::Inconsistent || mk == MpbKind::Inconsistent) {
      rep.verdict = Verdict::Inconsistent;
      rep.notes.push_back("symmetry or Maschke-Pick-Berwald stage reported inconsistent evidence");
    } else if (mk == MpbKind::Quadric || g == SymmetryVerdict::Quadric) {
      if (mk == MpbKind::Quadric && g == SymmetryVerdict::Quadric && rep.branch == "q_zero" && all_sections) {
        rep.verdict = Verdict::Quadric;
      } else {
        rep.verdict = Verdict::Inconsistent;
        rep.notes.push_back("quadric evidence is not shared by every stage");
      }
    } else if (g == SymmetryVerdict::Revolution) {
      if (all_sections) {
        rep.verdict = Verdict::Revolution;
        rep.axis = rep.symmetry->axis;
      } else {
        rep.verdict = Verdict::Inconsistent;
        rep.notes.push_back("global axis found but some sections are not bodies of revolution");
      }
    } else {
      if (all_sections && !rep.sections.empty()) {
        rep.verdict = Verdict::Inconsistent;
        rep.notes.push_back("every sampled section is a body of revolution but no global axis was found");
      } else {
        rep.verdict = Verdict::NotRevolution;
      }
    }
    lap(stage);
  } catch (const Error& e) {
    rep.error_stage = e.stage().empty() ? stage : e.stage();
    rep.error_message = e.what();
    rep.verdict = Verdict::Inconsistent;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Report serialization

namespace {

ordered_json opt_num(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

ordered_json point_json(const BoundaryPoint& b) {
  ordered_json j;
  j["point"] = vec_json(b.point);
  j["direction"] = vec_json(b.direction);
  j["radius"] = b.radius;
  j["sff_pd"] = b.sff_pd;
  return j;
}

ordered_json structure_json(const RevolutionStructure& s) {
  ordered_json j;
  j["axis_dim"] = s.axis_dim;
  j["axis"] = vec_json(s.axis());
  j["residual"] = s.residual;
  j["conjugator_condition"] = s.conjugator_condition;
  return j;
}

}  // namespace

ordered_json report_to_json(const VerificationReport& r) {
  const VerifyOptions& o = r.options;
  ordered_json j;
  j["schema"] = 1;
  j["body_id"] = r.body_id;
  j["spec"] = spec_to_json(r.spec);
  j["base_point"] = r.base_point ? point_json(*r.base_point) : ordered_json(nullptr);

  ordered_json js;
  js["cubic_norm"] = r.cubic_norm;
  js["hessian_error"] = r.hessian_error;
  js["is_zero"] = r.cubic_zero;
  js["factor_search_best_residual"] = r.factor_best_residual;
  if (r.cubic) {
    js["cubic"] = {{"dim", r.cubic->dim()}, {"coefficients", r.cubic->tensor().data()}};
  }
  ordered_json fl = ordered_json::array();
  for (const FactorEvidence& f : r.factors) {
    ordered_json e;
    e["normal"] = vec_json(f.factor.normal);
    e["residual"] = f.factor.residual;
    e["cofactor"] = mat_json(f.factor.cofactor.matrix());
    e["rotational_fit"] = {{"a", f.fit.a}, {"b", f.fit.b}, {"residual", f.fit.residual}};
    e["section_success_fraction"] = f.success_fraction;
    e["mean_alignment"] = f.mean_alignment;
    fl.push_back(e);
  }
  js["factors"] = fl;
  js["selected_factor"] = r.selected_factor;
  j["jet_summary"] = js;

  ordered_json se = ordered_json::array();
  for (const SectionEvidence& s : r.sections) {
    ordered_json e;
    e["index"] = s.index;
    e["chart_normal"] = s.chart_normal.size() ? ordered_json(vec_json(s.chart_normal)) : ordered_json(nullptr);
    e["hyperplane"] = s.normal.size() ? ordered_json(vec_json(s.normal)) : ordered_json(nullptr);
    ordered_json st = ordered_json::array();
    for (const RevolutionStructure& x : s.structures) st.push_back(structure_json(x));
    e["structures"] = st;
    e["all_axes"] = s.all_axes;
    e["residual"] = s.best_residual;
    e["claim3_3_residual"] = opt_num(s.claim33);
    e["eq4_orthogonality"] = opt_num(s.eq4_orthogonality);
    e["eq4_invariance"] = opt_num(s.eq4_invariance);
    e["factor_alignment"] = s.factor_alignment;
    e["axis_consistency"] = opt_num(s.axis_consistency);
    e["error"] = s.error ? ordered_json(*s.error) : ordered_json(nullptr);
    se.push_back(e);
  }
  j["section_evidence"] = se;

  if (r.global) {
    ordered_json g;
    ordered_json st = ordered_json::array();
    for (const RevolutionStructure& x : r.global->structures) st.push_back(structure_json(x));
    g["structures"] = st;
    g["all_axes"] = r.global->all_axes;
    g["best_residual"] = r.global->best_residual;
    g["whitening_off_identity"] = r.global->frame.off_identity;
    g["classification"] = r.symmetry ? to_string(r.symmetry->verdict) : "";
    g["quadric_residual"] = r.symmetry && r.symmetry->quadric ? ordered_json(r.symmetry->quadric->residual) : ordered_json(nullptr);
    j["global_symmetry"] = g;
  } else {
    j["global_symmetry"] = nullptr;
  }
  if (r.mpb) {
    ordered_json b;
    b["classification"] = to_string(r.mpb->kind);
    b["C_max"] = r.mpb->profile.max;
    b["C_rms"] = r.mpb->profile.rms;
    b["points"] = r.mpb->profile.count;
    b["quadric_residual"] = r.mpb->fit ? ordered_json(r.mpb->fit->residual) : ordered_json(nullptr);
    j["blaschke"] = b;
  } else {
    j["blaschke"] = nullptr;
  }

  j["branch"] = r.branch.empty() ? ordered_json(nullptr) : ordered_json(r.branch);
  ordered_json v;
  v["kind"] = r.error_stage ? ordered_json(nullptr) : ordered_json(to_string(r.verdict));
  v["axis"] = r.axis ? ordered_json(vec_json(*r.axis)) : ordered_json(nullptr);
  if (r.spec.family == "revolution" && r.axis) {
    // Angle to the generator's axis, for convenience; not used by the rules.
    try {
      const SmoothBody b = build_body(r.spec);
      if (b.ground_truth_axis()) v["ground_truth_angle"] = line_angle(*r.axis, *b.ground_truth_axis());
    } catch (const Error&) {
    }
  }
  j["verdict"] = v;
  j["notes"] = r.notes;
  j["error"] = r.error_stage ? ordered_json{{"stage", *r.error_stage}, {"message", *r.error_message}} : ordered_json(nullptr);

  ordered_json t;
  t["sections"] = o.sections;
  t["tol"] = o.tol;
  t["revolution_tol"] = o.revolution_tol;
  t["factor_tol"] = o.factor_tol;
  t["cubic_floor"] = o.cubic_floor;
  t["claim_floor"] = o.claim_floor;
  t["alignment_tol"] = o.alignment_tol;
  t["seed"] = o.seed;
  j["tolerances"] = t;
  if (o.timings) {
    ordered_json tm;
    for (const auto& [k, s] : r.timings) tm[k] = s;
    j["timings"] = tm;
  }
  return j;
}

}  // namespace affrev
