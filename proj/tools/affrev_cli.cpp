#include "affrev/blaschke.hpp"
#include "affrev/lie.hpp"
#include "affrev/rng.hpp"
#include "affrev/symmetry.hpp"
#include "affrev/verify.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

using namespace affrev;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct Failure {
  std::string stage, message;
};

[[noreturn]] void fail(const std::string& stage, const std::string& message) { throw Failure{stage, message}; }

Vec parse_vec(const std::string& text, int dim, const char* what) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      fail("cli", std::string("cannot parse ") + what + " component \"" + item + "\"");
    }
  }
  if (static_cast<int>(v.size()) != dim)
    fail("cli", std::string(what) + " needs " + std::to_string(dim) + " components, got " + std::to_string(v.size()));
  Vec out = Eigen::Map<Vec>(v.data(), dim);
  if (!(out.norm() > 0) || !std::isfinite(out.norm())) fail("cli", std::string(what) + " must be a finite nonzero vector");
  return out.normalized();
}

void emit(const ordered_json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) fail("cli", "cannot write " + path);
  out << j.dump(2) << "\n";
}

ordered_json cubic_json(const CubicForm& c) {
  return {{"dim", c.dim()}, {"coefficients", c.tensor().data()}};
}

ordered_json jet_json(const Jet3& jet) {
  ordered_json j;
  j["point"] = vec_json(jet.base.point);
  j["radius"] = jet.base.radius;
  j["sff_pd"] = jet.base.sff_pd;
  j["to_world"] = mat_json(jet.to_world);
  j["hessian_error"] = jet.hessian_error;
  j["cubic"] = cubic_json(jet.cubic);
  j["cubic_norm"] = jet.cubic.frobenius();
  return j;
}

ordered_json structure_list(const std::vector<RevolutionStructure>& v) {
  ordered_json a = ordered_json::array();
  for (const RevolutionStructure& s : v)
    a.push_back({{"axis", vec_json(s.axis())}, {"residual", s.residual}, {"conjugator_condition", s.conjugator_condition}});
  return a;
}

int threads_default() {
  if (const char* e = std::getenv("AFFREV_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(e, &end, 10);
    if (end && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
    fail("cli", "AFFREV_THREADS must be a positive integer");
  }
  return 1;
}

Mat random_frame(Rng& rng, int m, int k) { return rng.orthogonal(m).leftCols(k); }

std::vector<Mat> lemma7_preset(const std::string& name, int m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Mat> planes;
  if (name == "transversal") {
    for (int i = 0; i < 3; ++i) planes.push_back(random_frame(rng, m, 2));
  } else if (name == "shared-line") {
    // every fixed plane contains e_m
    const Mat R = rng.orthogonal(m - 1);
    for (int i = 0; i < 3; ++i) {
      Mat P = Mat::Zero(m, 2);
      P(m - 1, 0) = 1.0;
      P.block(0, 1, m - 1, 1) = R.col(0) * std::cos(0.7 * i) + R.col(1) * std::sin(0.7 * i);
      planes.push_back(P);
    }
  } else {
    return {};
  }
  return planes;
}

std::string svg_plot(const VerificationReport& r, const json& rep) {
  (void)r;
  const auto& secs = rep["section_evidence"];
  const double W = 720, H = 360, L = 70, R = 20, T = 30, B = 50;
  double lo = -17, hi = 1;
  auto y_of = [&](double v) {
    const double l = std::log10(std::max(v, 1e-17));
    return T + (hi - std::min(hi, std::max(lo, l))) / (hi - lo) * (H - T - B);
  };
  const size_t n = std::max<size_t>(1, secs.size());
  auto x_of = [&](size_t i) { return L + (n == 1 ? 0.5 : static_cast<double>(i) / (n - 1)) * (W - L - R); };
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << L << "\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">body "
    << rep["body_id"].get<std::string>() << " verdict " << rep["verdict"]["kind"].dump() << "</text>\n";
  for (int e = static_cast<int>(lo); e <= hi; e += 2) {
    const double y = y_of(std::pow(10.0, e));
    o << "<line x1=\"" << L << "\" x2=\"" << W - R << "\" y1=\"" << y << "\" y2=\"" << y << "\" stroke=\"#ddd\"/>";
    o << "<text x=\"" << L - 6 << "\" y=\"" << y + 4 << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">1e"
      << e << "</text>\n";
  }
  const double tol = rep["tolerances"]["revolution_tol"].get<double>();
  o << "<line x1=\"" << L << "\" x2=\"" << W - R << "\" y1=\"" << y_of(tol) << "\" y2=\"" << y_of(tol)
    << "\" stroke=\"#c33\" stroke-dasharray=\"4 3\"/>\n";
  auto series = [&](const char* key, const char* color) {
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
    for (size_t i = 0; i < secs.size(); ++i)
      if (secs[i][key].is_number()) o << x_of(i) << "," << y_of(secs[i][key].get<double>()) << " ";
    o << "\"/>\n";
    for (size_t i = 0; i < secs.size(); ++i)
      if (secs[i][key].is_number())
        o << "<circle cx=\"" << x_of(i) << "\" cy=\"" << y_of(secs[i][key].get<double>()) << "\" r=\"2.5\" fill=\"" << color
          << "\"/>";
    o << "\n";
  };
  series("residual", "#1f5fa8");
  series("claim3_3_residual", "#2a9d4b");
  o << "<text x=\"" << L << "\" y=\"" << H - 15
    << "\" font-family=\"sans-serif\" font-size=\"11\">section index; blue: detection residual, green: cubic restriction "
       "residual, red: detection tolerance</text>\n";
  o << "</svg>\n";
  return o.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"affine revolution verifier"};
  app.require_subcommand(1);

  std::string family, out, file, direction, normal, config, report_out, plot;
  int dim = 4, sections = 64, threads = 0, trials = 200, k = 2;
  std::uint64_t seed = 1;
  double tol = 1e-6;
  bool timings = false;

  auto* gen = app.add_subcommand("gen", "generate a body spec");
  gen->add_option("--family", family, "ellipsoid | revolution | perturbed")->required();
  gen->add_option("--dim", dim)->required();
  gen->add_option("--seed", seed);
  gen->add_option("--out", out);

  auto* verify = app.add_subcommand("verify", "run the verification pipeline");
  verify->add_option("file", file)->required();
  verify->add_option("--sections", sections)->check(CLI::Range(1, 4096));
  verify->add_option("--tol", tol)->check(CLI::PositiveNumber);
  verify->add_option("--report", report_out);
  verify->add_option("--threads", threads)->check(CLI::Range(1, 1024));
  verify->add_option("--seed", seed);
  verify->add_flag("--timings", timings, "include wall-clock timings (breaks byte identity)");

  auto* jet = app.add_subcommand("jet", "canonical third-order jet at a boundary point");
  jet->add_option("file", file)->required();
  jet->add_option("--direction", direction)->required();

  auto* cubic = app.add_subcommand("cubic", "cubic form and its linear factors");
  cubic->add_option("file", file)->required();
  cubic->add_option("--direction", direction)->required();
  cubic->add_option("--seed", seed);

  auto* dsec = app.add_subcommand("detect-section", "revolution structures of one central section");
  dsec->add_option("file", file)->required();
  dsec->add_option("--normal", normal)->required();
  dsec->add_option("--seed", seed);

  auto* bl = app.add_subcommand("blaschke", "Blaschke structure at a boundary point");
  bl->add_option("file", file)->required();
  bl->add_option("--direction", direction)->required();

  auto* l7 = app.add_subcommand("lemma7", "bracket closure of three codimension 2 structures");
  l7->add_option("--dim", dim)->required()->check(CLI::Range(3, 12));
  l7->add_option("--config", config, "JSON file, or preset: transversal | shared-line")->required();
  l7->add_option("--seed", seed);

  auto* rp = app.add_subcommand("report", "plot a verification report");
  rp->add_option("file", file)->required();
  rp->add_option("--plot", plot)->required();

  auto* cs = app.add_subcommand("closure-survey", "random k+1 codimension k structures; closure statistics only");
  cs->add_option("--dim", dim)->check(CLI::Range(4, 10));
  cs->add_option("--k", k)->check(CLI::Range(1, 9));
  cs->add_option("--trials", trials)->check(CLI::Range(1, 100000));
  cs->add_option("--seed", seed);
  cs->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", {{"stage", "cli"}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  }

  try {
    if (*gen) {
      const BodySpec s = generate_spec(family, dim, seed);
      if (out.empty()) std::cout << spec_to_json(s).dump(2) << "\n";
      else save_spec(s, out);
      return 0;
    }
    if (*verify) {
      const BodySpec s = load_spec(file);
      VerifyOptions o;
      o.sections = sections;
      o.tol = tol;
      o.threads = threads > 0 ? threads : threads_default();
      o.seed = seed;
      o.timings = timings;
      const VerificationReport r = run_verify(s, o);
      const ordered_json j = report_to_json(r);
      emit(j, report_out);
      if (!report_out.empty())
        std::cout << "verdict " << j["verdict"]["kind"].dump() << " branch " << j["branch"].dump() << "\n";
      if (r.error_stage)
        std::cerr << json{{"error", {{"stage", *r.error_stage}, {"message", *r.error_message}}}}.dump() << "\n";
      return r.exit_code();
    }
    if (*jet || *cubic || *bl) {
      const SmoothBody body = build_body(load_spec(file));
      const BoundaryPoint p = boundary_project(body, parse_vec(direction, body.dim(), "direction"));
      const Jet3 j3 = canonical_jet(body, p);
      if (*jet) {
        emit(jet_json(j3), "");
      } else if (*cubic) {
        LinearFactorOptions fo;
        fo.seed = seed;
        const LinearFactorization f = linear_factors(j3.cubic, fo);
        ordered_json j;
        j["cubic"] = cubic_json(j3.cubic);
        j["norm"] = j3.cubic.frobenius();
        j["is_zero"] = f.is_zero;
        j["search_best_residual"] = f.best_residual;
        ordered_json fl = ordered_json::array();
        for (const LinearFactor& lf : f.factors) {
          const RotationalFit fit = rotational_fit(lf.cofactor, lf.normal);
          fl.push_back({{"normal", vec_json(lf.normal)},
                        {"residual", lf.residual},
                        {"cofactor", mat_json(lf.cofactor.matrix())},
                        {"rotational_fit", {{"a", fit.a}, {"b", fit.b}, {"residual", fit.residual}}}});
        }
        j["factors"] = fl;
        emit(j, "");
      } else {
        const ChartGraph g(j3.chart);
        const BlaschkeData b = blaschke_at(g, Vec::Zero(body.dim() - 1));
        ordered_json j;
        j["point"] = vec_json(p.point);
        j["h"] = mat_json(b.h);
        j["xi_chart"] = vec_json(b.xi);
        j["S"] = mat_json(b.S);
        j["C"] = {{"dim", b.C.dim()}, {"coefficients", b.C.data()}};
        j["apolarity"] = b.apolarity;
        j["C_hnorm"] = b.C_hnorm;
        j["metric_mismatch"] = b.metric_mismatch;
        j["xi_tangency"] = b.xi_tangency;
        emit(j, "");
      }
      return 0;
    }
    if (*dsec) {
      const SmoothBody body = build_body(load_spec(file));
      if (body.dim() < 4) fail("detect-section", "sections of a 3-body are planar; need dim >= 4");
      const Hyperplane hp(parse_vec(normal, body.dim(), "normal"));
      const SectionBody sec = section(body, hp);
      DetectOptions d;
      d.seed = seed;
      RevolutionDetection det = detect_revolution(sec.body, d);
      for (RevolutionStructure& s : det.structures) s.fixed_space = sec.embed * s.fixed_space;
      ordered_json j;
      j["normal"] = vec_json(hp.normal());
      j["structures"] = structure_list(det.structures);
      j["all_axes"] = det.all_axes;
      j["best_residual"] = det.best_residual;
      j["best_axis"] = det.best_axis.size() ? ordered_json(vec_json(sec.embed * det.best_axis)) : ordered_json(nullptr);
      emit(j, "");
      return 0;
    }
    if (*l7) {
      std::vector<Mat> planes = lemma7_preset(config, dim, seed), conj;
      if (planes.empty()) {
        std::ifstream in(config);
        if (!in) fail("lemma7", "cannot open config " + config);
        json c;
        try {
          in >> c;
        } catch (const json::exception& e) {
          fail("lemma7", std::string("malformed JSON: ") + e.what());
        }
        if (!c.contains("planes") || !c["planes"].is_array()) fail("lemma7", "config needs \"planes\"");
        for (const json& p : c["planes"]) {
          Mat P = json_mat(p);
          if (P.rows() != dim) fail("lemma7", "plane rows must equal --dim");
          planes.push_back(orthonormal_span(P, 1e-12));
        }
        if (c.contains("conjugators"))
          for (const json& a : c["conjugators"]) conj.push_back(json_mat(a));
      }
      const Lemma7Result r = conj.empty() ? lemma7_check(planes) : lemma7_check(planes, conj);
      ordered_json j;
      j["dim"] = dim;
      j["pair_closure_dims"] = {r.pair_dims[0], r.pair_dims[1], r.pair_dims[2]};
      j["total_closure_dim"] = r.total_dim;
      j["so_dim"] = dim * (dim - 1) / 2;
      j["verdict"] = to_string(r.verdict);
      j["fixed_line"] = r.fixed_line ? ordered_json(vec_json(*r.fixed_line)) : ordered_json(nullptr);
      emit(j, "");
      return 0;
    }
    if (*rp) {
      std::ifstream in(file);
      if (!in) fail("report", "cannot open " + file);
      json rep;
      try {
        in >> rep;
      } catch (const json::exception& e) {
        fail("report", std::string("malformed JSON: ") + e.what());
      }
      if (!rep.contains("section_evidence") || !rep.contains("tolerances")) fail("report", "not a verification report");
      std::ofstream o(plot);
      if (!o) fail("report", "cannot write " + plot);
      o << svg_plot({}, rep);
      return 0;
    }
    if (*cs) {
      if (k >= dim) fail("closure-survey", "need k < dim");
      Rng rng(seed);
      std::map<std::pair<int, int>, int> hist;
      for (int t = 0; t < trials; ++t) {
        std::vector<Mat> gens;
        for (int i = 0; i <= k; ++i) {
          const auto g = embedded_so_generators(random_frame(rng, dim, k));
          gens.insert(gens.end(), g.begin(), g.end());
        }
        const LieAlgebraSpan span = lie_bracket_closure(gens);
        ++hist[{span.dim(), static_cast<int>(common_fixed_space(span).cols())}];
      }
      ordered_json j;
      j["dim"] = dim;
      j["k"] = k;
      j["trials"] = trials;
      j["seed"] = seed;
      j["target_closure_dim"] = (dim - k + 1) * (dim - k) / 2;
      j["target_fixed_dim"] = k - 1;
      ordered_json h = ordered_json::array();
      for (const auto& [key, count] : hist)
        h.push_back({{"closure_dim", key.first}, {"fixed_dim", key.second}, {"count", count}});
      j["histogram"] = h;
      emit(j, out);
      return 0;
    }
  } catch (const Failure& f) {
    std::cerr << json{{"error", {{"stage", f.stage}, {"message", f.message}}}}.dump() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << json{{"error", {{"stage", e.stage()}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"stage", "internal"}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  }
  return 1;
}
