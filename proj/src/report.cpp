#include "leafgeom/errors.hpp"
#include "leafgeom/scene.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace leafgeom {

namespace {

using Json = nlohmann::ordered_json;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json finite(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json summary(const ScalarField& s) {
  if (s.empty()) return nullptr;
  const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
  return Json{{"min", *lo}, {"max", *hi}, {"mean", mean}};
}

Json check_json(const CheckResult& r) {
  Json values = Json::object();
  for (const auto& [k, v] : r.values) values[k] = finite(v);
  Json orders = Json::array();
  for (double o : r.refinement_orders) orders.push_back(finite(o));
  return Json{{"name", r.name},
              {"kind", to_string(r.kind)},
              {"residual", finite(r.residual)},
              {"tolerance", r.tolerance},
              {"pass", r.pass},
              {"conclusion_only", describe_check(r.name).conclusion_only},
              {"refinement_orders", orders},
              {"values", values},
              {"note", r.note}};
}

Json fiber_json(const FiberDescriptor& d) {
  const char* kind = d.backend == Backend::TriMesh
                         ? (d.surface == SurfaceKind::Sphere ? "icosphere" : "torus_mesh")
                         : (d.surface == SurfaceKind::Sphere ? "sphere_band" : "torus_grid");
  Json j{{"kind", kind}, {"resolution", fiber_level(d)}};
  if (d.backend == Backend::ChartGrid) j["cols"] = d.cols;
  return j;
}

Json scenario_json(const SceneResult& all, const ScenarioResult& s, const std::string& timestamp) {
  const auto& ex = s.extrinsic;
  Json arrays;
  Json hn = Json::array(), hnull = Json::array(), hv = Json::array(), cls = Json::array();
  for (std::size_t i = 0; i < s.points; ++i) {
    hn.push_back({ex.H.normal_coeffs[i](0), ex.H.normal_coeffs[i](1)});
    hnull.push_back({ex.H.null_coeffs[i](0), ex.H.null_coeffs[i](1)});
    const auto& v = ex.H.vector[i];
    hv.push_back({v(0), v(1), v(2), v(3)});
    cls.push_back(to_string(ex.causal.point_class[i]));
  }
  arrays["H_normal"] = hn;
  arrays["H_null"] = hnull;
  arrays["H_vector"] = hv;
  arrays["H_norm2"] = ex.H.norm2;
  arrays["class"] = cls;
  if (!ex.causal.predicate_residual.empty()) arrays["predicate"] = ex.causal.predicate_residual;
  if (!ex.parallel_residual.empty()) arrays["parallel_residual"] = ex.parallel_residual;
  if (ex.umbilic) arrays["umbilic_deviation"] = ex.umbilic->deviation;

  Json checks = Json::array();
  for (const auto& c : s.checks) checks.push_back(check_json(c));
  Json conv = Json::array();
  for (const auto& t : s.convergence) {
    Json rows = Json::array();
    for (const auto& r : t.rows)
      rows.push_back({{"level", r.level}, {"h", r.h}, {"residual", finite(r.result.residual)},
                      {"pass", r.result.pass}});
    Json orders = Json::array();
    for (double o : t.pairwise_orders) orders.push_back(finite(o));
    conv.push_back({{"check", t.check},
                    {"rows", rows},
                    {"pairwise_orders", orders},
                    {"fitted_order", finite(t.fitted_order)}});
  }

  Json doc;
  doc["generated_at"] = timestamp;
  doc["scene"] = all.scene.name;
  doc["scenario"] = s.name;
  doc["provenance"] = to_string(s.spec.provenance);
  doc["time_orientation"] = "dt future-directed; xi, eta future lightlike";
  doc["fiber"] = fiber_json(all.scene.fiber);
  doc["points"] = s.points;
  doc["mean_curvature_source"] = ex.closed_form ? "closed_form" : "oracle";
  doc["summary"] = {{"H_norm2", summary(ex.H.norm2)},
                    {"verdict", to_string(ex.causal.verdict)},
                    {"verdict_orientation", to_string(ex.causal.verdict_orientation)},
                    {"marginal_band", ex.causal.band},
                    {"parallel_residual", summary(ex.parallel_residual)},
                    {"pass", s.pass}};
  doc["checks"] = checks;
  doc["convergence"] = conv;
  doc["arrays"] = arrays;
  return doc;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

Vec3 embed(const FiberDiscretization& fd, std::size_t i) {
  const Vec3 p = fd.position(i);
  if (fd.surface() == SurfaceKind::Sphere) return p;
  const double a = p(0), b = p(1);
  return {(2.0 + std::cos(b)) * std::cos(a), (2.0 + std::cos(b)) * std::sin(a), std::sin(b)};
}

}  // namespace

void write_reports(const SceneResult& result, const std::filesystem::path& dir,
                   const std::string& timestamp) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string());
  const auto& out = result.scene.output;
  if (out.json) {
    for (const auto& s : result.scenarios)
      write_text(dir / (s.name + ".json"), scenario_json(result, s, timestamp).dump(2) + "\n");
  }
  if (out.csv) {
    std::ostringstream sum;
    sum << "scenario,check,kind,residual,tolerance,pass,note\n";
    for (const auto& s : result.scenarios)
      for (const auto& c : s.checks)
        sum << s.name << ',' << c.name << ',' << to_string(c.kind) << ',' << num(c.residual) << ','
            << num(c.tolerance) << ',' << (c.pass ? "pass" : "fail") << ",\"" << c.note << "\"\n";
    write_text(dir / "summary.csv", sum.str());

    std::ostringstream conv;
    conv << "scenario,check,level,h,residual,pass,pairwise_order,fitted_order\n";
    for (const auto& s : result.scenarios)
      for (const auto& t : s.convergence)
        for (std::size_t k = 0; k < t.rows.size(); ++k) {
          const auto& r = t.rows[k];
          conv << s.name << ',' << t.check << ',' << r.level << ',' << num(r.h) << ','
               << num(r.result.residual) << ',' << (r.result.pass ? "pass" : "fail") << ','
               << (k > 0 ? num(t.pairwise_orders[k - 1]) : "") << ',' << num(t.fitted_order)
               << '\n';
        }
    write_text(dir / "convergence.csv", conv.str());
  }
  if (out.plot) {
    const Profile prof(result.scene.profile);
    const auto dom = prof.domain();
    const double lo = dom.r_min + 1e-3 * std::min(1.0, dom.r_max - dom.r_min);
    const double hi = std::min(dom.r_max - 1e-3 * std::min(1.0, dom.r_max - dom.r_min), dom.r_min + 20.0);
    std::ostringstream prof_csv;
    prof_csv << "r,f2,ffp,tortoise\n";
    constexpr int kSamples = 200;
    for (int k = 0; k < kSamples; ++k) {
      const double r = lo + (hi - lo) * k / (kSamples - 1);
      const auto v = prof.eval(r);
      prof_csv << num(r) << ',' << num(v.f2) << ',' << num(v.ffp) << ',' << num(tortoise(prof, r))
               << '\n';
    }
    write_text(dir / "radial_profile.csv", prof_csv.str());
  }
}

std::string export_off(const Scene& scene, const std::string& scenario) {
  const auto names = expand_scenarios(scene);
  if (std::none_of(names.begin(), names.end(), [&](const auto& s) { return s.name == scenario; }))
    throw ConfigError("scene has no scenario named '" + scenario + "'");
  const auto fd = build_fiber(scene.fiber);
  std::vector<std::array<std::size_t, 3>> tris;
  if (fd.is_mesh()) {
    for (const auto& t : fd.mesh().triangles())
      tris.push_back({std::size_t(t[0]), std::size_t(t[1]), std::size_t(t[2])});
  } else {
    const auto& g = fd.grid();
    const int row_cells = g.periodic_rows() ? g.rows() : g.rows() - 1;
    for (int i = 0; i < row_cells; ++i)
      for (int j = 0; j < g.cols(); ++j) {
        const int i1 = (i + 1) % g.rows(), j1 = (j + 1) % g.cols();
        tris.push_back({g.index(i, j), g.index(i1, j), g.index(i1, j1)});
        tris.push_back({g.index(i, j), g.index(i1, j1), g.index(i, j1)});
      }
  }
  std::ostringstream os;
  os << "OFF\n" << fd.size() << ' ' << tris.size() << " 0\n";
  for (std::size_t i = 0; i < fd.size(); ++i) {
    const Vec3 p = embed(fd, i);
    os << num(p(0)) << ' ' << num(p(1)) << ' ' << num(p(2)) << '\n';
  }
  for (const auto& t : tris) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  return os.str();
}

}  // namespace leafgeom
