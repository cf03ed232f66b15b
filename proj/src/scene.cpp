#include "leafgeom/scene.hpp"

#include "leafgeom/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace leafgeom {

namespace {

void allow_keys(const YAML::Node& node, const std::string& section,
                std::initializer_list<const char*> keys) {
  if (!node.IsMap()) throw ConfigError("section '" + section + "' must be a mapping");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in section '" + section + "'");
  }
}

template <class T>
T get(const YAML::Node& node, const char* key, const std::string& section, T fallback) {
  const auto child = node[key];
  if (!child) return fallback;
  try {
    return child.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("bad value for '" + std::string(key) + "' in section '" + section + "'");
  }
}

template <class T>
std::optional<T> get_optional(const YAML::Node& node, const char* key, const std::string& section) {
  if (!node[key]) return std::nullopt;
  return get<T>(node, key, section, T{});
}

Warping parse_warping(const std::string& text) {
  if (text == "r") return Warping::radial();
  if (text == "1") return Warping::constant_one();
  try {
    return Warping::custom(text);
  } catch (const Error& e) {
    throw ConfigError(std::string("warping: ") + e.what());
  }
}

ProfileSpec parse_profile(const YAML::Node& node) {
  const std::string sec = "profile";
  allow_keys(node, sec,
             {"mass", "charge", "cosmo", "fiber_dim", "warping", "domain_scan", "domain_component",
              "tortoise_ref", "tortoise_value"});
  ProfileSpec s;
  s.mass = get(node, "mass", sec, 0.0);
  s.charge = get(node, "charge", sec, 0.0);
  s.cosmo = get(node, "cosmo", sec, 0.0);
  s.fiber_dim = get(node, "fiber_dim", sec, 2);
  s.warping = parse_warping(get<std::string>(node, "warping", sec, "r"));
  if (node["domain_scan"]) {
    const auto scan = get<std::vector<double>>(node, "domain_scan", sec, {});
    if (scan.size() != 2) throw ConfigError("domain_scan must be [r_lo, r_hi]");
    s.scan_lo = scan[0];
    s.scan_hi = scan[1];
  }
  s.domain_component = get_optional<int>(node, "domain_component", sec);
  s.tortoise_ref = get_optional<double>(node, "tortoise_ref", sec);
  s.tortoise_value = get(node, "tortoise_value", sec, 0.0);
  return s;
}

FiberDescriptor parse_fiber(const YAML::Node& node) {
  const std::string sec = "fiber";
  allow_keys(node, sec, {"kind", "level", "radius", "n", "rows", "cols", "band"});
  FiberDescriptor d;
  const auto kind = get<std::string>(node, "kind", sec, "icosphere");
  if (kind == "icosphere") {
    d.backend = Backend::TriMesh;
    d.surface = SurfaceKind::Sphere;
  } else if (kind == "torus_mesh") {
    d.backend = Backend::TriMesh;
    d.surface = SurfaceKind::Torus;
  } else if (kind == "sphere_band") {
    d.backend = Backend::ChartGrid;
    d.surface = SurfaceKind::Sphere;
  } else if (kind == "torus_grid") {
    d.backend = Backend::ChartGrid;
    d.surface = SurfaceKind::Torus;
    d.rows = d.cols = 64;
  } else {
    throw ConfigError("unknown fiber kind '" + kind + "'");
  }
  d.level = get(node, "level", sec, d.level);
  d.radius = get(node, "radius", sec, d.radius);
  d.n = get(node, "n", sec, d.n);
  d.rows = get(node, "rows", sec, d.rows);
  d.cols = get(node, "cols", sec, d.cols);
  if (node["band"]) {
    const auto band = get<std::vector<double>>(node, "band", sec, {});
    if (band.size() != 2 || !(band[0] > 0.0) || !(band[1] > band[0]) || !(band[1] < std::numbers::pi))
      throw ConfigError("band must be [theta_min, theta_max] inside (0, pi)");
    d.theta_min = band[0];
    d.theta_max = band[1];
  }
  if (d.level < 0 || d.n < 3 || d.rows < 5 || d.cols < 5 || !(d.radius > 0.0))
    throw ConfigError("fiber resolution must be positive");
  return d;
}

Provenance parse_provenance(const std::string& s) {
  if (s == "leaf_xi") return Provenance::LeafXi;
  if (s == "leaf_eta") return Provenance::LeafEta;
  if (s == "slice") return Provenance::Slice;
  if (s == "graph") return Provenance::Graph;
  throw ConfigError("unknown provenance '" + s + "'");
}

ImmersionSpec parse_immersion(const YAML::Node& node, std::size_t index) {
  const std::string sec = "immersions[" + std::to_string(index) + "]";
  allow_keys(node, sec, {"name", "provenance", "c", "t0", "r0", "u", "v"});
  ImmersionSpec s;
  s.name = get<std::string>(node, "name", sec, "");
  if (s.name.empty()) throw ConfigError(sec + " needs a name");
  s.provenance = parse_provenance(get<std::string>(node, "provenance", sec, "leaf_xi"));
  s.c = get(node, "c", sec, 0.0);
  s.t0 = get(node, "t0", sec, 0.0);
  s.r0 = get(node, "r0", sec, 0.0);
  s.u = get<std::string>(node, "u", sec, "");
  s.v = get<std::string>(node, "v", sec, "");
  switch (s.provenance) {
    case Provenance::Slice:
      if (!node["r0"]) throw ConfigError(sec + ": slice needs r0");
      break;
    case Provenance::Graph:
      if (s.u.empty() || s.v.empty()) throw ConfigError(sec + ": graph needs u and v");
      break;
    default:
      if (s.v.empty()) throw ConfigError(sec + ": leaf needs v");
  }
  return s;
}

VerificationSpec parse_verification(const YAML::Node& node) {
  const std::string sec = "verification";
  allow_keys(node, sec, {"checks", "levels", "seed", "factoring_tolerance", "curvature_c", "random"});
  VerificationSpec v;
  if (const auto checks = node["checks"]) {
    if (!checks.IsSequence()) throw ConfigError("verification.checks must be a list");
    for (const auto& c : checks) {
      CheckRequest req;
      if (c.IsScalar()) {
        req.name = c.as<std::string>();
      } else {
        allow_keys(c, "verification.checks", {"name", "tolerance"});
        req.name = get<std::string>(c, "name", sec, "");
        req.tolerance = get(c, "tolerance", sec, 0.0);
      }
      try {
        describe_check(req.name);
      } catch (const UnknownCheck& e) {
        throw ConfigError(e.what());
      }
      v.checks.push_back(req);
    }
  }
  v.levels = get<std::vector<int>>(node, "levels", sec, {});
  for (int l : v.levels)
    if (l < 0) throw ConfigError("verification levels must be nonnegative");
  v.seed = get<std::uint64_t>(node, "seed", sec, 0);
  v.factoring_tolerance = get(node, "factoring_tolerance", sec, 0.0);
  v.curvature_c = get_optional<double>(node, "curvature_c", sec);
  if (const auto r = node["random"]) {
    const std::string rs = "verification.random";
    allow_keys(r, rs, {"count", "family", "base", "amplitude"});
    v.random.count = get(r, "count", rs, 0);
    const auto fam = get<std::string>(r, "family", rs, "xi");
    if (fam != "xi" && fam != "eta") throw ConfigError("random.family must be xi or eta");
    v.random.family = fam == "xi" ? LeafFamily::Xi : LeafFamily::Eta;
    v.random.base = get(r, "base", rs, 5.0);
    v.random.amplitude = get(r, "amplitude", rs, 0.1 * v.random.base / 1.1);
    const double min_v = v.random.base - v.random.amplitude;
    if (v.random.count < 0 || !(v.random.amplitude >= 0.0) ||
        v.random.amplitude > 0.1 * min_v * (1.0 + 1e-12))
      throw ConfigError("random amplitude must be at most 10% of min v");
  }
  return v;
}

OutputSpec parse_output(const YAML::Node& node) {
  const std::string sec = "output";
  allow_keys(node, sec, {"directory", "formats"});
  OutputSpec o;
  o.directory = get<std::string>(node, "directory", sec, o.directory.string());
  if (node["formats"]) {
    o.json = o.csv = o.plot = false;
    for (const auto& f : get<std::vector<std::string>>(node, "formats", sec, {})) {
      if (f == "json") o.json = true;
      else if (f == "csv") o.csv = true;
      else if (f == "plot") o.plot = true;
      else throw ConfigError("unknown output format '" + f + "'");
    }
  }
  return o;
}

// Wraps an error from one scenario with its name, keeping the category the CLI
// maps to an exit status.
[[noreturn]] void rethrow_for(const std::string& scenario) {
  const std::string prefix = "scenario '" + scenario + "': ";
  try {
    throw;
  } catch (const NotSpacelike& e) {
    throw NotSpacelike(e.point(), prefix + e.what());
  } catch (const DomainError& e) {
    throw DomainError(prefix + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + e.what());
  } catch (const UnsupportedBackend& e) {
    throw ConfigError(prefix + e.what());
  } catch (const UnsupportedSurface& e) {
    throw ConfigError(prefix + e.what());
  } catch (const UnsupportedDimension& e) {
    throw ConfigError(prefix + e.what());
  } catch (const SignError& e) {
    throw ConfigError(prefix + e.what());
  }
}

}  // namespace

Scene parse_scene(const std::string& text, const std::string& default_name) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("scene is not valid YAML: ") + e.what());
  }
  allow_keys(root, "scene", {"name", "profile", "fiber", "immersions", "verification", "output"});
  if (!root["profile"]) throw ConfigError("scene needs exactly one profile section");
  if (!root["fiber"]) throw ConfigError("scene needs a fiber section");
  Scene s;
  s.name = get<std::string>(root, "name", "scene", default_name);
  s.profile = parse_profile(root["profile"]);
  s.fiber = parse_fiber(root["fiber"]);
  if (const auto ims = root["immersions"]) {
    if (!ims.IsSequence()) throw ConfigError("immersions must be a list");
    for (std::size_t i = 0; i < ims.size(); ++i) s.immersions.push_back(parse_immersion(ims[i], i));
  }
  if (root["verification"]) s.verification = parse_verification(root["verification"]);
  if (root["output"]) s.output = parse_output(root["output"]);
  std::set<std::string> names;
  for (const auto& im : expand_scenarios(s))
    if (!names.insert(im.name).second) throw ConfigError("duplicate scenario name '" + im.name + "'");
  if (names.empty()) throw ConfigError("scene defines no immersions");
  return s;
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scene file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scene(buf.str(), path.stem().string());
}

int fiber_level(const FiberDescriptor& d) {
  if (d.backend == Backend::TriMesh) return d.surface == SurfaceKind::Sphere ? d.level : d.n;
  return d.rows;
}

FiberDescriptor fiber_at_level(const FiberDescriptor& desc, int level) {
  FiberDescriptor d = desc;
  if (d.backend == Backend::TriMesh) {
    (d.surface == SurfaceKind::Sphere ? d.level : d.n) = level;
  } else if (d.surface == SurfaceKind::Sphere) {
    d.rows = level;
    d.cols = static_cast<int>(std::lround(double(desc.cols) * (level - 1) / (desc.rows - 1)));
  } else {
    d.rows = level;
    d.cols = static_cast<int>(std::lround(double(desc.cols) * level / desc.rows));
  }
  return d;
}

std::vector<ImmersionSpec> expand_scenarios(const Scene& scene) {
  auto out = scene.immersions;
  const auto& r = scene.verification.random;
  std::mt19937_64 rng(scene.verification.seed);
  for (int k = 0; k < r.count; ++k) {
    ImmersionSpec s;
    char name[32];
    std::snprintf(name, sizeof name, "random_%03d", k);
    s.name = name;
    s.provenance = r.family == LeafFamily::Xi ? Provenance::LeafXi : Provenance::LeafEta;
    s.v = random_field_expression(rng, scene.fiber.surface, r.base, r.amplitude);
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  return out;
}

Immersion build_immersion(const ImmersionSpec& spec, std::shared_ptr<const Profile> prof,
                          std::shared_ptr<const FiberDiscretization> fd) {
  auto sample = [&](const std::string& text) {
    try {
      return sample_field(*fd, Expression::parse(text, fd->variables()));
    } catch (const DomainError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError("expression '" + text + "': " + e.what());
    }
  };
  switch (spec.provenance) {
    case Provenance::LeafXi:
      return Immersion::from_leaf_section(prof, LeafFamily::Xi, spec.c, sample(spec.v), fd);
    case Provenance::LeafEta:
      return Immersion::from_leaf_section(prof, LeafFamily::Eta, spec.c, sample(spec.v), fd);
    case Provenance::Slice:
      return Immersion::from_slice(prof, spec.t0, spec.r0, fd);
    case Provenance::Graph:
      break;
  }
  return Immersion::from_graph(prof, sample(spec.u), sample(spec.v), fd);
}

SceneResult run_scene(const Scene& scene) {
  SceneResult result;
  result.scene = scene;
  std::shared_ptr<const Profile> prof;
  std::shared_ptr<const FiberDiscretization> fd;
  try {
    prof = std::make_shared<const Profile>(scene.profile);
    fd = std::make_shared<const FiberDiscretization>(build_fiber(scene.fiber));
  } catch (const ConfigError&) {
    throw;
  } catch (const DomainError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const auto& ver = scene.verification;
  for (const auto& spec : expand_scenarios(scene)) {
    ScenarioResult sr;
    sr.name = spec.name;
    sr.spec = spec;
    try {
      const Immersion im = build_immersion(spec, prof, fd);
      sr.points = im.size();
      sr.extrinsic = extrinsic_report(im);
      for (const auto& req : ver.checks) {
        CheckParams p;
        p.tolerance = req.tolerance;
        p.curvature_c = ver.curvature_c;
        p.factoring_tolerance = ver.factoring_tolerance;
        if (ver.levels.empty()) {
          sr.checks.push_back(run_check(req.name, im, p));
        } else {
          auto table = convergence_study(
              req.name,
              [&](int level) {
                auto f = std::make_shared<const FiberDiscretization>(
                    build_fiber(fiber_at_level(scene.fiber, level)));
                return build_immersion(spec, prof, f);
              },
              ver.levels, p);
          sr.checks.push_back(table.rows.back().result);
          sr.convergence.push_back(std::move(table));
        }
        sr.pass = sr.pass && sr.checks.back().pass;
      }
    } catch (const Error&) {
      rethrow_for(spec.name);
    }
    result.pass = result.pass && sr.pass;
    result.scenarios.push_back(std::move(sr));
  }
  return result;
}

}  // namespace leafgeom
