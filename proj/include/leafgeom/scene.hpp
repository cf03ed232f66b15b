#pragma once

#include "leafgeom/base2d.hpp"
#include "leafgeom/extrinsic.hpp"
#include "leafgeom/fiber.hpp"
#include "leafgeom/immersion.hpp"
#include "leafgeom/verify.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace leafgeom {

struct ImmersionSpec {
  std::string name;
  Provenance provenance = Provenance::LeafXi;
  double c = 0.0;     // leaf constant
  double t0 = 0.0;    // slice
  double r0 = 0.0;    // slice
  std::string u;      // graph
  std::string v;      // leaves and graphs
};

struct CheckRequest {
  std::string name;
  double tolerance = 0.0;  // <= 0: catalog default
};

// Seeded leaf scenarios with v = base + low-order harmonics.
struct RandomSuite {
  int count = 0;
  LeafFamily family = LeafFamily::Xi;
  double base = 5.0;
  double amplitude = 0.0;  // at most 10% of min v
};

struct VerificationSpec {
  std::vector<CheckRequest> checks;
  std::vector<int> levels;  // fiber resolutions for convergence studies
  std::uint64_t seed = 0;
  double factoring_tolerance = 0.0;
  std::optional<double> curvature_c;
  RandomSuite random;
};

struct OutputSpec {
  std::filesystem::path directory = "leafgeom_out";
  bool json = true;
  bool csv = true;
  bool plot = false;  // radial profile columns
};

struct Scene {
  std::string name;
  ProfileSpec profile;
  FiberDescriptor fiber;
  std::vector<ImmersionSpec> immersions;
  VerificationSpec verification;
  OutputSpec output;
};

// Throws ConfigError on malformed input.
Scene parse_scene(const std::string& text, const std::string& default_name = "scene");
Scene load_scene(const std::filesystem::path& path);

// The descriptor with its resolution replaced by `level`: icosphere level,
// torus mesh size, or grid rows (columns follow the grid's aspect).
FiberDescriptor fiber_at_level(const FiberDescriptor& desc, int level);
int fiber_level(const FiberDescriptor& desc);

// Explicit immersions followed by the seeded random suite, sorted by name.
std::vector<ImmersionSpec> expand_scenarios(const Scene& scene);

Immersion build_immersion(const ImmersionSpec& spec, std::shared_ptr<const Profile> prof,
                          std::shared_ptr<const FiberDiscretization> fd);

struct ScenarioResult {
  std::string name;
  ImmersionSpec spec;
  std::size_t points = 0;
  ExtrinsicReport extrinsic;
  std::vector<CheckResult> checks;
  std::vector<ConvergenceTable> convergence;
  bool pass = true;
};

struct SceneResult {
  Scene scene;
  std::vector<ScenarioResult> scenarios;
  bool pass = true;
};

// DomainError and NotSpacelike are rethrown with the scenario name prefixed.
// A check that does not apply to a scenario (wrong provenance, backend or
// sign hypothesis) is reported as ConfigError.
SceneResult run_scene(const Scene& scene);

// Writes <dir>/<scenario>.json, summary.csv, convergence.csv and, when
// requested, radial_profile.csv. Only the JSON header carries the timestamp.
void write_reports(const SceneResult& result, const std::filesystem::path& dir,
                   const std::string& timestamp);

// Indexed-triangle OFF text of the scenario's fiber, vertices embedded in R³
// (unit sphere, or the standard torus for torus fibers). Grid fibers are
// triangulated cell by cell.
std::string export_off(const Scene& scene, const std::string& scenario);

}  // namespace leafgeom
