#include "leafgeom/errors.hpp"
#include "leafgeom/scene.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>

namespace {

constexpr int kPass = 0;
constexpr int kCheckFailed = 1;
constexpr int kConfig = 2;

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

int run(const std::string& path, bool quiet) {
  const auto scene = leafgeom::load_scene(path);
  const auto result = leafgeom::run_scene(scene);
  std::filesystem::path dir = scene.output.directory;
  if (const char* env = std::getenv("LEAFGEOM_OUTPUT_DIR")) dir = env;
  dir /= scene.name;
  leafgeom::write_reports(result, dir, utc_timestamp());
  if (!quiet) {
    for (const auto& s : result.scenarios) {
      std::printf("%s  [%s, %s]\n", s.name.c_str(), leafgeom::to_string(s.spec.provenance).c_str(),
                  leafgeom::to_string(s.extrinsic.causal.verdict).c_str());
      for (const auto& c : s.checks) {
        std::printf("  %-26s %s  residual %.3e  tol %.1e", c.name.c_str(), c.pass ? "PASS" : "FAIL",
                    c.residual, c.tolerance);
        if (!c.refinement_orders.empty()) {
          std::printf("  orders");
          for (double o : c.refinement_orders) {
            if (std::isfinite(o)) std::printf(" %.2f", o);
            else std::printf(" -");
          }
        }
        std::printf("\n");
      }
    }
    std::printf("reports written to %s\n", dir.string().c_str());
  }
  return result.pass ? kPass : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extrinsic geometry of spacelike submanifolds in lightlike leaves of warped spacetimes"};
  app.require_subcommand(1);

  std::string scene_path;
  bool quiet = false;
  auto* run_cmd = app.add_subcommand("run", "Run every scenario and check of a scene file");
  run_cmd->add_option("scene", scene_path, "scene file")->required();
  run_cmd->add_flag("-q,--quiet", quiet, "suppress the console summary");

  auto* list_cmd = app.add_subcommand("list-checks", "List the available checks");

  std::string check_name;
  auto* describe_cmd = app.add_subcommand("describe-check", "Describe one check");
  describe_cmd->add_option("name", check_name, "check name")->required();

  std::string scenario;
  std::string off_path;
  auto* export_cmd = app.add_subcommand("export-mesh", "Write a scenario's fiber mesh as OFF");
  export_cmd->add_option("scene", scene_path, "scene file")->required();
  export_cmd->add_option("scenario", scenario, "scenario name")->required();
  export_cmd->add_option("-o,--output", off_path, "output file (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return run(scene_path, quiet);
    if (*list_cmd) {
      for (const auto& c : leafgeom::check_catalog())
        std::printf("%-26s %-18s %s\n", c.name.c_str(), leafgeom::to_string(c.kind).c_str(),
                    c.summary.c_str());
      return kPass;
    }
    if (*describe_cmd) {
      const auto& c = leafgeom::describe_check(check_name);
      std::printf("%s (%s)\n  %s\n  statement: %s\n  default tolerance: %g\n", c.name.c_str(),
                  leafgeom::to_string(c.kind).c_str(), c.summary.c_str(), c.statement.c_str(),
                  c.default_tolerance);
      if (c.conclusion_only) std::printf("  conclusion-only: the hypothesis-to-conclusion step is not checked\n");
      return kPass;
    }
    if (*export_cmd) {
      const auto text = leafgeom::export_off(leafgeom::load_scene(scene_path), scenario);
      if (off_path.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(off_path);
        if (!out) throw leafgeom::ConfigError("cannot write " + off_path);
        out << text;
      }
      return kPass;
    }
  } catch (const leafgeom::UnknownCheck& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfig;
  } catch (const leafgeom::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfig;
  }
  return kPass;
}
