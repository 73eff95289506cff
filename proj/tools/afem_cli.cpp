#include <afem/config.hpp>
#include <afem/driver.hpp>
#include <afem/kernels.hpp>
#include <afem/mesh_io.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <iomanip>
#include <iostream>

namespace {

constexpr int kConfigExit = 2;
constexpr int kSolverExit = 3;

afem::Mesh load_mesh(const std::string& mesh_path, const std::string& config_path) {
  if (!mesh_path.empty()) return afem::read_mesh_file(mesh_path);
  if (config_path.empty()) throw afem::ConfigError("a mesh file or --config is required");
  const afem::RunConfig cfg = afem::load_run_config(config_path);
  return afem::build_configured_mesh(cfg.mesh, cfg.base_dir);
}

void print_mesh_info(const afem::Mesh& mesh) {
  double qmin = 1e300, qmax = 0, vol = 0;
  for (int s : mesh.live_simplices()) {
    const double q = afem::shape_measure(mesh, s);
    qmin = std::min(qmin, q);
    qmax = std::max(qmax, q);
    vol += mesh.volume(s);
  }
  int dir = 0, neu = 0;
  for (const auto& f : afem::boundary_faces(mesh)) (f.bclass == afem::BoundaryClass::dirichlet ? dir : neu)++;
  std::cout << std::setprecision(10);
  std::cout << "dim " << mesh.dim() << "\nvertices " << mesh.num_vertices() << "\nsimplices " << mesh.num_simplices()
            << "\nboundary_faces_dirichlet " << dir << "\nboundary_faces_neumann " << neu << "\nvolume " << vol
            << "\nshape_min " << qmin << "\nshape_max " << qmax << "\nconforming "
            << (mesh.is_conforming() ? "yes" : "no") << '\n';
}

void print_report(const afem::RunReport& r) {
  std::cout << std::setprecision(6);
  for (const auto& l : r.levels)
    std::cout << "level " << l.level << ": vertices " << l.vertices << ", indicator " << l.total_indicator
              << ", newton " << l.newton_iterations << (l.newton_converged ? "" : " (not converged)") << '\n';
  if (r.ppum) {
    for (const auto& s : r.subdomains)
      std::cout << "subdomain " << s.part << ": vertices " << s.vertices << ", levels " << s.levels << '\n';
    std::cout << "blend: vertices " << r.blend_vertices << ", h1 error " << r.blend_h1_error << ", overlap M "
              << r.max_overlap << '\n';
  }
  if (r.clamp_events > 0) std::cout << "warning: " << r.clamp_events << " clamped evaluations on accepted states\n";
  std::cout << "status: " << r.status << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive multilevel finite element solver"};
  app.require_subcommand(1);
  int threads = 0;
  int seed = 0;
  app.add_option("--threads", threads, "OpenMP thread cap (0 = runtime default)")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", seed, "Reserved; affects nothing numerical");

  std::string config, outdir;
  auto* solve = app.add_subcommand("solve", "Adaptive solve-estimate-refine run");
  solve->add_option("--config", config, "Run configuration")->required();
  solve->add_option("--out", outdir, "Output directory (overrides output.dir)");

  auto* ppum = app.add_subcommand("ppum", "Parallel partition of unity run");
  ppum->add_option("--config", config, "Run configuration")->required();
  ppum->add_option("--out", outdir, "Output directory (overrides output.dir)");

  std::string mesh_path;
  auto* info = app.add_subcommand("mesh-info", "Print mesh statistics");
  info->add_option("mesh", mesh_path, "Mesh file");
  info->add_option("--config", config, "Build the configured mesh instead");

  int rounds = 1;
  bool uniform = false;
  std::string out_mesh;
  auto* refine = app.add_subcommand("mesh-refine", "Bisect every simplex and write the result");
  refine->add_option("mesh", mesh_path, "Mesh file");
  refine->add_option("--config", config, "Build the configured mesh instead");
  refine->add_option("--rounds", rounds, "Bisection rounds")->check(CLI::NonNegativeNumber);
  refine->add_flag("--uniform", uniform, "Each round halves the mesh size (dim bisection rounds)");
  refine->add_option("--out", out_mesh, "Output mesh file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kConfigExit;
  }
  if (threads > 0) afem::set_threads(threads);

  try {
    if (*solve || *ppum) {
      afem::RunConfig cfg = afem::load_run_config(config);
      if (!outdir.empty()) cfg.output_dir = outdir;
      // ppum.enabled routes a solve through the partitioned pipeline.
      const afem::RunReport r = *ppum || cfg.ppum.enabled ? afem::run_ppum(cfg) : afem::run_adaptive(cfg);
      print_report(r);
      return r.ok ? 0 : kSolverExit;
    }
    afem::Mesh mesh = load_mesh(mesh_path, config);
    if (*info) {
      print_mesh_info(mesh);
      return 0;
    }
    for (int k = 0; k < rounds; ++k) {
      if (uniform) {
        afem::refine_uniform(mesh);
      } else {
        const auto live = mesh.live_simplices();
        mesh.refine_marked(live);
      }
    }
    afem::write_mesh(out_mesh, mesh);
    print_mesh_info(mesh);
    return 0;
  } catch (const afem::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const afem::MeshError& e) {
    std::cerr << "mesh error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolverExit;
  }
}
