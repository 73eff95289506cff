#include <afem/driver.hpp>

#include <afem/constraints.hpp>
#include <afem/mesh_io.hpp>
#include <afem/vtk.hpp>

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace afem {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ScalarField coefficient(const RunConfig& cfg, const std::string& name, const std::string& expr) {
  try {
    return parse_scalar_field(expr, cfg.base_dir);
  } catch (const ConfigError& e) {
    throw ConfigError("coefficients." + name + ": " + e.what());
  }
}

std::function<double(const Vec3&)> optional_field(const RunConfig& cfg, const std::string& name) {
  for (const auto& [k, v] : cfg.coefficients)
    if (k == name) return coefficient(cfg, k, v).value;
  return nullptr;
}

void reject_unknown(const RunConfig& cfg, const std::vector<std::string>& allowed) {
  for (const auto& [k, v] : cfg.coefficients)
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      throw ConfigError("coefficients." + k + ": unknown coefficient for problem '" + cfg.problem + "'");
}

json level_json(const LevelRecord& r) {
  auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  return {{"level", r.level},
          {"vertices", r.vertices},
          {"simplices", r.simplices},
          {"total_indicator", r.total_indicator},
          {"l2_error", num(r.l2_error)},
          {"h1_error", num(r.h1_error)},
          {"dual_estimate", r.dual_estimate},
          {"newton_iterations", r.newton_iterations},
          {"newton_converged", r.newton_converged},
          {"newton_residual", r.newton_residual},
          {"linear_iterations", r.linear_iterations},
          {"clamp_events", r.clamp_events},
          {"marked", r.marked},
          {"seconds", r.seconds}};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write '" + path.string() + "'");
  os << std::setw(2) << j << '\n';
}

void write_csv_file(const fs::path& path, const std::vector<LevelRecord>& levels) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write '" + path.string() + "'");
  write_convergence_csv(os, levels);
}

AdaptiveOptions adaptive_options(const RunConfig& cfg, const ProblemSetup& setup) {
  AdaptiveOptions a = cfg.adaptive;
  a.exact = setup.exact;
  a.psi = setup.psi;
  return a;
}

}  // namespace

ProblemSetup build_problem(const RunConfig& cfg, const Mesh& mesh) {
  ProblemSetup s;
  const int d = mesh.dim();
  if (cfg.problem == "poisson") {
    if (cfg.benchmark != "none") {
      reject_unknown(cfg, {});
      Benchmark b = benchmark_poisson(cfg.benchmark);
      s.problem = std::move(b.problem);
      s.exact = std::move(b.exact);
    } else {
      reject_unknown(cfg, {"f", "g", "h"});
      s.problem = poisson(optional_field(cfg, "f"), optional_field(cfg, "g"), optional_field(cfg, "h"));
    }
  } else if (cfg.problem == "bratu") {
    reject_unknown(cfg, {"f"});
    s.problem = bratu(cfg.bratu_lambda, optional_field(cfg, "f"));
  } else {
    reject_unknown(cfg, constraint_coefficient_names());
    auto set = cfg.constraint_data == "two_holes" ? two_holes_coefficients(d) : flat_trivial_coefficients();
    for (const auto& [k, v] : cfg.coefficients) set->set(k, coefficient(cfg, k, v));
    validate_constraint_data(mesh, *set);
    if (cfg.problem == "hamiltonian") s.problem = hamiltonian_forms(d, set);
    else if (cfg.problem == "momentum") s.problem = momentum_forms(d, set);
    else s.problem = coupled_forms(d, set);
  }
  ScalarField psi;
  try {
    psi = parse_scalar_field(cfg.psi, cfg.base_dir);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("adapt.psi: ") + e.what());
  }
  s.psi = [f = psi.value](const Vec3& x) { return Components{f(x), 0, 0, 0}; };
  return s;
}

void write_convergence_csv(std::ostream& os, const std::vector<LevelRecord>& levels) {
  os << kConvergenceCsvHeader << '\n';
  os << "level,vertices,simplices,total_indicator,l2_error,h1_error,dual_estimate,newton_iterations,"
        "linear_iterations,newton_residual,clamp_events,marked\n";
  os << std::setprecision(12);
  for (const auto& r : levels)
    os << r.level << ',' << r.vertices << ',' << r.simplices << ',' << r.total_indicator << ',' << r.l2_error << ','
       << r.h1_error << ',' << r.dual_estimate << ',' << r.newton_iterations << ',' << r.linear_iterations << ','
       << r.newton_residual << ',' << r.clamp_events << ',' << r.marked << '\n';
}

RunReport run_adaptive(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path out(cfg.output_dir);
  fs::create_directories(out);
  Mesh mesh = build_configured_mesh(cfg.mesh, cfg.base_dir);
  mesh.reset_roots();
  const ProblemSetup setup = build_problem(cfg, mesh);
  AdaptiveOptions a = adaptive_options(cfg, setup);
  if (cfg.write_vtk)
    a.on_level = [&](const LevelRecord& r, const Mesh& m, const SolutionField& u, const IndicatorField& eta) {
      std::ostringstream name;
      name << "level_" << std::setw(2) << std::setfill('0') << r.level << ".vtk";
      write_vtk((out / name.str()).string(), m, {{"u", &u}}, &eta);
    };
  const AdaptiveResult res = run_adaptive_loop(std::move(mesh), setup.problem, a);

  RunReport rep;
  rep.levels = res.levels;
  for (const auto& l : res.levels) rep.clamp_events += l.clamp_events;
  rep.status = res.status;
  rep.ok = res.ok;
  write_csv_file(out / "convergence.csv", rep.levels);
  write_mesh((out / "final.afem").string(), res.mesh);
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json j;
  j["problem"] = setup.problem.name;
  j["status"] = rep.status;
  j["ok"] = rep.ok;
  j["clamp_events"] = rep.clamp_events;
  j["seconds"] = rep.seconds;
  j["levels"] = json::array();
  for (const auto& l : rep.levels) j["levels"].push_back(level_json(l));
  write_json(out / "report.json", j);
  return rep;
}

RunReport run_ppum(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path out(cfg.output_dir);
  fs::create_directories(out);
  Mesh coarse = build_configured_mesh(cfg.mesh, cfg.base_dir);
  if (cfg.ppum.local_budget < coarse.num_vertices())
    throw ConfigError("ppum.local_budget: must be at least the coarse vertex count (" +
                      std::to_string(coarse.num_vertices()) + ")");
  const ProblemSetup setup = build_problem(cfg, coarse);
  PpumOptions opt;
  opt.parts = cfg.ppum.parts;
  opt.overlap_layers = cfg.ppum.overlap_layers;
  opt.local_budget = cfg.ppum.local_budget;
  opt.adaptive = adaptive_options(cfg, setup);
  const PpumResult res = run_ppum_pipeline(std::move(coarse), setup.problem, opt);

  RunReport rep;
  rep.ppum = true;
  rep.parts = opt.parts;
  rep.overlap_layers = opt.overlap_layers;
  rep.local_budget = opt.local_budget;
  rep.max_overlap = res.decomposition.max_overlap;
  rep.ok = res.ok;
  rep.status = res.status;
  for (int i = 0; i < opt.parts; ++i) {
    const AdaptiveResult& l = res.locals[i];
    SubdomainSummary s;
    s.part = i;
    s.owned = static_cast<int>(std::count(res.decomposition.owner.begin(), res.decomposition.owner.end(), i));
    s.overlap = static_cast<int>(res.decomposition.overlap[i].size());
    s.vertices = l.mesh.num_vertices();
    s.levels = static_cast<int>(l.levels.size());
    if (!l.levels.empty()) {
      s.h1_error = l.levels.back().h1_error;
      s.l2_error = l.levels.back().l2_error;
    }
    s.status = l.status;
    s.seconds = res.local_seconds[i];
    for (const auto& lv : l.levels) rep.clamp_events += lv.clamp_events;
    rep.subdomains.push_back(s);

    const fs::path sub = out / ("sub" + std::to_string(i));
    fs::create_directories(sub);
    write_csv_file(sub / "convergence.csv", l.levels);
    if (l.mesh.num_vertices() > 0) {
      write_mesh((sub / "mesh.afem").string(), l.mesh);
      if (cfg.write_vtk) write_vtk((sub / "solution.vtk").string(), l.mesh, {{"u", &l.u}}, &l.indicator);
    }
  }
  if (res.ok) {
    rep.blend_vertices = res.mesh.num_vertices();
    rep.max_support = res.pou.max_support;
    for (int v = 0; v < res.mesh.num_vertices(); ++v) {
      double sum = 0.0;
      for (int i = 0; i < res.pou.parts; ++i) sum += res.pou.weights[i][v];
      rep.partition_sum_deviation = std::max(rep.partition_sum_deviation, std::abs(sum - 1.0));
    }
    if (setup.exact) {
      const ErrorNorms e = measure_error(res.mesh, res.u, *setup.exact);
      rep.blend_l2_error = e.l2;
      rep.blend_h1_error = e.h1;
    } else {
      rep.blend_l2_error = rep.blend_h1_error = std::nan("");
    }
    write_mesh((out / "blend.afem").string(), res.mesh);
    if (cfg.write_vtk) {
      std::vector<SolutionField> w;
      for (int i = 0; i < res.pou.parts; ++i) {
        SolutionField f(res.mesh.num_vertices(), 1);
        f.values = res.pou.weights[i];
        w.push_back(std::move(f));
      }
      std::vector<NamedField> fields{{"u", &res.u}};
      for (int i = 0; i < res.pou.parts; ++i) fields.push_back({"pou_" + std::to_string(i), &w[i]});
      write_vtk((out / "blend.vtk").string(), res.mesh, fields);
    }
  }

  {
    std::ofstream os(out / "ppum.csv");
    os << "# afem-ppum v1\n";
    os << "subdomain,owned_simplices,overlap_simplices,vertices,levels,l2_error,h1_error\n";
    os << std::setprecision(12);
    for (const auto& s : rep.subdomains)
      os << s.part << ',' << s.owned << ',' << s.overlap << ',' << s.vertices << ',' << s.levels << ',' << s.l2_error
         << ',' << s.h1_error << '\n';
    if (res.ok)
      os << "blend,,," << rep.blend_vertices << ",," << rep.blend_l2_error << ',' << rep.blend_h1_error << '\n';
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  json j;
  j["problem"] = setup.problem.name;
  j["status"] = rep.status;
  j["ok"] = rep.ok;
  j["parts"] = rep.parts;
  j["overlap_layers"] = rep.overlap_layers;
  j["max_overlap"] = rep.max_overlap;
  j["max_support"] = rep.max_support;
  j["local_budget"] = rep.local_budget;
  j["coarse_vertices"] = res.coarse.num_vertices();
  j["blend_vertices"] = rep.blend_vertices;
  j["blend_l2_error"] = num(rep.blend_l2_error);
  j["blend_h1_error"] = num(rep.blend_h1_error);
  j["partition_sum_deviation"] = rep.partition_sum_deviation;
  j["clamp_events"] = rep.clamp_events;
  j["seconds"] = rep.seconds;
  j["subdomains"] = json::array();
  for (const auto& s : rep.subdomains)
    j["subdomains"].push_back({{"part", s.part},
                               {"owned_simplices", s.owned},
                               {"overlap_simplices", s.overlap},
                               {"vertices", s.vertices},
                               {"levels", s.levels},
                               {"l2_error", num(s.l2_error)},
                               {"h1_error", num(s.h1_error)},
                               {"status", s.status},
                               {"seconds", s.seconds}});
  write_json(out / "report.json", j);
  return rep;
}

}  // namespace afem
