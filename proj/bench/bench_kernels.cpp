// Serial reference path against the OpenMP kernels.
#include <afem/assembly.hpp>
#include <afem/benchmarks.hpp>
#include <afem/kernels.hpp>
#include <afem/mesh_generators.hpp>

#include <benchmark/benchmark.h>

#include <map>

namespace {

using afem::Execution;

Execution exec_of(const benchmark::State& st) { return st.range(1) ? Execution::parallel : Execution::serial; }

const afem::Mesh& square_mesh(int n) {
  static std::map<int, afem::Mesh> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, afem::unit_square(n)).first;
  return it->second;
}

void BM_AssembleJacobian(benchmark::State& st) {
  const afem::Mesh& mesh = square_mesh(static_cast<int>(st.range(0)));
  const auto b = afem::benchmark_poisson("square_sine");
  const afem::SolutionField u = afem::initial_field(mesh, b.problem);
  afem::AssemblyOptions opt;
  opt.exec = exec_of(st);
  for (auto _ : st) benchmark::DoNotOptimize(afem::assemble_system(mesh, b.problem, u, opt));
  st.SetItemsProcessed(st.iterations() * mesh.num_simplices());
}

void BM_Spmv(benchmark::State& st) {
  const afem::Mesh& mesh = square_mesh(static_cast<int>(st.range(0)));
  const auto b = afem::benchmark_poisson("square_sine");
  const afem::SolutionField u = afem::initial_field(mesh, b.problem);
  const afem::SparseMatrix A = afem::assemble_jacobian(mesh, b.problem, u);
  std::vector<double> x(A.cols, 1.0), y(A.rows);
  for (auto _ : st) {
    afem::spmv(A, x, y, exec_of(st));
    benchmark::DoNotOptimize(y.data());
  }
  st.SetItemsProcessed(st.iterations() * A.nnz());
}

void BM_Dot(benchmark::State& st) {
  const std::vector<double> a(static_cast<std::size_t>(st.range(0)) * 1000, 0.5);
  for (auto _ : st) benchmark::DoNotOptimize(afem::dot(a, a, exec_of(st)));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(a.size()));
}

}  // namespace

BENCHMARK(BM_AssembleJacobian)->ArgsProduct({{64, 256}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Spmv)->ArgsProduct({{256, 512}, {0, 1}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Dot)->ArgsProduct({{100, 4000}, {0, 1}})->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
