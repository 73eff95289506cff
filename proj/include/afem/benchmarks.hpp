#pragma once

#include <afem/assembly.hpp>
#include <afem/mesh.hpp>
#include <afem/problem.hpp>

#include <functional>
#include <string>

namespace afem {

using GradientFunction = std::function<std::array<Vec3, kMaxComponents>(const Vec3&)>;

struct ExactSolution {
  VectorFunction value;
  GradientFunction gradient;
};

struct Benchmark {
  ProblemDefinition problem;
  ExactSolution exact;
  /// Generator name of the reference domain (unit_square, unit_cube, l_shape).
  std::string domain;
};

/// -div grad u = f with Dirichlet data g on Dirichlet faces and flux data
/// du/dn = h on Neumann faces.
ProblemDefinition poisson(std::function<double(const Vec3&)> f, std::function<double(const Vec3&)> g,
                          std::function<double(const Vec3&)> h = nullptr);

/// square_sine, cube_sine or corner_singularity (L-shape, r^(2/3) sin(2 theta/3)).
Benchmark benchmark_poisson(const std::string& variant);

/// Bratu problem -lap u - lambda e^u = source, u = 0 on the Dirichlet boundary.
ProblemDefinition bratu(double lambda, std::function<double(const Vec3&)> source = nullptr);

struct ErrorNorms {
  double l2 = 0.0;
  double h1 = 0.0;  // H1 seminorm
};

/// Degree-5 quadrature of ||u - exact||_L2 and |u - exact|_H1 over all components.
ErrorNorms measure_error(const Mesh& mesh, const SolutionField& u, const ExactSolution& exact,
                         int quad_degree = 5);

}  // namespace afem
