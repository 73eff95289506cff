#pragma once

#include <afem/adaptive.hpp>
#include <afem/mesh.hpp>

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace afem {

/// Flat `[section]` / `key = value` text. Values are numbers, true/false or
/// double-quoted strings; `#` starts a comment. Keys are stored as "section.key".
class ConfigFile {
 public:
  static ConfigFile parse(std::istream& is, const std::string& origin = "<config>");
  static ConfigFile load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Keys of one section without the prefix, in file order.
  std::vector<std::string> section_keys(const std::string& section) const;
  std::vector<std::string> keys() const;
  /// Keys never read by a getter.
  std::vector<std::string> unused() const;
  std::string base_dir = ".";

 private:
  struct Entry {
    std::string raw;
    bool quoted = false;
    int line = 0;
    int order = 0;
  };
  const Entry* find(const std::string& key) const;
  std::map<std::string, Entry> values_;
  mutable std::map<std::string, bool> used_;
  std::string origin_;
};

struct MeshSpec {
  /// generator name or "file"
  std::string source = "unit_square";
  std::string file;
  int n = 4;
  int n_r = 4, n_theta = 16;
  double r_in = 0.5, r_out = 2.0;
  double radius = 0.4;
  /// "dirichlet": every boundary face Dirichlet; "inner_neumann": faces on the
  /// inner hole boundary of annulus / sphere_in_box are Neumann (Robin).
  std::string boundary = "dirichlet";
};

struct RunConfig {
  /// poisson (benchmark), bratu, hamiltonian, momentum, coupled
  std::string problem = "poisson";
  std::string benchmark = "square_sine";
  double bratu_lambda = 1.0;
  /// Constraint data: "flat" or "two_holes" base, overridden by [coefficients].
  std::string constraint_data = "flat";
  /// Coefficient overrides (name -> expression).
  std::vector<std::pair<std::string, std::string>> coefficients;
  MeshSpec mesh;
  AdaptiveOptions adaptive;
  std::string psi = "1";
  struct {
    bool enabled = false;
    int parts = 4;
    int overlap_layers = 2;
    int local_budget = 2000;
  } ppum;
  std::string output_dir = "afem_out";
  bool write_vtk = true;
  std::string base_dir = ".";
};

/// Reads and validates; every out-of-range or unknown field raises ConfigError naming it.
RunConfig parse_run_config(const ConfigFile& file);
RunConfig load_run_config(const std::string& path);
void validate(const RunConfig& cfg);

/// Builds the configured mesh.
Mesh build_configured_mesh(const MeshSpec& spec, const std::string& base_dir = ".");

}  // namespace afem
