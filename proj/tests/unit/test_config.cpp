#include <afem/config.hpp>
#include <afem/driver.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace afem;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream is(text);
  return parse_run_config(ConfigFile::parse(is));
}

// Message of the ConfigError raised by parsing `text`, or "" if none.
std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(ConfigFile, ParsesTypedValuesAndComments) {
  std::istringstream is(R"(# leading comment
top = 3
[mesh]
source = "l_shape"   # trailing comment
n = 6
[adapt]
theta = 2.5e-1
uniform = true
label = "a # not a comment"
)");
  const auto f = ConfigFile::parse(is);
  EXPECT_EQ(f.get_int("top", 0), 3);
  EXPECT_EQ(f.get_string("mesh.source", ""), "l_shape");
  EXPECT_EQ(f.get_int("mesh.n", 0), 6);
  EXPECT_DOUBLE_EQ(f.get_double("adapt.theta", 0), 0.25);
  EXPECT_TRUE(f.get_bool("adapt.uniform", false));
  EXPECT_EQ(f.get_string("adapt.label", ""), "a # not a comment");
  EXPECT_EQ(f.get_int("missing.key", 17), 17);
  EXPECT_EQ(f.section_keys("mesh"), (std::vector<std::string>{"source", "n"}));
}

TEST(ConfigFile, SyntaxErrorsCarryLineNumbers) {
  for (const char* bad : {"[mesh\nn = 2\n", "[mesh]\nn 2\n", "[mesh]\nsource = \"open\n", "[mesh]\nn =\n"}) {
    std::istringstream is(bad);
    try {
      ConfigFile::parse(is, "t.toml");
      ADD_FAILURE() << "accepted: " << bad;
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find("t.toml:"), std::string::npos) << e.what();
    }
  }
}

TEST(ConfigFile, DuplicateKeyRejected) {
  std::istringstream is("[mesh]\nn = 2\nn = 3\n");
  EXPECT_THROW(ConfigFile::parse(is), ConfigError);
}

TEST(ConfigFile, TypeMismatchNamesKey) {
  std::istringstream is("[mesh]\nn = \"four\"\n");
  const auto f = ConfigFile::parse(is);
  try {
    f.get_int("mesh.n", 0);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("mesh.n"), std::string::npos);
  }
}

TEST(RunConfig, DefaultsAreValid) {
  const RunConfig c = parse("");
  EXPECT_EQ(c.problem, "poisson");
  EXPECT_EQ(c.adaptive.strategy, MarkStrategy::hybrid);
  EXPECT_NO_THROW(validate(c));
}

TEST(RunConfig, ReadsEverySection) {
  const RunConfig c = parse(R"cfg(
[problem]
kind = "hamiltonian"
data = "two_holes"
[coefficients]
rho = "gaussian(0.1, 0.2, 0, 0)"
[mesh]
source = "annulus"
n_r = 3
n_theta = 20
[adapt]
max_vertices = 5000
strategy = "maximum"
theta = 0.7
[newton]
forcing = "fixed"
fixed_eta = 0.01
[linear]
pre_sweeps = 2
[ppum]
enabled = true
parts = 3
[output]
dir = "x"
vtk = false
)cfg");
  EXPECT_EQ(c.problem, "hamiltonian");
  EXPECT_EQ(c.constraint_data, "two_holes");
  ASSERT_EQ(c.coefficients.size(), 1u);
  EXPECT_EQ(c.coefficients[0].first, "rho");
  EXPECT_EQ(c.mesh.n_theta, 20);
  EXPECT_EQ(c.adaptive.max_vertices, 5000);
  EXPECT_EQ(c.adaptive.strategy, MarkStrategy::maximum);
  EXPECT_EQ(c.adaptive.newton.forcing, ForcingRule::fixed);
  EXPECT_EQ(c.adaptive.newton.multilevel.pre_sweeps, 2);
  EXPECT_TRUE(c.ppum.enabled);
  EXPECT_EQ(c.ppum.parts, 3);
  EXPECT_FALSE(c.write_vtk);
}

TEST(RunConfig, UnknownKeyRejectedByName) {
  EXPECT_NE(error_of("[adapt]\nmax_vertex = 10\n").find("adapt.max_vertex"), std::string::npos);
  EXPECT_NE(error_of("[nonsense]\nx = 1\n").find("nonsense.x"), std::string::npos);
}

TEST(RunConfig, OutOfRangeFieldsNamed) {
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"[problem]\nkind = \"heat\"\n", "problem.kind"},
      {"[problem]\nbenchmark = \"nope\"\n", "problem.benchmark"},
      {"[mesh]\nn = 0\n", "mesh.n"},
      {"[mesh]\nsource = \"torus\"\n", "mesh.source"},
      {"[mesh]\nsource = \"annulus\"\nr_in = 2\nr_out = 1\n", "mesh.r_out"},
      {"[adapt]\ntheta = 1.5\n", "adapt.theta"},
      {"[adapt]\ntheta = 0\n", "adapt.theta"},
      {"[adapt]\nmax_vertices = -1\n", "adapt.max_vertices"},
      {"[adapt]\nstrategy = \"greedy\"\n", "adapt.strategy"},
      {"[adapt]\np = 0.5\n", "adapt.p"},
      {"[newton]\nabs_tol = 0\n", "newton.abs_tol"},
      {"[newton]\nmax_iters = 0\n", "newton.max_iters"},
      {"[newton]\nfixed_eta = 1\n", "newton.fixed_eta"},
      {"[newton]\nforcing = \"exact\"\n", "newton.forcing"},
      {"[assembly]\nquad_degree = 9\n", "assembly.quad_degree"},
      {"[linear]\npre_sweeps = 0\npost_sweeps = 0\n", "linear.pre_sweeps"},
      {"[ppum]\nparts = 0\n", "ppum.parts"},
      {"[ppum]\noverlap_layers = 0\n", "ppum.overlap_layers"},
      {"[output]\ndir = \"\"\n", "output.dir"},
  };
  for (const auto& [text, field] : cases) {
    const std::string msg = error_of(text);
    EXPECT_NE(msg.find(field), std::string::npos) << "config:\n" << text << "message: " << msg;
  }
}

TEST(RunConfig, LoadResolvesRelativePaths) {
  const auto dir = std::filesystem::temp_directory_path() / "afem_cfg_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "c.toml");
    os << "[mesh]\nsource = \"unit_square\"\nn = 2\n";
  }
  const RunConfig c = load_run_config((dir / "c.toml").string());
  EXPECT_EQ(std::filesystem::path(c.base_dir), dir);
  EXPECT_THROW(load_run_config((dir / "absent.toml").string()), ConfigError);
}

TEST(RunConfig, ShippedConfigsValidate) {
  const char* src = AFEM_SOURCE_DIR;
  int n = 0;
  for (const auto& e : std::filesystem::directory_iterator(std::filesystem::path(src) / "configs")) {
    if (e.path().extension() != ".toml") continue;
    EXPECT_NO_THROW(load_run_config(e.path().string())) << e.path();
    ++n;
  }
  EXPECT_GT(n, 0);
}
