#include "../support.hpp"
#include "vps/cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace vps;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("vps_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run(const cli::RunManifest& m) {
    out_.str("");
    log_.str("");
    return cli::run(m, out_, log_);
  }

  cli::RunManifest manifest(cli::Command c) const {
    cli::RunManifest m;
    m.command = c;
    return m;
  }

  fs::path dir_;
  std::ostringstream out_, log_;
};

DensityTable read_table(const std::string& p) {
  auto in = open_input(p);
  return read_density_csv(in);
}

cli::Report read_meta(const std::string& p) {
  auto in = open_input(p);
  return cli::read_report_text(in);
}

}  // namespace

TEST_F(CliTest, DensityOfConstantProfileIsFlat) {
  auto m = manifest(cli::Command::density);
  m.profile = "constant:1,64";
  m.grid = "0.01:0.99:50";
  m.out = path("d.csv");
  ASSERT_EQ(run(m), cli::exit_ok) << log_.str();
  const DensityTable t = read_table(m.out);
  ASSERT_EQ(t.size(), 50u);
  for (std::size_t k = 0; k < t.size(); ++k) {
    EXPECT_NEAR(t.f_exact[k], 1.0 / std::numbers::pi, 1e-6);
    EXPECT_NEAR(t.F[k], t.s[k] * t.s[k], 1e-8);
  }
  const auto meta = read_meta(cli::sidecar_path(m.out));
  EXPECT_EQ(parse_double(*cli::report_value(meta, "rho")), 1.0);
  EXPECT_EQ(*cli::report_value(meta, "circular"), "true");
  EXPECT_NEAR(parse_double(*cli::report_value(meta, "density_at_zero")), 1.0 / std::numbers::pi, 1e-12);
}

TEST_F(CliTest, FiniteDifferenceModeLeavesExactColumnEmpty) {
  auto m = manifest(cli::Command::density);
  m.profile = "constant:1,16";
  m.grid = "0.1:0.9:9";
  m.mode = "fd";
  m.out = path("d.csv");
  ASSERT_EQ(run(m), cli::exit_ok);
  const DensityTable t = read_table(m.out);
  for (std::size_t k = 0; k < t.size(); ++k) {
    EXPECT_TRUE(std::isnan(t.f_exact[k]));
    EXPECT_NEAR(t.f_fd[k], 1.0 / std::numbers::pi, 1e-6);
  }
}

TEST_F(CliTest, CheckReportsBlockAtomStructure) {
  auto m = manifest(cli::Command::check);
  m.profile = "block-atom:3,40";
  m.blocks = 3;
  ASSERT_EQ(run(m), cli::exit_ok);
  std::istringstream in(out_.str());
  const auto r = cli::read_report_text(in);
  EXPECT_EQ(*cli::report_value(r, "irreducible"), "true");
  EXPECT_EQ(*cli::report_value(r, "bfid"), "false");
  EXPECT_EQ(*cli::report_value(r, "circular"), "false");
}

TEST_F(CliTest, CheckReportsCircularCase) {
  auto m = manifest(cli::Command::check);
  m.profile = "constant:2,10";
  m.out = path("check.csv");
  ASSERT_EQ(run(m), cli::exit_ok);
  std::istringstream in(out_.str());
  const auto r = cli::read_report_text(in);
  EXPECT_EQ(*cli::report_value(r, "symmetric"), "true");
  EXPECT_EQ(*cli::report_value(r, "bfid"), "true");
  EXPECT_EQ(*cli::report_value(r, "circular"), "true");
  std::ifstream csv(m.out);
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "key,value");
}

TEST_F(CliTest, SolveCurveIsReingestible) {
  auto m = manifest(cli::Command::solve);
  m.profile = "model-b:20";
  m.grid = "0.05:0.5:10";
  m.out = path("curve.csv");
  ASSERT_EQ(run(m), cli::exit_ok) << log_.str();
  const MECurve direct = solve_curve(build_model_b(20), parse_grid("0.05:0.5:10").points(), SolverConfig{});
  auto in = open_input(m.out);
  const auto recs = read_curve_csv(in);
  ASSERT_EQ(recs.size(), 10u);
  for (std::size_t k = 0; k < recs.size(); ++k) {
    EXPECT_EQ(recs[k].s, direct.s_grid[k]);
    EXPECT_NEAR(recs[k].inner, direct.inner(k), 1e-15);
  }
}

TEST_F(CliTest, ProfileCsvInput) {
  const Matrix v = testkit::random_matrix(6, 0.5, 2.0, 4);
  write_profile_csv(path("p.csv"), VarianceProfile::from_matrix(v));
  auto m = manifest(cli::Command::density);
  m.profile = path("p.csv");
  m.out = path("d.csv");
  ASSERT_EQ(run(m), cli::exit_ok) << log_.str();
  const DensityTable t = read_table(m.out);
  const RadialMeasure direct = build_measure(VarianceProfile::from_matrix(v), std::nullopt);
  ASSERT_EQ(t.size(), direct.s_grid.size());
  for (std::size_t k = 0; k < t.size(); ++k) EXPECT_NEAR(t.F[k], direct.F[k], 1e-15);
}

TEST_F(CliTest, SeparableDiscreteAndSampled) {
  auto m = manifest(cli::Command::separable);
  {
    std::ofstream f(path("d.csv"));
    f << "1\n4\n";
  }
  m.d = path("d.csv");
  m.dtilde = "constant:1";
  m.grid = "0.1:1.5:4";
  m.out = path("sep.csv");
  ASSERT_EQ(run(m), cli::exit_ok) << log_.str();
  DensityTable t = read_table(m.out);
  EXPECT_NEAR(t.f_exact[0], separable_density(make_separable(Eigen::Vector2d(1, 4), Eigen::Vector2d(1, 1)), 0.1), 1e-12);

  m.d = "power:0.25";
  m.dtilde = "power:0.25";
  m.grid = "0.05:0.5:4";
  m.quad_points = 4001;
  ASSERT_EQ(run(m), cli::exit_ok) << log_.str();
  t = read_table(m.out);
  for (std::size_t k = 0; k < t.size(); ++k) {
    EXPECT_NEAR(t.F[k], 1.0 - sampled_separable_u(parse_function_spec("power:0.25"), parse_function_spec("power:0.25"),
                                                  t.s[k], 4001).u, 1e-12);
    EXPECT_TRUE(std::isnan(t.lower_bound_ratio[k]));
  }
}

TEST_F(CliTest, OracleMeasures) {
  auto m = manifest(cli::Command::oracle);
  m.oracle = "block-atom:3";
  m.grid = "0.1:0.7:7";
  m.out = path("o.csv");
  ASSERT_EQ(run(m), cli::exit_ok) << log_.str();
  DensityTable t = read_table(m.out);
  for (std::size_t k = 0; k < t.size(); ++k) EXPECT_EQ(t.F[k], reference::block_atom_F(3, t.s[k]));

  m.oracle = "sombrero:1,4,0.5";
  m.grid = "0.05:1.6:32";
  ASSERT_EQ(run(m), cli::exit_ok) << log_.str();
  t = read_table(m.out);
  EXPECT_NEAR(t.F.back(), 1.0, 1e-6);
  EXPECT_NEAR(t.f_exact[0], sombrero_density(1, 4, 0.5, 0.05), 1e-15);

  m.oracle = "hexagon:1";
  EXPECT_EQ(run(m), cli::exit_usage);
}

TEST_F(CliTest, SimulateAndCompareAgreeForModelA) {
  if (!has_spectrum_backend()) GTEST_SKIP() << "no eigenvalue backend";
  auto sim = manifest(cli::Command::simulate);
  sim.profile = "model-a:400";
  sim.law = "complex-gaussian";
  sim.seed = 11;
  sim.out = path("eigs.csv");
  ASSERT_EQ(run(sim), cli::exit_ok) << log_.str();
  EXPECT_NE(log_.str().find("backend="), std::string::npos);
  EXPECT_EQ(read_eigenvalue_csv(sim.out).eigenvalues.size(), 400u);

  auto den = manifest(cli::Command::density);
  den.profile = "model-a:400";
  den.grid = "0.004:0.336:84";
  den.out = path("dens.csv");
  den.config_overrides = {"fixed_point_tol=1e-10"};
  ASSERT_EQ(run(den), cli::exit_ok) << log_.str();

  auto cmp = manifest(cli::Command::compare);
  cmp.eigs = sim.out;
  cmp.density = den.out;
  cmp.out = path("cmp.csv");
  ASSERT_EQ(run(cmp), cli::exit_ok) << log_.str();
  std::istringstream in(out_.str());
  const auto r = cli::read_report_text(in);
  EXPECT_LE(parse_double(*cli::report_value(r, "kolmogorov_distance")), 0.05);
  EXPECT_EQ(*cli::report_value(r, "eigenvalues"), "400");
}

TEST_F(CliTest, ExitCodes) {
  auto m = manifest(cli::Command::density);
  m.profile = path("missing.csv");
  EXPECT_EQ(run(m), cli::exit_usage);

  m.profile = "";
  EXPECT_EQ(run(m), cli::exit_usage);

  {
    std::ofstream bad(path("bad.csv"));
    bad << "1,2\n-1,3\n";
  }
  m.profile = path("bad.csv");
  EXPECT_EQ(run(m), cli::exit_data);
  EXPECT_NE(log_.str().find("error"), std::string::npos);

  m.profile = "model-b:30";
  m.grid = "0.1:0.4:3";
  m.config_overrides = {"max_iters=1"};
  EXPECT_EQ(run(m), cli::exit_convergence);

  m.config_overrides = {"no_such_key=1"};
  EXPECT_EQ(run(m), cli::exit_data);

  m.config_overrides = {};
  m.mode = "spline";
  EXPECT_EQ(run(m), cli::exit_usage);
}

TEST_F(CliTest, ManifestDrivesARun) {
  {
    std::ofstream f(path("run.manifest"));
    f << "# density of a constant profile\n"
      << "command = density\n"
      << "profile = constant:4,8\n"
      << "grid = 0.5:1.5:3\n"
      << "set = fixed_point_tol=1e-12\n"
      << "out = " << path("m.csv") << '\n';
  }
  const cli::RunManifest m = cli::read_manifest(path("run.manifest"));
  EXPECT_EQ(m.command, cli::Command::density);
  EXPECT_EQ(m.config_overrides.size(), 1u);
  ASSERT_EQ(run(m), cli::exit_ok) << log_.str();
  const DensityTable t = read_table(path("m.csv"));
  for (std::size_t k = 0; k < t.size(); ++k) EXPECT_NEAR(t.F[k], reference::circular_F(4, t.s[k]), 1e-10);

  std::istringstream bad("command = density\nwhat = 3\n");
  EXPECT_THROW(cli::read_manifest(bad), cli::UsageError);
  std::istringstream badcmd("command = dance\n");
  EXPECT_THROW(cli::read_manifest(badcmd), cli::UsageError);
  EXPECT_THROW(cli::read_manifest(path("nope.manifest")), cli::UsageError);
}

TEST(CliParse, Commands) {
  for (auto c : {cli::Command::solve, cli::Command::density, cli::Command::separable, cli::Command::check,
                 cli::Command::oracle, cli::Command::simulate, cli::Command::compare})
    EXPECT_EQ(cli::parse_command(cli::command_name(c)), c);
  EXPECT_TRUE(cli::is_profile_generator("two-level:1,4,0.5,10"));
  EXPECT_FALSE(cli::is_profile_generator("data/p.csv"));
  EXPECT_TRUE(cli::is_function_spec("power:2"));
  EXPECT_FALSE(cli::is_function_spec("model-a:10"));
  EXPECT_EQ(cli::exit_code(Errc::NoConvergence), cli::exit_convergence);
  EXPECT_EQ(cli::exit_code(Errc::Parse), cli::exit_data);
}

namespace {
int shell(const std::string& args, const std::string& capture) {
  const std::string cmd = std::string("\"") + VPS_CLI_PATH + "\" " + args + " > \"" + capture + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
std::string slurp(const std::string& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}
}  // namespace

TEST_F(CliTest, Binary) {
  const std::string log = path("log.txt");
  EXPECT_EQ(shell("check --profile block-atom:3,20 --K 3", log), 0);
  EXPECT_NE(slurp(log).find("bfid=false"), std::string::npos) << slurp(log);

  EXPECT_EQ(shell("density --profile constant:1,16 --grid 0.1:0.9:5 --out " + path("b.csv"), log), 0) << slurp(log);
  EXPECT_EQ(read_table(path("b.csv")).size(), 5u);

  EXPECT_EQ(shell("density --profile " + path("absent.csv"), log), 2);
  EXPECT_EQ(shell("density --bogus-flag", log), 2);
  EXPECT_EQ(shell("solve --profile model-b:30 --grid 0.1:0.3:2 --set max_iters=1", log), 4);

  {
    std::ofstream f(path("base.manifest"));
    f << "command = density\nprofile = constant:9,8\ngrid = 0.5:1:2\n";
  }
  EXPECT_EQ(shell("--manifest " + path("base.manifest"), log), 0);
  EXPECT_NE(slurp(log).find("s,F,f_exact,f_fd,lower_bound_ratio"), std::string::npos);
  EXPECT_EQ(shell("density --manifest " + path("base.manifest") + " --out " + path("o.csv"), log), 0);
  const DensityTable t = read_table(path("o.csv"));
  EXPECT_NEAR(t.F[0], reference::circular_F(9, 0.5), 1e-10);
}
