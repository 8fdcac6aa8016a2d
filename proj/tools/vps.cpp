#include "vps/cli.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <string>
#include <vector>

namespace {

struct Flags {
  std::string profile, d, dtilde, grid, config, out, mode, law, oracle, eigs, density, manifest;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  int blocks = 1;
  double phi = 1.0;
  int quad = 20001;
};

struct Bound {
  CLI::Option* opt;
  std::function<void(vps::cli::RunManifest&)> apply;
};

}  // namespace

int main(int argc, char** argv) {
  using vps::cli::Command;
  CLI::App app{"Deterministic equivalents of spectra of random matrices with a variance profile"};
  app.require_subcommand(0, 1);
  Flags f;
  std::string top_manifest;
  app.add_option("--manifest", top_manifest, "Run the command described by a key=value manifest file");

  struct Sub {
    Command command;
    CLI::App* app;
    std::vector<Bound> bound;
  };
  std::vector<Sub> subs;
  auto add = [&](Command c, const std::string& help) -> Sub& {
    subs.push_back({c, app.add_subcommand(vps::cli::command_name(c), help), {}});
    Sub& s = subs.back();
    s.app->add_option("--manifest", f.manifest, "Base manifest; flags given here override it");
    s.app->add_option("--config", f.config, "Solver config file (key=value)");
    s.bound.push_back({s.app->add_option("--set", f.overrides, "Solver config override key=value")->take_all(),
                       [&f](auto& m) { m.config_overrides.insert(m.config_overrides.end(), f.overrides.begin(),
                                                                 f.overrides.end()); }});
    s.bound.push_back({s.app->get_option("--config"), [&f](auto& m) { m.config = f.config; }});
    s.bound.push_back({s.app->add_option("--out", f.out, "Output path (stdout when omitted)"),
                       [&f](auto& m) { m.out = f.out; }});
    return s;
  };
  auto profile_opt = [&](Sub& s) {
    s.bound.push_back({s.app->add_option("--profile", f.profile,
                                         "Profile CSV or generator (constant:v,n model-a:n model-b:n "
                                         "block-atom:k,m two-level:a,b,alpha,n)"),
                       [&f](auto& m) { m.profile = f.profile; }});
  };
  auto grid_opt = [&](Sub& s) {
    s.bound.push_back({s.app->add_option("--grid", f.grid, "Radius grid start:stop:count"),
                       [&f](auto& m) { m.grid = f.grid; }});
  };
  auto structure_opts = [&](Sub& s) {
    s.bound.push_back({s.app->add_option("--K", f.blocks, "Number of blocks for the BFID test"),
                       [&f](auto& m) { m.blocks = f.blocks; }});
    s.bound.push_back({s.app->add_option("--phi", f.phi, "Block threshold phi for the BFID test"),
                       [&f](auto& m) { m.phi = f.phi; }});
  };

  {
    Sub& s = add(Command::solve, "Solve the Master Equations on a radius grid (curve CSV)");
    profile_opt(s);
    grid_opt(s);
  }
  {
    Sub& s = add(Command::density, "Radial CDF and density of the deterministic equivalent (density CSV)");
    profile_opt(s);
    grid_opt(s);
    structure_opts(s);
    s.bound.push_back({s.app->add_option("--mode", f.mode, "exact or fd")->check(CLI::IsMember({"exact", "fd"})),
                       [&f](auto& m) { m.mode = f.mode; }});
  }
  {
    Sub& s = add(Command::separable, "Scalar-equation density for a separable profile d_i d~_j");
    s.bound.push_back({s.app->add_option("--d", f.d, "CSV vector or constant:c, power:a, two-level:a,b,alpha"),
                       [&f](auto& m) { m.d = f.d; }});
    s.bound.push_back({s.app->add_option("--dtilde", f.dtilde, "CSV vector or function spec"),
                       [&f](auto& m) { m.dtilde = f.dtilde; }});
    s.bound.push_back({s.app->add_option("--quad", f.quad, "Quadrature nodes when both are function specs"),
                       [&f](auto& m) { m.quad_points = f.quad; }});
    grid_opt(s);
  }
  {
    Sub& s = add(Command::check, "Structural report for a profile");
    profile_opt(s);
    structure_opts(s);
  }
  {
    Sub& s = add(Command::oracle, "Closed-form reference measure (density CSV)");
    s.bound.push_back({s.app->add_option("--oracle", f.oracle, "circular:V, block-atom:k or sombrero:a,b,alpha"),
                       [&f](auto& m) { m.oracle = f.oracle; }});
    grid_opt(s);
  }
  {
    Sub& s = add(Command::simulate, "Sample a random matrix and write its eigenvalues");
    profile_opt(s);
    s.bound.push_back({s.app->add_option("--law", f.law, "real-gaussian, complex-gaussian, rademacher, complex-bernoulli"),
                       [&f](auto& m) { m.law = f.law; }});
    s.bound.push_back({s.app->add_option("--seed", f.seed, "Random seed"), [&f](auto& m) { m.seed = f.seed; }});
  }
  {
    Sub& s = add(Command::compare, "Kolmogorov distance between eigenvalues and a density CSV");
    s.bound.push_back({s.app->add_option("--eigs", f.eigs, "Eigenvalue CSV (re,im)"),
                       [&f](auto& m) { m.eigs = f.eigs; }});
    s.bound.push_back({s.app->add_option("--density", f.density, "Density CSV"),
                       [&f](auto& m) { m.density = f.density; }});
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : vps::cli::exit_usage;
  }

  try {
    vps::cli::RunManifest m;
    const Sub* chosen = nullptr;
    for (const Sub& s : subs)
      if (s.app->parsed()) chosen = &s;
    if (!chosen) {
      if (top_manifest.empty()) {
        std::cerr << app.help();
        return vps::cli::exit_usage;
      }
      m = vps::cli::read_manifest(top_manifest);
    } else {
      if (!f.manifest.empty()) m = vps::cli::read_manifest(f.manifest);
      m.command = chosen->command;
      for (const Bound& b : chosen->bound)
        if (b.opt->count() > 0) b.apply(m);
    }
    return vps::cli::run(m, std::cout, std::cerr);
  } catch (const vps::cli::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return vps::cli::exit_usage;
  }
}
