// Batch front end: a RunManifest names one command with its inputs and
// outputs; run() executes it and maps failures to exit codes.
#pragma once

#include "vps/circular_law.hpp"
#include "vps/core.hpp"
#include "vps/measures.hpp"
#include "vps/mesolver.hpp"
#include "vps/montecarlo.hpp"
#include "vps/profiles.hpp"
#include "vps/reference.hpp"
#include "vps/separable.hpp"

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace vps::cli {

enum class Command { solve, density, separable, check, oracle, simulate, compare };

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 2;
inline constexpr int exit_data = 3;
inline constexpr int exit_convergence = 4;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Command parse_command(const std::string& s) {
  static const std::map<std::string, Command> names = {
      {"solve", Command::solve},   {"density", Command::density},   {"separable", Command::separable},
      {"check", Command::check},   {"oracle", Command::oracle},     {"simulate", Command::simulate},
      {"compare", Command::compare}};
  const auto it = names.find(s);
  if (it == names.end()) throw UsageError("unknown command '" + s + "'");
  return it->second;
}

inline const char* command_name(Command c) {
  switch (c) {
    case Command::solve: return "solve";
    case Command::density: return "density";
    case Command::separable: return "separable";
    case Command::check: return "check";
    case Command::oracle: return "oracle";
    case Command::simulate: return "simulate";
    case Command::compare: return "compare";
  }
  return "unknown";
}

inline int exit_code(Errc c) { return is_convergence_error(c) ? exit_convergence : exit_data; }

struct RunManifest {
  Command command = Command::solve;
  std::string profile;  // CSV path or generator spec
  std::string d;        // CSV path or function spec
  std::string dtilde;
  std::string grid;  // "start:stop:count"; empty means the default grid
  std::string config;
  std::vector<std::string> config_overrides;  // key=value
  std::string out;
  std::string mode = "exact";
  std::string law = "complex-bernoulli";
  std::string oracle;
  std::string eigs;
  std::string density;
  std::uint64_t seed = 0;
  int blocks = 1;
  double phi = 1.0;
  int quad_points = 20001;
};

/// Generator specs accepted in place of a profile path.
inline bool is_profile_generator(const std::string& spec) {
  static const char* names[] = {"constant:", "model-a:", "model-b:", "block-atom:", "two-level:"};
  for (const char* n : names)
    if (spec.rfind(n, 0) == 0) return true;
  return false;
}

inline bool is_function_spec(const std::string& spec) {
  return spec.rfind("constant:", 0) == 0 || spec.rfind("power:", 0) == 0 || spec.rfind("two-level:", 0) == 0;
}

namespace detail {

inline void require_file(const std::string& what, const std::string& path) {
  if (path.empty()) throw UsageError("missing --" + what);
  if (!std::filesystem::is_regular_file(path)) throw UsageError("--" + what + " '" + path + "' does not exist");
}

}  // namespace detail

/// Checks that the command has its inputs and that every input path exists.
inline void validate(const RunManifest& m) {
  using detail::require_file;
  if (!m.config.empty()) require_file("config", m.config);
  auto require_profile = [&] {
    if (m.profile.empty()) throw UsageError("missing --profile");
    if (!is_profile_generator(m.profile)) require_file("profile", m.profile);
  };
  switch (m.command) {
    case Command::solve:
    case Command::density:
    case Command::check:
    case Command::simulate:
      require_profile();
      break;
    case Command::separable:
      for (const auto& [flag, value] : {std::pair{"d", m.d}, std::pair{"dtilde", m.dtilde}})
        if (!is_function_spec(value)) require_file(flag, value);
      break;
    case Command::oracle:
      if (m.oracle.empty()) throw UsageError("missing --oracle");
      break;
    case Command::compare:
      require_file("eigs", m.eigs);
      require_file("density", m.density);
      break;
  }
  if (m.mode != "exact" && m.mode != "fd") throw UsageError("--mode must be exact or fd");
  if (m.blocks < 1) throw UsageError("--K must be >= 1");
  if (!(m.phi > 0.0)) throw UsageError("--phi must be > 0");
  if (m.quad_points < 3) throw UsageError("--quad must be >= 3");
}

/// key=value lines; "set" may repeat and adds a solver config override.
inline RunManifest read_manifest(std::istream& in) {
  RunManifest m;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError("manifest line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    try {
      if (key == "command") m.command = parse_command(value);
      else if (key == "profile") m.profile = value;
      else if (key == "d") m.d = value;
      else if (key == "dtilde") m.dtilde = value;
      else if (key == "grid") m.grid = value;
      else if (key == "config") m.config = value;
      else if (key == "set") m.config_overrides.push_back(value);
      else if (key == "out") m.out = value;
      else if (key == "mode") m.mode = value;
      else if (key == "law") m.law = value;
      else if (key == "oracle") m.oracle = value;
      else if (key == "eigs") m.eigs = value;
      else if (key == "density") m.density = value;
      else if (key == "seed") m.seed = std::stoull(value);
      else if (key == "K") m.blocks = std::stoi(value);
      else if (key == "phi") m.phi = parse_double(value);
      else if (key == "quad") m.quad_points = std::stoi(value);
      else throw UsageError("unknown manifest key '" + key + "'");
    } catch (const std::logic_error&) {
      throw UsageError("manifest line " + std::to_string(lineno) + ": bad value for '" + key + "'");
    } catch (const Error&) {
      throw UsageError("manifest line " + std::to_string(lineno) + ": bad value for '" + key + "'");
    }
  }
  return m;
}

inline RunManifest read_manifest(const std::string& path) {
  detail::require_file("manifest", path);
  auto in = open_input(path);
  return read_manifest(in);
}

// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<double> spec_args(const std::string& spec, std::size_t count) {
  const auto colon = spec.find(':');
  const auto parts = split(spec.substr(colon + 1), ',');
  if (parts.size() != count)
    throw UsageError("'" + spec + "' expects " + std::to_string(count) + " comma-separated arguments");
  std::vector<double> v;
  try {
    for (const auto& p : parts) v.push_back(parse_double(p));
  } catch (const Error&) {
    throw UsageError("non-numeric argument in '" + spec + "'");
  }
  return v;
}

inline int as_int(double v, const std::string& spec) {
  if (!(v >= 1.0) || v != std::floor(v)) throw UsageError("'" + spec + "' needs positive integer sizes");
  return static_cast<int>(v);
}

}  // namespace detail

/// Profile from a CSV path or a generator spec: constant:v,n, model-a:n,
/// model-b:n, block-atom:k,m, two-level:a,b,alpha,n.
inline VarianceProfile resolve_profile(const std::string& spec) {
  using detail::as_int;
  using detail::spec_args;
  if (!is_profile_generator(spec)) return read_profile_csv(spec);
  const std::string name = spec.substr(0, spec.find(':'));
  if (name == "constant") {
    const auto a = spec_args(spec, 2);
    return build_constant(a[0], as_int(a[1], spec));
  }
  if (name == "model-a") return build_model_a(as_int(spec_args(spec, 1)[0], spec));
  if (name == "model-b") return build_model_b(as_int(spec_args(spec, 1)[0], spec));
  if (name == "block-atom") {
    const auto a = spec_args(spec, 2);
    return build_block_atom(as_int(a[0], spec), as_int(a[1], spec));
  }
  const auto a = spec_args(spec, 4);
  return build_two_level(a[0], a[1], a[2], as_int(a[3], spec)).profile;
}

inline SolverConfig resolve_config(const RunManifest& m) {
  SolverConfig cfg = m.config.empty() ? SolverConfig{} : load_config(m.config);
  if (!m.config_overrides.empty()) {
    std::stringstream ss;
    for (const auto& kv : m.config_overrides) ss << kv << '\n';
    cfg = parse_config(ss, cfg);
  }
  return cfg;
}

inline std::vector<double> resolve_grid(const RunManifest& m, double rho) {
  if (m.grid.empty()) return default_grid(rho);
  try {
    return parse_grid(m.grid).points();
  } catch (const Error& e) {
    throw UsageError(std::string("--grid: ") + e.what());
  }
}

/// n-vector from a CSV file (any layout, read row-major) or a function spec
/// sampled at i/n.
inline Vector resolve_vector(const std::string& spec, int n) {
  if (is_function_spec(spec)) {
    if (n < 1) throw UsageError("cannot size function spec '" + spec + "' without a CSV vector");
    return sample_function(parse_function_spec(spec), n);
  }
  auto in = open_input(spec);
  std::vector<double> flat;
  for (const auto& row : parse_numeric_csv(in)) flat.insert(flat.end(), row.begin(), row.end());
  return Eigen::Map<const Vector>(flat.data(), static_cast<Eigen::Index>(flat.size()));
}

// ---------------------------------------------------------------------------
// Reports

using Report = std::vector<std::pair<std::string, std::string>>;

inline std::string yes_no(bool b) { return b ? "true" : "false"; }

inline void write_report_text(std::ostream& out, const Report& r) {
  for (const auto& [k, v] : r) out << k << '=' << v << '\n';
}

inline void write_report_csv(std::ostream& out, const Report& r) {
  out << "key,value\n";
  for (const auto& [k, v] : r) out << k << ',' << v << '\n';
}

inline Report read_report_text(std::istream& in) {
  Report r;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    r.emplace_back(trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)));
  }
  return r;
}

inline std::optional<std::string> report_value(const Report& r, const std::string& key) {
  for (const auto& [k, v] : r)
    if (k == key) return v;
  return std::nullopt;
}

inline std::string sidecar_path(const std::string& out) { return out + ".meta"; }

struct StructureVerdicts {
  bool irreducible = false;
  bool symmetric = false;
  std::optional<bool> bfid;  // empty when K does not divide n or K is too large
  std::string bfid_note;
  bool circular = false;
  std::optional<CircularLawReport> circular_report;
};

/// The circular-law test is only attempted on BFID profiles.
inline StructureVerdicts structure_verdicts(const VarianceProfile& p, int blocks, double phi, const SolverConfig& cfg) {
  StructureVerdicts v;
  v.irreducible = is_irreducible(p);
  v.symmetric = p.is_symmetric();
  try {
    v.bfid = is_block_fully_indecomposable(p, blocks, phi);
  } catch (const Error& e) {
    if (e.code() != Errc::BadPartition && e.code() != Errc::TooLarge) throw;
    v.bfid_note = e.what();
  }
  if (v.bfid.value_or(false)) {
    try {
      v.circular_report = circular_law_test(p, 1e-6, cfg);
      v.circular = v.circular_report->circular;
    } catch (const Error& e) {
      if (!is_convergence_error(e.code())) throw;
    }
  }
  return v;
}

inline void add_verdicts(Report& r, const StructureVerdicts& v, int blocks, double phi) {
  r.emplace_back("irreducible", yes_no(v.irreducible));
  r.emplace_back("symmetric", yes_no(v.symmetric));
  r.emplace_back("K", std::to_string(blocks));
  r.emplace_back("phi", format_double(phi));
  r.emplace_back("bfid", v.bfid ? yes_no(*v.bfid) : "undetermined");
  r.emplace_back("circular", yes_no(v.circular));
}

// ---------------------------------------------------------------------------
// Commands

namespace detail {

class OutputTarget {
 public:
  OutputTarget(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (!path.empty()) {
      file_ = open_output(path);
      out_ = &file_;
    }
  }
  std::ostream& stream() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

inline void write_sidecar(const RunManifest& m, const Report& meta) {
  if (m.out.empty()) return;
  auto out = open_output(sidecar_path(m.out));
  write_report_text(out, meta);
}

inline int cmd_solve(const RunManifest& m, std::ostream& out, std::ostream& log) {
  const VarianceProfile p = resolve_profile(m.profile);
  const SolverConfig cfg = resolve_config(m);
  const double rho = spectral_radius(p);
  const MECurve curve = solve_curve(p, resolve_grid(m, rho), cfg);
  OutputTarget target(m.out, out);
  write_curve_csv(target.stream(), curve_records(curve));
  int failed = 0;
  for (std::size_t k = 0; k < curve.s_grid.size(); ++k) {
    if (!curve.converged(k)) {
      ++failed;
      log << "s=" << format_double(curve.s_grid[k]) << ": " << curve.failures[k] << '\n';
    }
  }
  return failed ? exit_convergence : exit_ok;
}

inline int cmd_density(const RunManifest& m, std::ostream& out, std::ostream& log) {
  const VarianceProfile p = resolve_profile(m.profile);
  const SolverConfig cfg = resolve_config(m);
  const double rho = spectral_radius(p);
  const MECurve curve = solve_curve(p, resolve_grid(m, rho), cfg);
  const DensityTable table = density_table(curve, parse_density_mode(m.mode));
  OutputTarget target(m.out, out);
  write_density_csv(target.stream(), table);

  const StructureVerdicts v = structure_verdicts(p, m.blocks, m.phi, cfg);
  Report meta;
  meta.emplace_back("n", std::to_string(p.n()));
  meta.emplace_back("rho", format_double(rho));
  double atom = std::numeric_limits<double>::quiet_NaN();
  try {
    atom = atom_at_zero(curve);
  } catch (const Error& e) {
    log << e.what() << '\n';
  }
  meta.emplace_back("atom_at_zero", format_double(atom));
  meta.emplace_back("density_at_zero",
                    format_double(v.circular_report ? v.circular_report->density_zero
                                                    : std::numeric_limits<double>::quiet_NaN()));
  add_verdicts(meta, v, m.blocks, m.phi);
  write_sidecar(m, meta);

  int failed = 0;
  for (std::size_t k = 0; k < curve.s_grid.size(); ++k) {
    if (!curve.converged(k)) {
      ++failed;
      log << "s=" << format_double(curve.s_grid[k]) << ": " << curve.failures[k] << '\n';
    }
  }
  return failed ? exit_convergence : exit_ok;
}

inline int cmd_separable(const RunManifest& m, std::ostream& out, std::ostream&) {
  const bool d_spec = is_function_spec(m.d), dt_spec = is_function_spec(m.dtilde);
  DensityTable table;
  Report meta;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (d_spec && dt_spec) {
    const ScalarFunction d = parse_function_spec(m.d), dt = parse_function_spec(m.dtilde);
    const double rho = sampled_separable_u(d, dt, 0.0, m.quad_points).rho;
    table.s = resolve_grid(m, rho);
    for (double s : table.s) {
      const auto sol = sampled_separable_u(d, dt, s, m.quad_points);
      table.F.push_back(1.0 - sol.u);
      table.f_exact.push_back(s * s < rho ? sampled_separable_density(d, dt, s, m.quad_points) : 0.0);
      table.lower_bound_ratio.push_back(nan);
    }
    table.f_fd = fd_radial_density(table.s, table.F, std::sqrt(rho));
    meta.emplace_back("rho", format_double(rho));
    meta.emplace_back("density_at_zero", format_double(nan));
  } else {
    Vector dv, dtv;
    if (d_spec) {
      dtv = resolve_vector(m.dtilde, 0);
      dv = resolve_vector(m.d, static_cast<int>(dtv.size()));
    } else {
      dv = resolve_vector(m.d, 0);
      dtv = resolve_vector(m.dtilde, static_cast<int>(dv.size()));
    }
    const SeparableProfile sep = make_separable(dv, dtv);
    const double rho = sep.spectral_radius();
    table.s = resolve_grid(m, rho);
    for (double s : table.s) {
      const double u = solve_u(sep, s).u;
      table.F.push_back(1.0 - u);
      table.f_exact.push_back(s * s < rho ? separable_density(sep, s) : 0.0);
      table.lower_bound_ratio.push_back(u > 0.0 ? separable_lower_bound(sep, s, u) : nan);
    }
    table.f_fd = fd_radial_density(table.s, table.F, std::sqrt(rho));
    meta.emplace_back("n", std::to_string(sep.n()));
    meta.emplace_back("rho", format_double(rho));
    meta.emplace_back("density_at_zero", format_double(separable_density_zero(sep)));
  }
  meta.emplace_back("atom_at_zero", format_double(0.0));
  OutputTarget target(m.out, out);
  write_density_csv(target.stream(), table);
  write_sidecar(m, meta);
  return exit_ok;
}

inline int cmd_check(const RunManifest& m, std::ostream& out, std::ostream&) {
  const VarianceProfile p = resolve_profile(m.profile);
  const SolverConfig cfg = resolve_config(m);
  Report r;
  r.emplace_back("n", std::to_string(p.n()));
  r.emplace_back("rho", format_double(spectral_radius(p)));
  r.emplace_back("min_variance", format_double(p.min_variance()));
  r.emplace_back("max_variance", format_double(p.max_variance()));
  const StructureVerdicts v = structure_verdicts(p, m.blocks, m.phi, cfg);
  add_verdicts(r, v, m.blocks, m.phi);
  if (!v.bfid_note.empty()) r.emplace_back("bfid_note", v.bfid_note);
  if (v.circular_report) {
    r.emplace_back("circular_max_deviation", format_double(v.circular_report->max_deviation));
    r.emplace_back("density_zero_ratio", format_double(v.circular_report->density_zero_ratio));
  }
  write_report_text(out, r);
  if (!m.out.empty()) {
    auto csv = open_output(m.out);
    write_report_csv(csv, r);
  }
  return exit_ok;
}

// Cumulative 2 pi int_0^s f(r) r dr on the grid by composite Simpson.
template <typename Density>
std::vector<double> integrate_radial(const std::vector<double>& grid, double edge, Density&& f) {
  std::vector<double> F(grid.size());
  double acc = 0.0, prev = 0.0;
  constexpr int panels = 400;
  const double inside = std::nextafter(edge, 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double hi = std::min(grid[k], edge);
    if (hi > prev) {
      const double h = (hi - prev) / panels;
      double sum = 0.0;
      for (int j = 0; j <= panels; ++j) {
        const double r = std::min(prev + j * h, inside);
        const double w = (j == 0 || j == panels) ? 1.0 : (j % 2 ? 4.0 : 2.0);
        sum += w * f(r) * r;
      }
      acc += 2.0 * std::numbers::pi * sum * h / 3.0;
      prev = hi;
    }
    F[k] = std::min(acc, 1.0);
  }
  return F;
}

inline int cmd_oracle(const RunManifest& m, std::ostream& out, std::ostream&) {
  const std::string& spec = m.oracle;
  const std::string name = spec.substr(0, spec.find(':'));
  DensityTable table;
  double rho = 0.0, atom = 0.0, f0 = 0.0;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto fill = [&](const ScalarFunction& Ffun, const ScalarFunction& ffun) {
    table.s = resolve_grid(m, rho);
    for (double s : table.s) {
      table.F.push_back(Ffun(s));
      table.f_exact.push_back(ffun(s));
      table.lower_bound_ratio.push_back(nan);
    }
  };
  if (name == "circular" && spec.find(':') != std::string::npos) {
    const double var = spec_args(spec, 1)[0];
    if (!(var > 0.0)) throw UsageError("circular oracle needs a positive variance");
    rho = var;
    f0 = reference::circular_density(var, 0.0);
    fill([var](double s) { return reference::circular_F(var, s); },
         [var](double s) { return reference::circular_density(var, s); });
  } else if (name == "block-atom" && spec.find(':') != std::string::npos) {
    const int k = as_int(spec_args(spec, 1)[0], spec);
    if (k < 2) throw UsageError("block atom oracle needs k >= 2");
    rho = std::pow(reference::block_atom_edge(k), 2);
    atom = (k - 2.0) / k;
    f0 = reference::block_atom_density(k, 0.0);
    fill([k](double s) { return reference::block_atom_F(k, s); },
         [k](double s) { return reference::block_atom_density(k, s); });
  } else if (name == "sombrero" && spec.find(':') != std::string::npos) {
    const auto a = spec_args(spec, 3);
    if (!(a[0] > 0.0 && a[1] > 0.0 && a[2] > 0.0 && a[2] < 1.0))
      throw UsageError("sombrero oracle needs a, b > 0 and alpha in (0,1)");
    rho = a[2] * a[0] + (1.0 - a[2]) * a[1];
    auto f = [a](double z) { return sombrero_density(a[0], a[1], a[2], z); };
    f0 = f(0.0);
    table.s = resolve_grid(m, rho);
    table.F = integrate_radial(table.s, std::sqrt(rho), f);
    for (double s : table.s) {
      table.f_exact.push_back(f(s));
      table.lower_bound_ratio.push_back(nan);
    }
  } else {
    throw UsageError("unknown oracle '" + spec + "' (circular:V, block-atom:k, sombrero:a,b,alpha)");
  }
  table.f_fd = fd_radial_density(table.s, table.F, std::sqrt(rho));
  OutputTarget target(m.out, out);
  write_density_csv(target.stream(), table);
  write_sidecar(m, {{"rho", format_double(rho)},
                    {"atom_at_zero", format_double(atom)},
                    {"density_at_zero", format_double(f0)}});
  return exit_ok;
}

inline int cmd_simulate(const RunManifest& m, std::ostream& out, std::ostream& log) {
  const VarianceProfile p = resolve_profile(m.profile);
  EntryLaw law;
  try {
    law.kind = parse_entry_kind(m.law);
  } catch (const Error&) {
    throw UsageError("unknown --law '" + m.law + "'");
  }
  law.seed = m.seed;
  const SpectrumSample sample = spectrum(sample_matrix(p, law));
  OutputTarget target(m.out, out);
  write_eigenvalue_csv(target.stream(), sample);
  log << "backend=" << spectrum_backend() << " n=" << p.n() << " law=" << entry_kind_name(law.kind)
      << " seed=" << law.seed << '\n';
  return exit_ok;
}

inline int cmd_compare(const RunManifest& m, std::ostream& out, std::ostream&) {
  const SpectrumSample sample = read_eigenvalue_csv(m.eigs);
  DensityTable table;
  {
    auto in = open_input(m.density);
    table = read_density_csv(in);
  }
  std::optional<double> atom, support;
  if (std::filesystem::is_regular_file(sidecar_path(m.density))) {
    auto in = open_input(sidecar_path(m.density));
    const Report meta = read_report_text(in);
    if (const auto a = report_value(meta, "atom_at_zero"); a && !std::isnan(parse_double(*a))) atom = parse_double(*a);
    if (const auto r = report_value(meta, "rho")) support = std::sqrt(parse_double(*r));
  }
  const RadialMeasure model = measure_from_table(table, atom, support);
  Report r;
  r.emplace_back("eigenvalues", std::to_string(sample.eigenvalues.size()));
  r.emplace_back("grid_points", std::to_string(table.size()));
  r.emplace_back("atom_at_zero", format_double(model.atom_at_zero));
  r.emplace_back("kolmogorov_distance", format_double(kolmogorov_distance(model, sample)));
  write_report_text(out, r);
  if (!m.out.empty()) {
    auto csv = open_output(m.out);
    write_report_csv(csv, r);
  }
  return exit_ok;
}

}  // namespace detail

/// Executes one command. Usage problems give 2, bad data 3 and numerical
/// failures 4; messages go to log.
inline int run(const RunManifest& m, std::ostream& out = std::cout, std::ostream& log = std::cerr) {
  try {
    validate(m);
    switch (m.command) {
      case Command::solve: return detail::cmd_solve(m, out, log);
      case Command::density: return detail::cmd_density(m, out, log);
      case Command::separable: return detail::cmd_separable(m, out, log);
      case Command::check: return detail::cmd_check(m, out, log);
      case Command::oracle: return detail::cmd_oracle(m, out, log);
      case Command::simulate: return detail::cmd_simulate(m, out, log);
      case Command::compare: return detail::cmd_compare(m, out, log);
    }
  } catch (const UsageError& e) {
    log << "usage error: " << e.what() << '\n';
    return exit_usage;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return exit_code(e.code());
  }
  return exit_usage;
}

}  // namespace vps::cli
