// Shared domain types for variance-profile spectra: profiles, solver
// configuration, Master Equation solutions and radial measures.
#pragma once

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace vps {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Grid = std::vector<std::vector<double>>;

enum class Errc {
  NonSquare,
  NegativeEntry,
  NonFinite,
  AllZero,
  NegativeFunctionValue,
  LengthMismatch,
  NonPositiveEntry,
  BadParameter,
  BadPartition,
  TooLarge,
  NoConvergence,
  DivisionByZero,
  RankDeficient,
  OutsideSupport,
  InsufficientGrid,
  NoRoot,
  QuadratureUnstable,
  BackendUnavailable,
  EigFailure,
  Parse,
  Io,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::NonSquare: return "NonSquare";
    case Errc::NegativeEntry: return "NegativeEntry";
    case Errc::NonFinite: return "NonFinite";
    case Errc::AllZero: return "AllZero";
    case Errc::NegativeFunctionValue: return "NegativeFunctionValue";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::NonPositiveEntry: return "NonPositiveEntry";
    case Errc::BadParameter: return "BadParameter";
    case Errc::BadPartition: return "BadPartition";
    case Errc::TooLarge: return "TooLarge";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::DivisionByZero: return "DivisionByZero";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::OutsideSupport: return "OutsideSupport";
    case Errc::InsufficientGrid: return "InsufficientGrid";
    case Errc::NoRoot: return "NoRoot";
    case Errc::QuadratureUnstable: return "QuadratureUnstable";
    case Errc::BackendUnavailable: return "BackendUnavailable";
    case Errc::EigFailure: return "EigFailure";
    case Errc::Parse: return "Parse";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

// Numerical failures (as opposed to bad input).
inline bool is_convergence_error(Errc c) {
  return c == Errc::NoConvergence || c == Errc::RankDeficient || c == Errc::NoRoot ||
         c == Errc::QuadratureUnstable || c == Errc::EigFailure || c == Errc::DivisionByZero;
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Checked n x n matrix of variances sigma_ij^2 together with its
/// normalization V = sigma^2 / n. Immutable once built.
class VarianceProfile {
 public:
  static VarianceProfile from_matrix(Matrix variances) {
    if (variances.rows() != variances.cols())
      throw Error(Errc::NonSquare, std::to_string(variances.rows()) + "x" +
                                       std::to_string(variances.cols()) + " grid");
    if (variances.rows() == 0) throw Error(Errc::NonSquare, "empty grid");
    bool any_positive = false;
    for (Eigen::Index j = 0; j < variances.cols(); ++j) {
      for (Eigen::Index i = 0; i < variances.rows(); ++i) {
        const double v = variances(i, j);
        if (!std::isfinite(v))
          throw Error(Errc::NonFinite, "entry (" + std::to_string(i) + "," + std::to_string(j) + ")");
        if (v < 0.0)
          throw Error(Errc::NegativeEntry, "entry (" + std::to_string(i) + "," + std::to_string(j) + ")");
        any_positive = any_positive || v > 0.0;
      }
    }
    if (!any_positive) throw Error(Errc::AllZero, "profile is identically zero");
    return VarianceProfile(std::move(variances));
  }

  int n() const noexcept { return static_cast<int>(variances_.rows()); }
  const Matrix& variances() const noexcept { return variances_; }
  const Matrix& normalized() const noexcept { return normalized_; }

  bool is_symmetric() const { return variances_ == variances_.transpose(); }

  double min_variance() const { return variances_.minCoeff(); }
  double max_variance() const { return variances_.maxCoeff(); }

 private:
  explicit VarianceProfile(Matrix variances)
      : variances_(std::move(variances)),
        normalized_(variances_ / static_cast<double>(variances_.rows())) {}

  Matrix variances_;
  Matrix normalized_;
};

inline VarianceProfile validate_profile(const Grid& raw) {
  const std::size_t rows = raw.size();
  if (rows == 0) throw Error(Errc::NonSquare, "empty grid");
  for (const auto& row : raw) {
    if (row.size() != rows)
      throw Error(Errc::NonSquare, std::to_string(rows) + " rows but a row of length " +
                                       std::to_string(row.size()));
  }
  Matrix m(rows, rows);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < rows; ++j) m(i, j) = raw[i][j];
  return VarianceProfile::from_matrix(std::move(m));
}

struct SolverConfig {
  double fixed_point_tol = 1e-12;
  long max_iters = 200000;
  double t_initial = 1.0;
  double t_decay = 0.5;
  double t_min = 1e-10;
  double zero_threshold = 1e-8;
  double averaging_weight = 0.5;

  void validate() const {
    if (!(fixed_point_tol > 0.0)) throw Error(Errc::BadParameter, "fixed_point_tol must be > 0");
    if (max_iters <= 0) throw Error(Errc::BadParameter, "max_iters must be > 0");
    if (!(t_min > 0.0) || !(t_min < t_initial))
      throw Error(Errc::BadParameter, "require 0 < t_min < t_initial");
    if (!(t_decay > 0.0 && t_decay < 1.0)) throw Error(Errc::BadParameter, "t_decay must be in (0,1)");
    if (!(zero_threshold > 0.0)) throw Error(Errc::BadParameter, "zero_threshold must be > 0");
    if (!(averaging_weight > 0.0 && averaging_weight <= 1.0))
      throw Error(Errc::BadParameter, "averaging_weight must be in (0,1]");
  }
};

/// Solution (q, q~) of the (regularized) Master Equations at (s, t); t == 0
/// denotes the t -> 0 limit.
struct MESolution {
  double s = 0.0;
  double t = 0.0;
  Vector q;
  Vector q_tilde;
  long iterations = 0;
  double residual = 0.0;

  bool is_trivial() const { return q.size() == 0 || (q.isZero(0.0) && q_tilde.isZero(0.0)); }
};

/// <q, V q~> / n, i.e. one minus the radial CDF.
inline double inner_product(const VarianceProfile& p, const MESolution& sol) {
  return sol.q.dot(p.normalized() * sol.q_tilde) / p.n();
}

struct RadialMeasure {
  std::vector<double> s_grid;
  std::vector<double> F;
  std::vector<double> f;
  double atom_at_zero = 0.0;
  double support_radius = 0.0;

  // CDF at an arbitrary radius: linear in s^2 between grid points, from
  // (0, atom) up to the first node and 1 past the last node or the support.
  double cdf_at(double s) const {
    if (s < 0.0) return 0.0;
    if (s_grid.empty() || s >= support_radius) return 1.0;
    if (s >= s_grid.back()) return F.back();
    double s0 = 0.0, f0 = atom_at_zero;
    for (std::size_t k = 0; k < s_grid.size(); ++k) {
      if (s <= s_grid[k]) {
        const double a = s0 * s0, b = s_grid[k] * s_grid[k];
        const double w = b > a ? (s * s - a) / (b - a) : 1.0;
        return f0 + w * (F[k] - f0);
      }
      s0 = s_grid[k];
      f0 = F[k];
    }
    return F.back();
  }
};

// ---------------------------------------------------------------------------
// Text formats

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw Error(Errc::Parse, "not a number: '" + std::string(text) + "'");
  return v;
}

inline std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

/// Rows of comma-separated numbers; blank lines are skipped.
inline Grid parse_numeric_csv(std::istream& in) {
  Grid rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split(line, ',')) row.push_back(parse_double(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open '" + path + "'");
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::Io, "cannot write '" + path + "'");
  return out;
}

inline VarianceProfile read_profile_csv(std::istream& in) { return validate_profile(parse_numeric_csv(in)); }

inline VarianceProfile read_profile_csv(const std::string& path) {
  auto in = open_input(path);
  return read_profile_csv(in);
}

inline void write_profile_csv(std::ostream& out, const VarianceProfile& p) {
  const Matrix& v = p.variances();
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      if (j) out << ',';
      out << format_double(v(i, j));
    }
    out << '\n';
  }
}

inline void write_profile_csv(const std::string& path, const VarianceProfile& p) {
  auto out = open_output(path);
  write_profile_csv(out, p);
}

/// Flat key=value text; '#' starts a comment. Unknown keys are rejected.
inline SolverConfig parse_config(std::istream& in, SolverConfig cfg = {}) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::Parse, "config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key == "fixed_point_tol") cfg.fixed_point_tol = parse_double(value);
    else if (key == "max_iters") cfg.max_iters = static_cast<long>(parse_double(value));
    else if (key == "t_initial") cfg.t_initial = parse_double(value);
    else if (key == "t_decay") cfg.t_decay = parse_double(value);
    else if (key == "t_min") cfg.t_min = parse_double(value);
    else if (key == "zero_threshold") cfg.zero_threshold = parse_double(value);
    else if (key == "averaging_weight") cfg.averaging_weight = parse_double(value);
    else throw Error(Errc::Parse, "unknown config key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

inline SolverConfig load_config(const std::string& path) {
  auto in = open_input(path);
  return parse_config(in);
}

inline void write_config(std::ostream& out, const SolverConfig& c) {
  out << "fixed_point_tol=" << format_double(c.fixed_point_tol) << '\n'
      << "max_iters=" << c.max_iters << '\n'
      << "t_initial=" << format_double(c.t_initial) << '\n'
      << "t_decay=" << format_double(c.t_decay) << '\n'
      << "t_min=" << format_double(c.t_min) << '\n'
      << "zero_threshold=" << format_double(c.zero_threshold) << '\n'
      << "averaging_weight=" << format_double(c.averaging_weight) << '\n';
}

}  // namespace vps
