#pragma once

// Batch experiments: JSON configs, single runs, parameter sweeps and the
// regression tables behind the command-line tool.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bkm/errors.hpp"
#include "bkm/geometry.hpp"
#include "bkm/gensol.hpp"
#include "bkm/manufactured.hpp"
#include "bkm/solver.hpp"
#include "bkm/specfun.hpp"

namespace bkm::experiment {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

struct ExperimentConfig {
  std::string name = "run";
  geometry::Domain domain = geometry::Ellipse{};
  Variant variant = Variant::Helmholtz;
  double delta = 0.1;
  std::string exact = "laplace_2d";
  int boundary_knots = 9;
  int interior_knots = 0;
  int samples = 492;
  geometry::SamplingMode sampling = geometry::SamplingMode::Lattice;
  std::uint64_t seed = 0;
  Mode mode = Mode::Simplified;
  int max_iter = 50;
  double tol = 1e-10;
  Formulation formulation = Formulation::Symmetric;
  double regularization = 0.0;
  std::string sweep_axis;
  std::vector<double> sweep_values;
  std::string output;
};

namespace detail {

inline ConfigError field_error(const std::string& field, const std::string& what) {
  return ConfigError("config field '" + field + "': " + what);
}

inline void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw field_error(where, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw field_error(where.empty() ? key : where + "." + key, "unknown field");
  }
}

template <class T>
T get(const json& obj, const std::string& where, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  const std::string field = where.empty() ? key : where + "." + key;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw field_error(field, "wrong type");
  }
}

inline geometry::Domain parse_domain(const json& d) {
  const std::string shape = get<std::string>(d, "domain", "shape", "");
  if (shape == "ellipse") {
    check_keys(d, "domain", {"shape", "a", "b"});
    geometry::Ellipse e{get(d, "domain", "a", 2.0), get(d, "domain", "b", 1.0)};
    if (!(e.a > 0.0)) throw field_error("domain.a", "must be > 0");
    if (!(e.b > 0.0)) throw field_error("domain.b", "must be > 0");
    return e;
  }
  if (shape == "star") {
    check_keys(d, "domain", {"shape", "rho0", "eps", "lobes"});
    geometry::StarCurve s{get(d, "domain", "rho0", 1.0), get(d, "domain", "eps", 0.3),
                          get(d, "domain", "lobes", 5)};
    if (!(s.rho0 > 0.0)) throw field_error("domain.rho0", "must be > 0");
    if (!(std::abs(s.eps) < 1.0)) throw field_error("domain.eps", "must satisfy |eps| < 1");
    if (s.lobes < 1) throw field_error("domain.lobes", "must be >= 1");
    return s;
  }
  if (shape == "cube_cavity") {
    check_keys(d, "domain", {"shape", "side", "cavity_knots"});
    geometry::CubeWithEllipsoidCavity c{get(d, "domain", "side", 1.0), get(d, "domain", "cavity_knots", 6)};
    if (!(c.side > 0.0)) throw field_error("domain.side", "must be > 0");
    if (c.cavity_knots < 0) throw field_error("domain.cavity_knots", "must be >= 0");
    return c;
  }
  throw field_error("domain.shape", "expected one of ellipse, star, cube_cavity");
}

inline json domain_to_json(const geometry::Domain& domain) {
  return std::visit(
      [](const auto& d) -> json {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, geometry::Ellipse>) {
          return {{"shape", "ellipse"}, {"a", d.a}, {"b", d.b}};
        } else if constexpr (std::is_same_v<T, geometry::StarCurve>) {
          return {{"shape", "star"}, {"rho0", d.rho0}, {"eps", d.eps}, {"lobes", d.lobes}};
        } else {
          return {{"shape", "cube_cavity"}, {"side", d.side}, {"cavity_knots", d.cavity_knots}};
        }
      },
      domain);
}

inline Variant parse_variant(const std::string& s) {
  if (s == "helmholtz") return Variant::Helmholtz;
  if (s == "modified_helmholtz") return Variant::ModifiedHelmholtz;
  throw field_error("variant", "expected helmholtz or modified_helmholtz");
}

}  // namespace detail

inline Mode parse_mode(const std::string& s, const std::string& field = "mode") {
  if (s == "simplified") return Mode::Simplified;
  if (s == "full") return Mode::Full;
  throw detail::field_error(field, "expected simplified or full");
}

inline ExperimentConfig parse_config(const json& j) {
  using namespace detail;
  check_keys(j, "", {"name", "domain", "variant", "delta", "exact", "knots", "samples", "mode",
                     "iteration", "formulation", "regularization", "sweep", "output"});
  ExperimentConfig c;
  c.name = get<std::string>(j, "", "name", c.name);
  if (j.contains("domain")) c.domain = parse_domain(j.at("domain"));
  if (j.contains("variant")) c.variant = parse_variant(get<std::string>(j, "", "variant", ""));
  c.delta = get(j, "", "delta", c.delta);
  if (!(c.delta > 0.0) || !std::isfinite(c.delta)) throw field_error("delta", "must be > 0");
  c.exact = get<std::string>(j, "", "exact", geometry::dimension(c.domain) == 3 ? "laplace_3d" : "laplace_2d");
  try {
    (void)manufactured::by_name(c.exact);
  } catch (const ConfigError&) {
    throw field_error("exact", "unknown exact solution '" + c.exact + "'");
  }

  if (j.contains("knots")) {
    const auto& k = j.at("knots");
    check_keys(k, "knots", {"boundary", "interior"});
    c.boundary_knots = get(k, "knots", "boundary", c.boundary_knots);
    c.interior_knots = get(k, "knots", "interior", c.interior_knots);
  }
  if (c.boundary_knots < 1) throw field_error("knots.boundary", "must be positive");
  if (c.interior_knots < 0) throw field_error("knots.interior", "must be >= 0");

  if (j.contains("samples")) {
    const auto& s = j.at("samples");
    check_keys(s, "samples", {"count", "mode", "seed"});
    c.samples = get(s, "samples", "count", c.samples);
    const std::string m = get<std::string>(s, "samples", "mode", "lattice");
    if (m == "lattice") c.sampling = geometry::SamplingMode::Lattice;
    else if (m == "random") c.sampling = geometry::SamplingMode::Random;
    else throw field_error("samples.mode", "expected lattice or random");
    c.seed = get<std::uint64_t>(s, "samples", "seed", 0);
  }
  if (c.samples < 1) throw field_error("samples.count", "must be positive");

  if (j.contains("mode")) c.mode = parse_mode(get<std::string>(j, "", "mode", ""));
  if (j.contains("iteration")) {
    const auto& it = j.at("iteration");
    check_keys(it, "iteration", {"max_iter", "tol"});
    c.max_iter = get(it, "iteration", "max_iter", c.max_iter);
    c.tol = get(it, "iteration", "tol", c.tol);
  }
  if (c.max_iter < 0) throw field_error("iteration.max_iter", "must be >= 0");
  if (!(c.tol > 0.0)) throw field_error("iteration.tol", "must be > 0");
  if (c.mode == Mode::Full && c.interior_knots < 1)
    throw field_error("knots.interior", "full mode needs at least one interior knot");

  const std::string f = get<std::string>(j, "", "formulation", "symmetric");
  if (f == "symmetric") c.formulation = Formulation::Symmetric;
  else if (f == "unsymmetric") c.formulation = Formulation::Unsymmetric;
  else throw field_error("formulation", "expected symmetric or unsymmetric");
  c.regularization = get(j, "", "regularization", c.regularization);
  if (!(c.regularization >= 0.0)) throw field_error("regularization", "must be >= 0");

  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    check_keys(s, "sweep", {"axis", "values"});
    c.sweep_axis = get<std::string>(s, "sweep", "axis", "");
    c.sweep_values = get<std::vector<double>>(s, "sweep", "values", {});
  }
  c.output = get<std::string>(j, "", "output", "");
  return c;
}

inline ExperimentConfig load_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file '" + file + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + file + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

/// Normalised echo of a config; parse_config(to_json(c)) reproduces c.
inline json to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["domain"] = detail::domain_to_json(c.domain);
  j["variant"] = to_string(c.variant);
  j["delta"] = c.delta;
  j["exact"] = c.exact;
  j["knots"] = {{"boundary", c.boundary_knots}, {"interior", c.interior_knots}};
  j["samples"] = {{"count", c.samples},
                  {"mode", c.sampling == geometry::SamplingMode::Lattice ? "lattice" : "random"},
                  {"seed", c.seed}};
  j["mode"] = to_string(c.mode);
  j["iteration"] = {{"max_iter", c.max_iter}, {"tol", c.tol}};
  j["formulation"] = c.formulation == Formulation::Symmetric ? "symmetric" : "unsymmetric";
  j["regularization"] = c.regularization;
  if (!c.sweep_axis.empty()) j["sweep"] = {{"axis", c.sweep_axis}, {"values", c.sweep_values}};
  return j;
}

struct ResultRecord {
  ExperimentConfig config;
  std::size_t dirichlet_knots = 0;
  std::size_t neumann_knots = 0;
  std::size_t interior_knots = 0;
  std::size_t sample_count = 0;
  double error_norm = 0.0;
  double max_error = 0.0;
  /// ||u_num - u_ex||_2 / ||u_ex||_2 over the samples, reported alongside.
  double l2_ratio = 0.0;
  double condition = 1.0;
  bool near_singular = false;
  int iterations = 0;
  double wall_time = 0.0;
};

inline json to_json(const ResultRecord& r, bool with_timing = false) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["config"] = to_json(r.config);
  j["knots"] = {{"dirichlet", r.dirichlet_knots}, {"neumann", r.neumann_knots}, {"interior", r.interior_knots}};
  j["sample_count"] = r.sample_count;
  j["error_norm"] = r.error_norm;
  j["max_error"] = r.max_error;
  j["l2_ratio"] = r.l2_ratio;
  j["condition"] = r.condition;
  j["near_singular"] = r.near_singular;
  j["iterations"] = r.iterations;
  if (with_timing) j["wall_time_s"] = r.wall_time;
  return j;
}

inline BkmProblem make_problem(const ExperimentConfig& c) {
  auto p = BkmProblem::manufactured(c.domain, c.variant, c.delta, manufactured::by_name(c.exact));
  p.formulation = c.formulation;
  p.regularization = c.regularization;
  return p;
}

inline geometry::KnotSet make_knots(const ExperimentConfig& c) {
  auto knots = geometry::place_boundary_knots(c.domain, c.boundary_knots);
  if (c.interior_knots > 0) knots.interior = geometry::sample_points(c.domain, c.interior_knots, c.seed);
  return knots;
}

inline ResultRecord run(const ExperimentConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const BkmProblem problem = make_problem(c);
  const auto knots = make_knots(c);
  const BkmSolution sol = c.mode == Mode::Simplified ? solve(assemble_simplified(problem, knots))
                                                     : solve_full(problem, knots, c.max_iter, c.tol);
  const auto samples = geometry::sample_points(c.domain, c.samples, c.seed, c.sampling);

  ResultRecord r;
  r.config = c;
  r.dirichlet_knots = knots.dirichlet.size();
  r.neumann_knots = knots.neumann.size();
  r.interior_knots = knots.interior.size();
  r.sample_count = samples.size();
  Vector num, ex;
  double diff2 = 0.0, ex2 = 0.0;
  for (const Vec3& x : samples) {
    num.push_back(evaluate(sol, x));
    ex.push_back((*problem.exact)(x));
    diff2 += (num.back() - ex.back()) * (num.back() - ex.back());
    ex2 += ex.back() * ex.back();
  }
  const ErrorStats stats = error_stats(num, ex);
  r.error_norm = stats.rms;
  r.max_error = stats.max;
  r.l2_ratio = ex2 > 0.0 ? std::sqrt(diff2 / ex2) : std::sqrt(diff2);
  r.condition = sol.condition;
  r.near_singular = sol.near_singular;
  r.iterations = sol.iterations;
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

// ---------------------------------------------------------------------------
// CSV helpers

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

inline std::string schema_line(const std::string& table) {
  return "# schema: bkm-" + table + " v" + std::to_string(kSchemaVersion) + "\n";
}

/// Knot set as CSV: index,x,y[,z],nx,ny[,nz],bc. Interior knots carry no normal.
inline std::string knots_csv(const geometry::KnotSet& knots, int dim) {
  std::ostringstream out;
  out << schema_line("knots");
  out << (dim == 2 ? "index,x,y,nx,ny,bc\n" : "index,x,y,z,nx,ny,nz,bc\n");
  auto point = [&](Vec3 p) {
    out << fmt(p.x) << ',' << fmt(p.y) << ',';
    if (dim == 3) out << fmt(p.z) << ',';
  };
  for (const auto& k : knots.boundary()) {
    out << k.index << ',';
    point(k.position);
    point(k.normal);
    out << (k.bc == geometry::BcKind::Dirichlet ? "dirichlet" : "neumann") << '\n';
  }
  int index = static_cast<int>(knots.boundary_count());
  for (const Vec3& p : knots.interior) {
    out << index++ << ',';
    point(p);
    out << (dim == 2 ? ",," : ",,,") << "interior\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepRow {
  double value = 0.0;
  std::optional<ResultRecord> record;
  std::string error;  // "<Kind>: message" when the row failed
  std::string flag;
};

inline std::vector<SweepRow> sweep(const ExperimentConfig& base, const std::string& axis,
                                   const std::vector<double>& values) {
  if (axis != "delta" && axis != "knots") throw detail::field_error("sweep.axis", "expected delta or knots");
  if (values.empty()) throw detail::field_error("sweep.values", "must be non-empty");
  std::vector<SweepRow> rows;
  for (double v : values) {
    SweepRow row;
    row.value = v;
    ExperimentConfig c = base;
    try {
      if (axis == "delta") {
        if (!(v > 0.0)) throw detail::field_error("sweep.values", "delta must be > 0");
        c.delta = v;
      } else {
        if (v < 1 || v != std::floor(v)) throw detail::field_error("sweep.values", "knot counts must be positive integers");
        c.boundary_knots = static_cast<int>(v);
      }
      row.record = run(c);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      row.error = e.kind() + ": " + e.what();
    }
    rows.push_back(std::move(row));
  }

  // Flags: ill-conditioned rows are marked; an error increase between two
  // well-conditioned rows is a genuine regression and marked as such.
  const SweepRow* prev = nullptr;
  for (auto& row : rows) {
    if (!row.record) {
      row.flag = "failed";
      continue;
    }
    const bool ill = row.record->condition > linalg::kNearSingularCondition;
    const bool worse = prev && row.record->error_norm > prev->record->error_norm;
    if (ill) row.flag = worse ? "degraded_ill_conditioned" : "ill_conditioned";
    else if (worse && axis == "knots") row.flag = "not_monotone";
    else row.flag = "ok";
    prev = &row;
  }
  return rows;
}

inline std::string sweep_csv(const std::string& axis, const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << schema_line("sweep");
  out << "axis,value,status,error_norm,max_error,l2_ratio,condition,iterations,flag,message\n";
  for (const auto& row : rows) {
    out << axis << ',' << fmt(row.value) << ',';
    if (row.record) {
      const auto& r = *row.record;
      out << "ok," << fmt(r.error_norm) << ',' << fmt(r.max_error) << ',' << fmt(r.l2_ratio) << ','
          << fmt(r.condition) << ',' << r.iterations << ',' << row.flag << ",\n";
    } else {
      out << "error,,,,,," << row.flag << ',' << csv_quote(row.error) << '\n';
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Built-in benchmark set (the `table1` subcommand)

inline std::vector<ExperimentConfig> table1_configs() {
  std::vector<ExperimentConfig> out;
  for (Variant v : {Variant::Helmholtz, Variant::ModifiedHelmholtz}) {
    ExperimentConfig c;
    c.name = v == Variant::Helmholtz ? "table1_2d_h" : "table1_2d_mh";
    c.domain = geometry::Ellipse{2.0, 1.0};
    c.variant = v;
    c.delta = 0.1;
    c.exact = "laplace_2d";
    c.boundary_knots = 9;
    c.samples = 492;
    out.push_back(c);
  }
  for (Variant v : {Variant::Helmholtz, Variant::ModifiedHelmholtz}) {
    ExperimentConfig c;
    c.name = v == Variant::Helmholtz ? "table1_3d_h" : "table1_3d_mh";
    c.domain = geometry::CubeWithEllipsoidCavity{1.0, 6};
    c.variant = v;
    c.delta = 0.2;
    c.exact = "laplace_3d";
    c.boundary_knots = 66;
    c.samples = 1000;
    // The 66-knot system has a condition number far beyond 1/eps.
    c.regularization = 1e-12;
    out.push_back(c);
  }
  return out;
}

inline std::string table1_csv(const std::vector<ExperimentConfig>& configs) {
  std::ostringstream out;
  out << schema_line("table1");
  out << "name,dim,variant,delta,boundary_knots,dirichlet,neumann,samples,status,error_norm,max_error,"
         "l2_ratio,condition,message\n";
  for (const auto& c : configs) {
    out << c.name << ',' << geometry::dimension(c.domain) << ',' << to_string(c.variant) << ','
        << fmt(c.delta) << ',' << c.boundary_knots << ',';
    try {
      const auto r = run(c);
      out << r.dirichlet_knots << ',' << r.neumann_knots << ',' << r.sample_count << ",ok,"
          << fmt(r.error_norm) << ',' << fmt(r.max_error) << ',' << fmt(r.l2_ratio) << ','
          << fmt(r.condition) << ",\n";
    } catch (const Error& e) {
      out << ",,," << "error,,,,," << csv_quote(e.kind() + ": " + e.what()) << '\n';
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Kernel residual table

inline constexpr double kResidualTolerance = 1e-6;

inline std::vector<double> default_radius_grid() { return {0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0}; }

inline std::vector<gensol::FamilyKind> all_families() {
  using gensol::FamilyKind;
  return {FamilyKind::Helmholtz, FamilyKind::ModifiedHelmholtz, FamilyKind::VibrationPlate,
          FamilyKind::WinklerPlate, FamilyKind::BurgerPlate};
}

/// Rows of kind pde_residual: |L{u_m}(r)| and its value scaled by
/// max(1, |u_m(r)|). For m = 0 the kernel solves the homogeneous equation and
/// the row is PASS when the scaled residual is <= 1e-6; higher orders are
/// only MEASURED (they solve L{u_m} ~ u_{m-1}). Rows of kind
/// order_lowering (Helmholtz-type families, m >= 1): ratio
/// L{u_m}(r) / u_{m-1}(r).
inline std::string gensol_residual_csv(const std::vector<gensol::FamilyKind>& families,
                                       const std::vector<int>& orders, const std::vector<double>& radii,
                                       double param = 1.0) {
  std::ostringstream out;
  out << schema_line("gensol-residual");
  out << "kind,family,dim,param,order,r,value,residual,scaled_residual,ratio,status\n";
  for (auto kind : families)
    for (int dim : {2, 3})
      for (int m : orders)
        for (double r : radii) {
          out << "pde_residual," << gensol::to_string(kind) << ',' << dim << ',' << fmt(param) << ',' << m
              << ',' << fmt(r) << ',';
          try {
            const gensol::Kernel k(gensol::OperatorFamily::make(kind, param, dim), m);
            const double v = k.eval(r);
            const double res = std::abs(gensol::apply_operator(k.family(), k, r));
            const double scaled = res / std::max(1.0, std::abs(v));
            const char* status = m > 0 ? "MEASURED" : scaled <= kResidualTolerance ? "PASS" : "FAIL";
            out << fmt(v) << ',' << fmt(res) << ',' << fmt(scaled) << ",," << status << '\n';
          } catch (const Error& e) {
            out << ",,,," << csv_quote("ERROR " + e.kind()) << '\n';
          }
        }
  for (auto kind : families) {
    if (kind != gensol::FamilyKind::Helmholtz && kind != gensol::FamilyKind::ModifiedHelmholtz) continue;
    for (int dim : {2, 3})
      for (int m : orders) {
        if (m < 1) continue;
        const auto fam = gensol::OperatorFamily::make(kind, param, dim);
        const gensol::Kernel hi(fam, m), lo(fam, m - 1);
        for (double r : radii) {
          const double lu = gensol::apply_operator(fam, hi, r);
          const double ratio = lu / lo.eval(r);
          out << "order_lowering," << gensol::to_string(kind) << ',' << dim << ',' << fmt(param) << ',' << m
              << ',' << fmt(r) << ',' << fmt(hi.eval(r)) << ",,," << fmt(ratio) << ",MEASURED\n";
        }
      }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Special-function value table

inline std::string specfun_csv(int max_twice_nu = 8, const std::vector<double>& xs = {0.5, 1.0, 2.0, 5.0, 10.0,
                                                                                       20.0}) {
  using specfun::Function;
  std::ostringstream out;
  out << schema_line("specfun-check");
  out << "function,twice_nu,x,value,d1,d2\n";
  const std::pair<Function, const char*> fns[] = {
      {Function::J, "J"}, {Function::I, "I"}, {Function::Ber, "ber"}, {Function::Bei, "bei"}};
  for (const auto& [f, label] : fns)
    for (int t = 0; t <= max_twice_nu; ++t)
      for (double x : xs) {
        const specfun::Order nu{t};
        double v = 0.0;
        switch (f) {
          case Function::J: v = specfun::bessel_j(nu, x); break;
          case Function::I: v = specfun::bessel_i(nu, x); break;
          case Function::Ber: v = specfun::kelvin_ber(nu, x); break;
          case Function::Bei: v = specfun::kelvin_bei(nu, x); break;
        }
        out << label << ',' << t << ',' << fmt(x) << ',' << fmt(v) << ','
            << fmt(specfun::derivative(f, nu, x, 1)) << ',' << fmt(specfun::derivative(f, nu, x, 2)) << '\n';
      }
  return out.str();
}

}  // namespace bkm::experiment
