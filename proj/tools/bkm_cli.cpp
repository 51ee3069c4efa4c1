// bkm: batch runner for boundary knot method experiments.
//
// Exit codes: 0 success, 2 configuration error, 3 solver error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bkm/experiment.hpp"

namespace {

namespace ex = bkm::experiment;

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw bkm::ConfigError("cannot open output file '" + out + "'");
  f << text;
}

std::vector<int> parse_ints(const std::vector<std::string>& items, const std::string& field) {
  std::vector<int> out;
  for (const auto& s : items) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stoi(s, &pos));
      if (pos != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw bkm::ConfigError("option '" + field + "': not an integer: " + s);
    }
  }
  return out;
}

bkm::gensol::FamilyKind parse_family(const std::string& s) {
  for (auto k : ex::all_families())
    if (bkm::gensol::to_string(k) == s) return k;
  throw bkm::ConfigError("option '--families': unknown family " + s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boundary knot method experiments"};
  app.require_subcommand(1);

  std::string config_path, out_path, mode, axis, knots_path;
  std::uint64_t seed = 0;
  bool timing = false;
  std::vector<double> values;
  std::vector<std::string> families, orders;
  std::vector<double> radii;
  double param = 1.0;
  int max_twice_nu = 8;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", config_path, "JSON experiment config");
    if (needs_config) opt->required();
    sub->add_option("--out", out_path, "output file (default: stdout)");
    sub->add_option("--mode", mode, "simplified or full (overrides the config)");
    sub->add_option("--seed", seed, "sample/interior seed (overrides the config)");
  };

  auto* run = app.add_subcommand("run", "solve one configured problem, print a JSON record");
  add_common(run, true);
  run->add_flag("--timing", timing, "include wall time in the record");
  run->add_option("--knots-out", knots_path, "also write the knot set as CSV");

  auto* sweep = app.add_subcommand("sweep", "rerun a config over delta or knot counts, print CSV");
  add_common(sweep, true);
  sweep->add_option("--axis", axis, "delta or knots (overrides the config)");
  sweep->add_option("--values", values, "sweep values (overrides the config)")->delimiter(',');

  auto* table1 = app.add_subcommand("table1", "run the 2D/3D Laplace benchmark set, print CSV");
  add_common(table1, false);

  auto* residual = app.add_subcommand("gensol-residual", "kernel PDE residual table (CSV)");
  residual->add_option("--out", out_path, "output file (default: stdout)");
  residual->add_option("--families", families, "subset of families")->delimiter(',');
  residual->add_option("--orders", orders, "kernel orders (default 0,1,2)")->delimiter(',');
  residual->add_option("--radii", radii, "radius grid")->delimiter(',');
  residual->add_option("--param", param, "operator parameter");

  auto* sf = app.add_subcommand("specfun-check", "special function value table (CSV)");
  sf->add_option("--out", out_path, "output file (default: stdout)");
  sf->add_option("--max-twice-nu", max_twice_nu, "largest 2*nu in the table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return e.get_exit_code() == 0 ? code : kExitConfig;
  }

  const bool seed_given = [&] {
    for (auto* sub : {run, sweep, table1})
      if (sub->parsed() && sub->count("--seed")) return true;
    return false;
  }();

  try {
    auto configure = [&](ex::ExperimentConfig c) {
      if (!mode.empty()) c.mode = ex::parse_mode(mode, "--mode");
      if (seed_given) c.seed = seed;
      if (c.mode == bkm::Mode::Full && c.interior_knots < 1)
        throw bkm::ConfigError("config field 'knots.interior': full mode needs at least one interior knot");
      return c;
    };

    if (run->parsed()) {
      const auto c = configure(ex::load_config(config_path));
      const auto r = ex::run(c);
      std::cerr << "wall time: " << r.wall_time << " s\n";
      emit(ex::to_json(r, timing).dump(2) + "\n", out_path.empty() ? c.output : out_path);
      if (!knots_path.empty())
        emit(ex::knots_csv(ex::make_knots(c), bkm::geometry::dimension(c.domain)), knots_path);
    } else if (sweep->parsed()) {
      auto c = configure(ex::load_config(config_path));
      const std::string ax = axis.empty() ? c.sweep_axis : axis;
      const auto vals = sweep->count("--values") ? values : c.sweep_values;
      emit(ex::sweep_csv(ax, ex::sweep(c, ax, vals)), out_path.empty() ? c.output : out_path);
    } else if (table1->parsed()) {
      std::vector<ex::ExperimentConfig> configs;
      if (config_path.empty()) {
        for (const auto& c : ex::table1_configs()) configs.push_back(configure(c));
      } else {
        configs.push_back(configure(ex::load_config(config_path)));
      }
      emit(ex::table1_csv(configs), out_path);
    } else if (residual->parsed()) {
      std::vector<bkm::gensol::FamilyKind> fams;
      for (const auto& f : families) fams.push_back(parse_family(f));
      if (fams.empty()) fams = ex::all_families();
      auto ords = parse_ints(orders, "--orders");
      if (ords.empty()) ords = {0, 1, 2};
      for (int m : ords)
        if (m < 0 || m > bkm::gensol::kMaxKernelOrder) throw bkm::ConfigError("option '--orders': out of range");
      if (radii.empty()) radii = ex::default_radius_grid();
      for (double r : radii)
        if (!(r > 0.0)) throw bkm::ConfigError("option '--radii': radii must be > 0");
      if (!(param > 0.0)) throw bkm::ConfigError("option '--param': must be > 0");
      emit(ex::gensol_residual_csv(fams, ords, radii, param), out_path);
    } else if (sf->parsed()) {
      if (max_twice_nu < 0 || max_twice_nu > bkm::specfun::kMaxTwiceNu)
        throw bkm::ConfigError("option '--max-twice-nu': out of range");
      emit(ex::specfun_csv(max_twice_nu), out_path);
    }
  } catch (const bkm::ConfigError& e) {
    std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const bkm::Error& e) {
    std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
    return kExitSolver;
  }
  return 0;
}
