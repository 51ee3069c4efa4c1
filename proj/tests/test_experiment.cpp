#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "bkm/experiment.hpp"

using namespace bkm;
using namespace bkm::experiment;
namespace fs = std::filesystem;

namespace {

const std::string kCli = BKM_CLI_PATH;
const fs::path kSource = BKM_SOURCE_DIR;

int run_cli(const std::string& args) {
  const int status = std::system((kCli + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir() {
  const fs::path d = fs::temp_directory_path() / ("bkm_test_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (char ch : line) {
      if (ch == '"') quoted = !quoted;
      else if (ch == ',' && !quoted) {
        cells.push_back(cell);
        cell.clear();
      } else cell += ch;
    }
    cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(Config, ParseMinimal) {
  const auto c = parse_config(json::parse(R"({"delta": 0.3, "knots": {"boundary": 12}})"));
  EXPECT_EQ(c.delta, 0.3);
  EXPECT_EQ(c.boundary_knots, 12);
  EXPECT_EQ(c.exact, "laplace_2d");
  EXPECT_EQ(c.mode, Mode::Simplified);
}

TEST(Config, RoundTrip) {
  for (const auto& c : table1_configs()) EXPECT_EQ(to_json(parse_config(to_json(c))), to_json(c)) << c.name;
}

TEST(Config, FieldErrors) {
  const std::pair<const char*, const char*> cases[] = {
      {R"({"delta": 0})", "delta"},
      {R"({"delta": -1})", "delta"},
      {R"({"deltaa": 1})", "deltaa"},
      {R"({"knots": {"boundary": 0}})", "knots.boundary"},
      {R"({"domain": {"shape": "torus"}})", "domain"},
      {R"({"variant": "poisson"})", "variant"},
      {R"({"mode": "full"})", "knots.interior"},
      {R"({"exact": "nope"})", "exact"},
      {R"({"samples": {"mode": "halton"}})", "samples.mode"},
  };
  for (const auto& [text, field] : cases) {
    try {
      parse_config(json::parse(text));
      ADD_FAILURE() << "accepted " << text;
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
    }
  }
}

TEST(Config, ShippedConfigsMatchBuiltIns) {
  for (const auto& c : table1_configs()) {
    const auto file = kSource / "configs" / (c.name + ".json");
    ASSERT_TRUE(fs::exists(file)) << file;
    EXPECT_EQ(to_json(load_config(file.string())), to_json(c)) << c.name;
  }
  for (const char* name : {"delta_sweep_2d.json", "full_2d.json"})
    EXPECT_NO_THROW(load_config((kSource / "configs" / name).string())) << name;
}

TEST(Run, RecordFields) {
  auto c = table1_configs()[0];
  const auto r = run(c);
  EXPECT_EQ(r.dirichlet_knots, 9u);
  EXPECT_EQ(r.sample_count, 492u);
  EXPECT_GT(r.error_norm, 0.0);
  const json j = to_json(r);
  EXPECT_EQ(j.at("schema_version"), kSchemaVersion);
  EXPECT_FALSE(j.contains("wall_time_s"));
  EXPECT_TRUE(to_json(r, true).contains("wall_time_s"));
}

TEST(Run, Determinism) {
  auto c = table1_configs()[1];
  c.sampling = geometry::SamplingMode::Random;
  c.seed = 99;
  EXPECT_EQ(to_json(run(c)).dump(), to_json(run(c)).dump());
}

TEST(Sweep, FourDeltaRows) {
  const auto base = table1_configs()[0];
  const auto rows = sweep(base, "delta", {0.05, 0.1, 0.2, 0.5});
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) EXPECT_TRUE(r.record.has_value()) << r.error;
  const auto table = parse_csv(sweep_csv("delta", rows));
  EXPECT_EQ(table.size(), 5u);  // header + 4
  EXPECT_THROW(sweep(base, "delta", {}), ConfigError);
  EXPECT_THROW(sweep(base, "colour", {1.0}), ConfigError);
}

TEST(Sweep, KnotAxis) {
  const auto rows = sweep(table1_configs()[0], "knots", {5, 9, 13});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1].record->dirichlet_knots, 9u);
}

TEST(Sweep, KnotConvergenceUntilIllConditioned) {
  const auto rows = sweep(table1_configs()[0], "knots", {5, 9, 17, 33});
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ASSERT_TRUE(rows[i].record) << rows[i].error;
    if (rows[i].record->condition <= linalg::kNearSingularCondition)
      EXPECT_LE(rows[i].record->error_norm, rows[i - 1].record->error_norm) << rows[i].value;
    else
      EXPECT_NE(rows[i].flag.find("ill_conditioned"), std::string::npos) << rows[i].value;
  }
}

TEST(Knots, CsvExport) {
  auto knots = geometry::place_boundary_knots(geometry::CubeWithEllipsoidCavity{}, 66);
  knots.interior = geometry::sample_points(geometry::CubeWithEllipsoidCavity{}, 4);
  const auto t = parse_csv(knots_csv(knots, 3));
  ASSERT_EQ(t.size(), 71u);
  EXPECT_EQ(t[0], (std::vector<std::string>{"index", "x", "y", "z", "nx", "ny", "nz", "bc"}));
  int neumann = 0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    ASSERT_EQ(t[i].size(), 8u);
    neumann += t[i][7] == "neumann";
    if (t[i][7] == "neumann") EXPECT_EQ(std::stod(t[i][1]), 0.0);
  }
  EXPECT_EQ(neumann, 10);
  EXPECT_EQ(t.back()[7], "interior");
  const auto t2 = parse_csv(knots_csv(geometry::place_boundary_knots(geometry::Ellipse{2, 1}, 4), 2));
  ASSERT_EQ(t2.size(), 5u);
  EXPECT_EQ(std::stod(t2[1][1]), 2.0);
  EXPECT_EQ(t2[1][5], "dirichlet");
}

TEST(Cli, ExitCodes) {
  const fs::path dir = temp_dir();
  EXPECT_EQ(run_cli("run --config " + (kSource / "configs" / "table1_2d_h.json").string() + " --knots-out " +
                    (dir / "k.csv").string()),
            0);
  EXPECT_EQ(parse_csv(slurp(dir / "k.csv")).size(), 10u);
  EXPECT_EQ(run_cli("run --config /nonexistent.json"), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  {
    std::ofstream(dir / "bad.json") << R"({"delta": -0.5})";
  }
  EXPECT_EQ(run_cli("run --config " + (dir / "bad.json").string()), 2);
  const std::string sweep_cfg = (kSource / "configs" / "delta_sweep_2d.json").string();
  EXPECT_EQ(run_cli("sweep --config " + sweep_cfg), 0);
  EXPECT_EQ(run_cli("sweep --config " + sweep_cfg + " --axis colour"), 2);
  {
    std::ofstream(dir / "empty_sweep.json") << R"({"sweep": {"axis": "delta", "values": []}})";
  }
  EXPECT_EQ(run_cli("sweep --config " + (dir / "empty_sweep.json").string()), 2);
  // Solver failures (here a full iteration that cannot converge) exit with 3.
  {
    std::ofstream(dir / "nonconv.json")
        << R"({"mode": "full", "knots": {"boundary": 9, "interior": 5}, "iteration": {"max_iter": 1, "tol": 1e-15}})";
  }
  EXPECT_EQ(run_cli("run --config " + (dir / "nonconv.json").string()), 3);
  fs::remove_all(dir);
}

TEST(Cli, ByteIdenticalOutputs) {
  const fs::path dir = temp_dir();
  const std::string cfg = (kSource / "configs" / "table1_3d_mh.json").string();
  ASSERT_EQ(run_cli("run --config " + cfg + " --out " + (dir / "a.json").string()), 0);
  ASSERT_EQ(run_cli("run --config " + cfg + " --out " + (dir / "b.json").string()), 0);
  EXPECT_EQ(slurp(dir / "a.json"), slurp(dir / "b.json"));
  ASSERT_EQ(run_cli("table1 --out " + (dir / "t1.csv").string()), 0);
  ASSERT_EQ(run_cli("table1 --out " + (dir / "t2.csv").string()), 0);
  EXPECT_EQ(slurp(dir / "t1.csv"), slurp(dir / "t2.csv"));
  const auto t = parse_csv(slurp(dir / "t1.csv"));
  ASSERT_EQ(t.size(), 5u);
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_EQ(t[i][8], "ok") << t[i][0];
  fs::remove_all(dir);
}

TEST(Golden, GensolResidualTable) {
  const auto golden = parse_csv(slurp(kSource / "tests" / "golden" / "gensol_residual.csv"));
  const auto fresh = parse_csv(gensol_residual_csv(all_families(), {0, 1, 2}, default_radius_grid()));
  ASSERT_EQ(golden.size(), fresh.size());
  ASSERT_GT(golden.size(), 1u);
  EXPECT_EQ(golden[0], fresh[0]);
  for (std::size_t i = 1; i < golden.size(); ++i) {
    ASSERT_EQ(golden[i].size(), fresh[i].size()) << "row " << i;
    for (std::size_t k = 0; k < golden[i].size(); ++k) {
      const std::string& g = golden[i][k];
      const std::string& f = fresh[i][k];
      const std::string& col = golden[0][k];
      if (col == "residual" || col == "scaled_residual") {
        // Residuals are rounding-level noise; only their size is stable.
        if (!g.empty()) EXPECT_LE(std::stod(f), std::max(10 * std::stod(g), 1e-12)) << "row " << i;
      } else if (col == "value" || col == "ratio") {
        if (g.empty()) EXPECT_TRUE(f.empty());
        else EXPECT_NEAR(std::stod(f), std::stod(g), 1e-12 * std::max(1.0, std::abs(std::stod(g)))) << "row " << i;
      } else {
        EXPECT_EQ(f, g) << "row " << i << " column " << col;
      }
    }
  }
  // Order-lowering constants recorded in the golden file are all 1.
  for (std::size_t i = 1; i < golden.size(); ++i)
    if (golden[i][0] == "order_lowering") EXPECT_NEAR(std::stod(golden[i][9]), 1.0, 1e-8) << "row " << i;
}

TEST(Golden, SpecfunTable) {
  const auto t = parse_csv(specfun_csv());
  ASSERT_GT(t.size(), 1u);
  EXPECT_EQ(parse_csv(specfun_csv()), t);
}
