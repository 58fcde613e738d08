#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "clr/config.hpp"
#include "clr/experiments.hpp"
#include "clr/svg.hpp"
#include "clr/variations.hpp"
#include "support.hpp"

using namespace clr;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("clr_unit_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("line fit and grids") {
  const LinearFit f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(f.intercept == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-14));
  const auto g = linspace(0.02, 0.5, 13);
  CHECK(g.size() == 13);
  CHECK(g.front() == 0.02);
  CHECK(g.back() == 0.5);
}

TEST_CASE("evenly spaced locations") {
  const LatentConfiguration z = roots_of_unity(5, 3);
  CHECK(z.size() == 15);
  CHECK(group_locations(z.points, 1e-12).size() == 15);
  CHECK(stationarity_check(z, SimilarityConfig{}).stationary);
}

TEST_CASE("cluster sweep") {
  const SweepResult r = sweep_clusters(1, 64, {0.05, 0.1});
  REQUIRE(r.series.size() == 2);
  for (const auto& s : r.series) {
    CHECK(s.loss.front() == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    for (std::size_t i = 1; i < s.loss.size(); ++i) CHECK(s.loss[i] <= s.loss[i - 1] + 1e-12);
    CHECK(s.monotone);
    CHECK(s.threshold.has_value());
  }
  const auto& fine = r.series[0].loss;
  CHECK(fine[31] - fine[63] < 0.01 * (fine[0] - fine[63]));
}

TEST_CASE("arc configurations") {
  const Eigen::MatrixXd z = arc_configuration(5, 0.3);
  double best = 1e9;
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) best = std::min(best, (z.col(i) - z.col(j)).squaredNorm());
  CHECK(best == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(max_feasible_sq_distance(2) == doctest::Approx(4.0));
  CHECK(max_feasible_sq_distance(4) == doctest::Approx(2.0));
  CHECK_THROWS_AS(arc_configuration(4, 2.5), std::invalid_argument);
}

TEST_CASE("distance sweep") {
  const auto grid = linspace(0.0, max_feasible_sq_distance(8), 21);
  const SweepResult r = sweep_min_distance(8, grid, {0.1});
  const auto& s = r.series[0];
  CHECK(s.loss.front() == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(s.monotone);

  const auto t1 = min_distance_threshold(2, 0.05);
  const auto t2 = min_distance_threshold(2, 0.1);
  const auto t4 = min_distance_threshold(2, 0.2);
  REQUIRE(t1);
  REQUIRE(t2);
  REQUIRE(t4);
  CHECK(*t1 < *t2);
  CHECK(*t2 < *t4);
  CHECK(*t2 / *t1 == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("threshold is linear in tau") {
  const SweepResult r = sweep_tau_threshold(linspace(0.02, 0.5, 13));
  REQUIRE(r.fit);
  CHECK(r.fit->r2 >= 0.95);
  const auto& thr = r.series[0].loss;
  const double top = *std::max_element(thr.begin(), thr.end());
  CHECK(std::abs(r.fit->intercept) <= 0.2 * top);
}

TEST_CASE("svg markers and determinism") {
  PlotSpec p;
  p.title = "loss";
  p.x_label = "K";
  p.y_label = "L";
  PlotSeries s;
  s.label = "a & b";
  for (int i = 0; i < 10; ++i) {
    s.x.push_back(i);
    s.y.push_back(std::sqrt(i));
  }
  p.series.push_back(s);
  const std::string svg = render_svg(p);
  CHECK(count_markers(svg) == 10);
  CHECK(render_svg(p) == svg);
  CHECK(svg.find("a &amp; b") != std::string::npos);

  p.series[0].y[3] = std::nan("");
  CHECK(count_markers(render_svg(p)) == 9);

  PlotSpec empty;
  CHECK_THROWS_AS(render_svg(empty), std::invalid_argument);
}

TEST_CASE("emit plots writes everything or nothing") {
  const fs::path dir = scratch("plots");
  Figure good{"good", {"t", "x", "y", {{"s", {1, 2, 3}, {3, 2, 1}}}}};
  Figure bad{"bad", {"t", "x", "y", {}}};
  CHECK_THROWS(emit_plots({good, bad}, dir, OutputFormat::Both));
  CHECK_FALSE(fs::exists(dir / "good.svg"));
  const auto files = emit_plots({good}, dir, OutputFormat::Both);
  CHECK(files.size() == 2);
  CHECK(count_markers(slurp(dir / "good.svg")) == 3);
  CHECK(slurp(dir / "good.csv").rfind("series,x,y\n", 0) == 0);
  const std::string first = slurp(dir / "good.svg");
  emit_plots({good}, dir, OutputFormat::Svg);
  CHECK(slurp(dir / "good.svg") == first);
  fs::remove_all(dir);
}

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("config parsing") {
  const nlohmann::json j = {{"schema_version", 1},
                            {"experiment", "sweep-clusters"},
                            {"seed", 5},
                            {"similarity", {{"tau", 0.2}, {"psi", "log1p_half"}}},
                            {"sweep", {{"k_max", 12}, {"taus", {0.1}}}},
                            {"compare", {{"weight_std", nullptr}, {"repeats", 3}}}};
  const ExperimentConfig c = parse_config(j);
  CHECK(c.seed == 5);
  CHECK(c.tau == 0.2);
  CHECK(c.psi == PsiKind::Log1pHalf);
  CHECK(c.sweep.k_max == 12);
  CHECK(c.repeats == 3);
  CHECK_FALSE(c.compare.weight_std.has_value());

  const ExperimentConfig again = parse_config(to_json(c));
  CHECK(to_json(again) == to_json(c));

  nlohmann::json extra = j;
  extra["sweep"]["kmax"] = 3;
  CHECK_THROWS_WITH_AS(parse_config(extra), "sweep: unknown key 'kmax'", std::invalid_argument);
  nlohmann::json top = j;
  top["colour"] = "red";
  CHECK_THROWS_AS(parse_config(top), std::invalid_argument);
  nlohmann::json old = j;
  old["schema_version"] = 0;
  CHECK_THROWS_AS(parse_config(old), std::invalid_argument);
  nlohmann::json wrong = j;
  wrong["sweep"]["k_max"] = "many";
  CHECK_THROWS_AS(parse_config(wrong), std::invalid_argument);
}

TEST_CASE("runs write a manifest") {
  ExperimentConfig c;
  c.experiment = "sweep-clusters";
  c.output_dir = scratch("run");
  c.sweep.k_max = 16;
  c.sweep.taus = {0.1};
  c.sweep.plateau_fraction = 0.05;
  const RunReport r = run_experiment(c);
  CHECK(r.passed());
  const nlohmann::json m = nlohmann::json::parse(slurp(c.output_dir / "manifest.json"));
  CHECK(m.at("experiment") == "sweep-clusters");
  CHECK(m.at("config_hash") == fnv1a_hex(m.at("config").dump()));
  CHECK(parse_config(m.at("config")).sweep.k_max == 16);
  CHECK(m.at("versions").contains("eigen"));
  CHECK(count_markers(slurp(c.output_dir / "sweep-clusters.svg")) == 16);
  fs::remove_all(c.output_dir);

  c.experiment = "nope";
  CHECK_THROWS_AS(run_experiment(c), std::invalid_argument);
}

TEST_CASE("latent csv uses the last step") {
  const fs::path dir = scratch("latent");
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "z.csv");
    out << "step,point,z_0,z_1\n0,0,1,0\n0,1,0,1\n5,0,1,0\n5,1,-1,0\n";
  }
  const LatentConfiguration z = read_latent_csv(dir / "z.csv");
  REQUIRE(z.size() == 2);
  CHECK(z.points(0, 1) == -1.0);

  ExperimentConfig c;
  c.experiment = "check-stationarity";
  c.stationarity.input = dir / "z.csv";
  c.output_dir = dir / "out";
  const RunReport r = run_experiment(c);
  CHECK(r.passed());
  const nlohmann::json j = nlohmann::json::parse(slurp(dir / "out" / "stationarity.json"));
  CHECK(j.at("stationary") == true);
  CHECK(j.contains("lambda_spread"));
  CHECK(j.at("max_tangential_norm").get<double>() <= 1e-8);
  fs::remove_all(dir);
}
