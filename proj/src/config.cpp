#include "clr/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <stdexcept>

#include "clr/io.hpp"
#include "clr/variations.hpp"

namespace clr {

using nlohmann::json;

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw std::invalid_argument(where + ": expected an object");
  for (const auto& item : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; });
    if (!known) throw std::invalid_argument(where + ": unknown key '" + item.key() + "'");
  }
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(where + "." + key + ": " + e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  check_keys(j, {"schema_version", "experiment", "seed", "output_dir", "format", "similarity", "sweep", "compare",
                 "kernel", "gradients", "stationarity"},
             "config");
  ExperimentConfig c;
  read(j, "schema_version", c.schema_version, "config");
  if (c.schema_version != kConfigSchemaVersion)
    throw std::invalid_argument("config: unsupported schema_version " + std::to_string(c.schema_version));
  if (!j.contains("experiment")) throw std::invalid_argument("config: missing 'experiment'");
  read(j, "experiment", c.experiment, "config");
  read(j, "seed", c.seed, "config");
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("format")) c.format = parse_output_format(j.at("format").get<std::string>());

  if (j.contains("similarity")) {
    const auto& o = j.at("similarity");
    check_keys(o, {"tau", "psi"}, "similarity");
    read(o, "tau", c.tau, "similarity");
    if (o.contains("psi")) c.psi = parse_psi(o.at("psi").get<std::string>());
  }
  if (j.contains("sweep")) {
    const auto& o = j.at("sweep");
    check_keys(o, {"k_min", "k_max", "points_per_location", "clusters", "distance_points", "taus", "tau_grid",
                   "plateau_fraction", "knee_fraction", "min_r2"},
               "sweep");
    auto& w = c.sweep;
    read(o, "k_min", w.k_min, "sweep");
    read(o, "k_max", w.k_max, "sweep");
    read(o, "points_per_location", w.points_per_location, "sweep");
    read(o, "clusters", w.clusters, "sweep");
    read(o, "distance_points", w.distance_points, "sweep");
    read(o, "taus", w.taus, "sweep");
    read(o, "tau_grid", w.tau_grid, "sweep");
    read(o, "plateau_fraction", w.plateau_fraction, "sweep");
    read(o, "knee_fraction", w.knee_fraction, "sweep");
    read(o, "min_r2", w.min_r2, "sweep");
  }
  if (j.contains("compare")) {
    const auto& o = j.at("compare");
    check_keys(o, {"n", "ambient_dim", "latent_dim", "centers_x", "noise_bound", "width", "activation", "weight_std",
                   "invariant_init", "tau", "psi", "kernel_step", "kernel_steps", "vanilla_step", "vanilla_steps",
                   "record_stride", "coherence_target", "uniformity_target", "stationarity_tol", "repeats",
                   "required_fraction"},
               "compare");
    auto& p = c.compare;
    read(o, "n", p.n, "compare");
    read(o, "ambient_dim", p.ambient_dim, "compare");
    read(o, "latent_dim", p.latent_dim, "compare");
    read(o, "centers_x", p.centers_x, "compare");
    read(o, "noise_bound", p.noise_bound, "compare");
    read(o, "width", p.width, "compare");
    if (o.contains("activation")) p.activation = parse_activation(o.at("activation").get<std::string>());
    if (o.contains("weight_std")) {
      if (o.at("weight_std").is_null()) p.weight_std.reset();
      else p.weight_std = o.at("weight_std").get<double>();
    }
    read(o, "invariant_init", p.invariant_init, "compare");
    read(o, "tau", p.tau, "compare");
    if (o.contains("psi")) p.psi = parse_psi(o.at("psi").get<std::string>());
    read(o, "kernel_step", p.kernel_step, "compare");
    read(o, "kernel_steps", p.kernel_steps, "compare");
    read(o, "vanilla_step", p.vanilla_step, "compare");
    read(o, "vanilla_steps", p.vanilla_steps, "compare");
    read(o, "record_stride", p.record_stride, "compare");
    read(o, "coherence_target", p.coherence_target, "compare");
    read(o, "uniformity_target", p.uniformity_target, "compare");
    read(o, "stationarity_tol", p.stationarity_tol, "compare");
    read(o, "repeats", c.repeats, "compare");
    read(o, "required_fraction", c.required_fraction, "compare");
  }
  if (j.contains("kernel")) {
    const auto& o = j.at("kernel");
    check_keys(o, {"widths", "angles", "seeds", "output_dim", "ratio_min", "ratio_max"}, "kernel");
    read(o, "widths", c.kernel.widths, "kernel");
    read(o, "angles", c.kernel.angles, "kernel");
    read(o, "seeds", c.kernel.seeds, "kernel");
    read(o, "output_dim", c.kernel.output_dim, "kernel");
    read(o, "ratio_min", c.kernel.ratio_min, "kernel");
    read(o, "ratio_max", c.kernel.ratio_max, "kernel");
  }
  if (j.contains("gradients")) {
    const auto& o = j.at("gradients");
    check_keys(o, {"instances", "fd_step", "tolerance"}, "gradients");
    read(o, "instances", c.gradients.instances, "gradients");
    read(o, "fd_step", c.gradients.fd_step, "gradients");
    read(o, "tolerance", c.gradients.tolerance, "gradients");
  }
  if (j.contains("stationarity")) {
    const auto& o = j.at("stationarity");
    check_keys(o, {"input", "tolerance"}, "stationarity");
    if (o.contains("input")) c.stationarity.input = o.at("input").get<std::string>();
    read(o, "tolerance", c.stationarity.tolerance, "stationarity");
  }
  c.compare.seed = c.seed;
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  const auto& p = c.compare;
  json compare = {{"n", p.n},
                  {"ambient_dim", p.ambient_dim},
                  {"latent_dim", p.latent_dim},
                  {"centers_x", p.centers_x},
                  {"noise_bound", p.noise_bound},
                  {"width", p.width},
                  {"activation", std::string(to_string(p.activation))},
                  {"invariant_init", p.invariant_init},
                  {"tau", p.tau},
                  {"psi", std::string(to_string(p.psi))},
                  {"kernel_step", p.kernel_step},
                  {"kernel_steps", p.kernel_steps},
                  {"vanilla_step", p.vanilla_step},
                  {"vanilla_steps", p.vanilla_steps},
                  {"record_stride", p.record_stride},
                  {"coherence_target", p.coherence_target},
                  {"uniformity_target", p.uniformity_target},
                  {"stationarity_tol", p.stationarity_tol},
                  {"repeats", c.repeats},
                  {"required_fraction", c.required_fraction}};
  compare["weight_std"] = p.weight_std ? json(*p.weight_std) : json(nullptr);
  const auto& w = c.sweep;
  return {{"schema_version", c.schema_version},
          {"experiment", c.experiment},
          {"seed", c.seed},
          {"output_dir", c.output_dir.string()},
          {"format", std::string(to_string(c.format))},
          {"similarity", {{"tau", c.tau}, {"psi", std::string(to_string(c.psi))}}},
          {"sweep",
           {{"k_min", w.k_min},
            {"k_max", w.k_max},
            {"points_per_location", w.points_per_location},
            {"clusters", w.clusters},
            {"distance_points", w.distance_points},
            {"taus", w.taus},
            {"tau_grid", w.tau_grid},
            {"plateau_fraction", w.plateau_fraction},
            {"knee_fraction", w.knee_fraction},
            {"min_r2", w.min_r2}}},
          {"compare", compare},
          {"kernel",
           {{"widths", c.kernel.widths},
            {"angles", c.kernel.angles},
            {"seeds", c.kernel.seeds},
            {"output_dim", c.kernel.output_dim},
            {"ratio_min", c.kernel.ratio_min},
            {"ratio_max", c.kernel.ratio_max}}},
          {"gradients",
           {{"instances", c.gradients.instances},
            {"fd_step", c.gradients.fd_step},
            {"tolerance", c.gradients.tolerance}}},
          {"stationarity",
           {{"input", c.stationarity.input.string()}, {"tolerance", c.stationarity.tolerance}}}};
}

bool RunReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

namespace {

std::string fmt(double v) { return io::format_double(v); }

json sweep_json(const SweepResult& r) {
  json series = json::array();
  for (const auto& s : r.series) {
    json e = {{"tau", s.tau}, {"axis", s.axis}, {"loss", s.loss}, {"monotone", s.monotone}};
    e["threshold"] = s.threshold ? json(*s.threshold) : json(nullptr);
    series.push_back(e);
  }
  json out = {{"name", r.name}, {"series", series}};
  if (r.fit) out["fit"] = {{"slope", r.fit->slope}, {"intercept", r.fit->intercept}, {"r2", r.fit->r2}};
  return out;
}

void add_sweep_checks(RunReport& rep, const SweepResult& r, const char* what) {
  for (const auto& s : r.series) {
    const std::string tag = " (tau=" + fmt(s.tau) + ")";
    rep.checks.push_back({"non-increasing" + tag, s.monotone, ""});
    rep.checks.push_back({std::string(what) + " detected" + tag, s.threshold.has_value(),
                          s.threshold ? "at " + fmt(*s.threshold) : "none"});
  }
}

std::vector<double> default_tau_grid(const SweepSettings& w) {
  return w.tau_grid.empty() ? linspace(0.02, 0.5, 13) : w.tau_grid;
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& c) {
  RunReport rep;
  const auto& dir = c.output_dir;
  const std::string& e = c.experiment;

  if (e == "sweep-clusters") {
    const SweepResult r =
        sweep_clusters(c.sweep.k_min, c.sweep.k_max, c.sweep.taus, c.sweep.points_per_location, c.psi,
                       c.sweep.plateau_fraction);
    add_sweep_checks(rep, r, "plateau");
    rep.results = sweep_json(r);
    rep.files = emit_plots({figure_from_sweep(r)}, dir, c.format);
  } else if (e == "sweep-distance") {
    const int K = c.sweep.clusters;
    const SweepResult r = sweep_min_distance(K, linspace(0.0, max_feasible_sq_distance(K), c.sweep.distance_points),
                                             c.sweep.taus, c.sweep.knee_fraction, c.psi);
    add_sweep_checks(rep, r, "threshold");
    rep.results = sweep_json(r);
    rep.files = emit_plots({figure_from_sweep(r)}, dir, c.format);
  } else if (e == "sweep-tau") {
    const auto grid = default_tau_grid(c.sweep);
    const SweepResult r = sweep_tau_threshold(grid, c.sweep.clusters, c.sweep.knee_fraction, c.psi);
    const auto& s = r.series.front();
    rep.checks.push_back({"threshold found for every tau", s.axis.size() == grid.size(),
                          std::to_string(s.axis.size()) + " of " + std::to_string(grid.size())});
    rep.checks.push_back({"threshold increases with tau", s.monotone, ""});
    rep.checks.push_back({"linear fit R^2 >= " + fmt(c.sweep.min_r2), r.fit && r.fit->r2 >= c.sweep.min_r2,
                          r.fit ? "R^2 = " + fmt(r.fit->r2) : "no fit"});
    rep.results = sweep_json(r);
    rep.files = emit_plots({figure_from_sweep(r)}, dir, c.format);
  } else if (e == "compare-dynamics") {
    if (c.repeats < 1) throw std::invalid_argument("compare: repeats must be >= 1");
    int kernel_ok = 0, vanilla_ok = 0, vanilla_stat = 0, contrast = 0;
    json runs = json::array();
    for (int r = 0; r < c.repeats; ++r) {
      CompareConfig cc = c.compare;
      cc.seed = c.seed + static_cast<std::uint64_t>(r);
      const CompareResult res = compare_dynamics(cc);
      kernel_ok += res.final_coherence >= cc.coherence_target;
      vanilla_ok += res.vanilla_reached();
      vanilla_stat += res.vanilla_final_tangential <= cc.stationarity_tol;
      contrast += res.vanilla_final_coherence < res.final_coherence;
      runs.push_back({{"seed", cc.seed},
                      {"initial_coherence", res.initial_coherence},
                      {"best_coherence", res.best_coherence},
                      {"vanilla_final_coherence", res.vanilla_final_coherence},
                      {"final_coherence", res.final_coherence},
                      {"coherence_step", res.coherence_step},
                      {"best_uniformity", res.best_uniformity},
                      {"final_uniformity", res.final_uniformity},
                      {"uniformity_step", res.uniformity_step},
                      {"kernel_final_tangential", res.kernel_final_tangential},
                      {"vanilla_final_tangential", res.vanilla_final_tangential}});
      if (r == 0) {
        rep.files = emit_plots(figures_from_compare(res), dir, c.format);
        if (c.format != OutputFormat::Svg) {
          write_trajectory_csv(dir / "kernel_trajectory.csv", res.kernel_path);
          write_trajectory_csv(dir / "vanilla_trajectory.csv", res.vanilla_path);
          write_states_csv(dir / "kernel_states.csv", res.kernel_path);
          write_states_csv(dir / "vanilla_states.csv", res.vanilla_path);
          write_dataset_csv(dir / "dataset.csv", res.data);
          for (const char* f : {"kernel_trajectory.csv", "vanilla_trajectory.csv", "kernel_states.csv",
                                "vanilla_states.csv", "dataset.csv"})
            rep.files.push_back(dir / f);
        }
      }
    }
    const double need = c.required_fraction * c.repeats;
    const auto frac = [&](int k) { return std::to_string(k) + " of " + std::to_string(c.repeats); };
    rep.checks.push_back({"network path ends with coherence >= " + fmt(c.compare.coherence_target), kernel_ok >= need, frac(kernel_ok)});
    rep.checks.push_back({"vanilla path reaches uniformity <= " + fmt(c.compare.uniformity_target), vanilla_ok >= need, frac(vanilla_ok)});
    rep.checks.push_back({"vanilla path ends stationary (tangential <= " + fmt(c.compare.stationarity_tol) + ")",
                          vanilla_stat >= need, frac(vanilla_stat)});
    rep.checks.push_back({"vanilla path ends less coherent than network path", contrast >= need, frac(contrast)});
    rep.results = {{"runs", runs}};
  } else if (e == "kernel-converge") {
    std::vector<double> angles = c.kernel.angles;
    if (angles.empty()) angles = {0.0, std::numbers::pi / 4, std::numbers::pi / 2};
    const KernelConvergence k = kernel_convergence(c.kernel.widths, angles, c.kernel.seeds, c.kernel.output_dim, c.seed);
    rep.checks.push_back({"error ratio 256/4096 in [" + fmt(c.kernel.ratio_min) + ", " + fmt(c.kernel.ratio_max) + "]",
                          k.error_ratio >= c.kernel.ratio_min && k.error_ratio <= c.kernel.ratio_max,
                          "ratio = " + fmt(k.error_ratio)});
    const double zmax = *std::max_element(k.max_z_score.begin(), k.max_z_score.end());
    rep.checks.push_back({"mean entries within 5 standard errors of the limit", zmax <= 5.0, "max z = " + fmt(zmax)});
    rep.results = {{"widths", k.widths}, {"angles", k.angles}, {"rms_error", k.rms_error},
                   {"max_z_score", k.max_z_score}, {"error_ratio", k.error_ratio}};
    Figure f;
    f.stem = "kernel-converge";
    f.plot = {"finite-width kernel error", "width M", "RMS error", {}};
    PlotSeries s{"relu", {}, k.rms_error};
    for (int w : k.widths) s.x.push_back(w);
    f.plot.series.push_back(s);
    rep.files = emit_plots({f}, dir, c.format);
  } else if (e == "check-gradients") {
    const GradientCheck g = check_gradients(c.gradients.instances, c.seed, c.gradients.fd_step);
    rep.checks.push_back({"gradient matches finite differences", g.max_gradient_error <= c.gradients.tolerance,
                          "max rel err = " + fmt(g.max_gradient_error)});
    rep.checks.push_back({"first-variation pairing matches finite differences",
                          g.max_pairing_error <= c.gradients.tolerance, "max rel err = " + fmt(g.max_pairing_error)});
    rep.results = {{"instances", g.instances},
                   {"max_gradient_error", g.max_gradient_error},
                   {"max_pairing_error", g.max_pairing_error}};
  } else if (e == "check-stationarity") {
    if (c.stationarity.input.empty()) throw std::invalid_argument("check-stationarity: no input file");
    const LatentConfiguration z = read_latent_csv(c.stationarity.input);
    z.validate(Constraint::Sphere);
    SimilarityConfig cfg;
    cfg.tau = c.tau;
    cfg.psi = c.psi;
    cfg.validate();
    const StationarityResult s = stationarity_check(z, cfg, c.stationarity.tolerance);
    rep.checks.push_back({"stationary", s.stationary, "max tangential norm = " + fmt(s.report.max_tangential_norm)});
    rep.results = {{"max_tangential_norm", s.report.max_tangential_norm},
                   {"lambda_spread", s.report.lambda_spread},
                   {"stationary", s.stationary}};
    const auto path = dir / "stationarity.json";
    io::open_for_write(path) << rep.results.dump(2) << '\n';
    rep.files.push_back(path);
  } else {
    throw std::invalid_argument("unknown experiment '" + e + "'");
  }

  json checks = json::array();
  for (const auto& ch : rep.checks) checks.push_back({{"name", ch.name}, {"passed", ch.passed}, {"detail", ch.detail}});
  json results = rep.results;
  results["checks"] = checks;
  rep.files.push_back(write_manifest(dir, e, to_json(c), c.seed, results));
  return rep;
}

}  // namespace clr
