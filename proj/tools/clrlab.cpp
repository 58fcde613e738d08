#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "clr/config.hpp"
#include "clr/experiments.hpp"

namespace {

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--seed", f.seed, "Random seed");
  app->add_option("--out", f.out, "Output directory");
  app->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"csv", "svg", "both"}));
}

void apply_common(clr::ExperimentConfig& c, const CommonFlags& f) {
  if (f.seed) c.seed = *f.seed;
  if (f.out) c.output_dir = *f.out;
  if (f.format) c.format = clr::parse_output_format(*f.format);
  c.compare.seed = c.seed;
}

int report(const clr::RunReport& rep, bool json_to_stdout) {
  if (json_to_stdout) {
    std::cout << rep.results.dump(2) << '\n';
  } else {
    for (const auto& ch : rep.checks)
      std::cout << (ch.passed ? "PASS " : "FAIL ") << ch.name << (ch.detail.empty() ? "" : "  [" + ch.detail + "]") << '\n';
    for (const auto& f : rep.files) std::cout << "wrote " << f.string() << '\n';
  }
  return rep.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments on contrastive losses, neural kernels and their training dynamics"};
  app.require_subcommand(1);

  clr::ExperimentConfig cfg;
  CommonFlags common;
  std::string psi = "log1p";
  std::string activation = "tanh";
  std::string config_path;
  std::string latent_path;
  double tau_min = 0.02, tau_max = 0.5;
  int tau_count = 13;

  auto* sc = app.add_subcommand("sweep-clusters", "Loss of K evenly spaced points on the circle");
  add_common(sc, common);
  sc->add_option("--k-min", cfg.sweep.k_min)->capture_default_str();
  sc->add_option("--k-max", cfg.sweep.k_max)->capture_default_str();
  sc->add_option("--tau", cfg.sweep.taus, "Temperatures")->capture_default_str();
  sc->add_option("--psi", psi)->check(CLI::IsMember({"log1p", "log1p_half", "identity"}));
  sc->add_option("--plateau", cfg.sweep.plateau_fraction, "Plateau fraction")->capture_default_str();

  auto* sd = app.add_subcommand("sweep-distance", "Loss against the minimum squared distance");
  add_common(sd, common);
  sd->add_option("--clusters", cfg.sweep.clusters)->capture_default_str();
  sd->add_option("--tau", cfg.sweep.taus)->capture_default_str();
  sd->add_option("--points", cfg.sweep.distance_points)->capture_default_str();
  sd->add_option("--knee", cfg.sweep.knee_fraction)->capture_default_str();
  sd->add_option("--psi", psi)->check(CLI::IsMember({"log1p", "log1p_half", "identity"}));

  auto* st = app.add_subcommand("sweep-tau", "Distance threshold against temperature");
  add_common(st, common);
  st->add_option("--clusters", cfg.sweep.clusters)->capture_default_str();
  st->add_option("--tau-min", tau_min)->capture_default_str();
  st->add_option("--tau-max", tau_max)->capture_default_str();
  st->add_option("--tau-count", tau_count)->capture_default_str();
  st->add_option("--knee", cfg.sweep.knee_fraction)->capture_default_str();
  st->add_option("--min-r2", cfg.sweep.min_r2)->capture_default_str();
  st->add_option("--psi", psi)->check(CLI::IsMember({"log1p", "log1p_half", "identity"}));

  auto* cd = app.add_subcommand("compare-dynamics", "Network-mediated against vanilla latent descent");
  add_common(cd, common);
  cd->add_option("--repeats", cfg.repeats, "Independent seeds")->capture_default_str();
  cd->add_option("--n", cfg.compare.n)->capture_default_str();
  cd->add_option("--width", cfg.compare.width)->capture_default_str();
  cd->add_option("--latent-dim", cfg.compare.latent_dim)->capture_default_str();
  cd->add_option("--ambient-dim", cfg.compare.ambient_dim)->capture_default_str();
  cd->add_option("--noise", cfg.compare.noise_bound)->capture_default_str();
  cd->add_option("--tau", cfg.compare.tau)->capture_default_str();
  cd->add_option("--kernel-steps", cfg.compare.kernel_steps)->capture_default_str();
  cd->add_option("--vanilla-steps", cfg.compare.vanilla_steps)->capture_default_str();
  cd->add_option("--activation", activation)->check(CLI::IsMember({"relu", "tanh", "smooth_relu", "identity"}));

  auto* cg = app.add_subcommand("check-gradients", "Compare analytic gradients with finite differences");
  add_common(cg, common);
  cg->add_option("--instances", cfg.gradients.instances)->capture_default_str();
  cg->add_option("--step", cfg.gradients.fd_step)->capture_default_str();
  cg->add_option("--tol", cfg.gradients.tolerance)->capture_default_str();

  auto* cs = app.add_subcommand("check-stationarity", "Stationarity report for a latent configuration CSV");
  add_common(cs, common);
  cs->add_option("input", latent_path, "CSV with columns z_0,...")->required()->check(CLI::ExistingFile);
  cs->add_option("--tau", cfg.tau)->capture_default_str();
  cs->add_option("--psi", psi)->check(CLI::IsMember({"log1p", "log1p_half", "identity"}));
  cs->add_option("--tol", cfg.stationarity.tolerance)->capture_default_str();

  auto* kc = app.add_subcommand("kernel-converge", "Finite-width relu kernel against its infinite-width limit");
  add_common(kc, common);
  kc->add_option("--seeds", cfg.kernel.seeds)->capture_default_str();
  kc->add_option("--output-dim", cfg.kernel.output_dim)->capture_default_str();
  kc->add_option("--widths", cfg.kernel.widths)->capture_default_str();

  auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
  add_common(run, common);
  run->add_option("--config", config_path, "Experiment config")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    auto* sub = app.get_subcommands().front();
    if (sub == run) {
      cfg = clr::load_config(config_path);
    } else {
      cfg.experiment = sub->get_name();
      cfg.psi = clr::parse_psi(psi);
      cfg.compare.activation = clr::parse_activation(activation);
      if (sub == st) cfg.sweep.tau_grid = clr::linspace(tau_min, tau_max, tau_count);
      if (sub == cs) cfg.stationarity.input = latent_path;
    }
    apply_common(cfg, common);
    const clr::RunReport rep = clr::run_experiment(cfg);
    return report(rep, cfg.experiment == "check-stationarity");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
