#include "clr/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

#include "clr/io.hpp"
#include "clr/rng.hpp"
#include "clr/variations.hpp"

namespace clr {

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need two or more paired values");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: x values are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 1) throw std::invalid_argument("linspace: count must be positive");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
  return out;
}

LatentConfiguration roots_of_unity(int K, int points_per_location) {
  if (K < 1 || points_per_location < 1) throw std::invalid_argument("roots_of_unity: K and multiplicity must be positive");
  Eigen::MatrixXd z(2, K * points_per_location);
  for (int k = 0; k < K; ++k) {
    const double a = 2.0 * std::numbers::pi * k / K;
    for (int m = 0; m < points_per_location; ++m) {
      z(0, k * points_per_location + m) = std::cos(a);
      z(1, k * points_per_location + m) = std::sin(a);
    }
  }
  return LatentConfiguration(z);
}

namespace {

bool non_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1] + 1e-12) return false;
  return true;
}

std::string tau_label(double tau) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "tau=%g", tau);
  return buf;
}

SimilarityConfig make_cfg(double tau, PsiKind psi) {
  SimilarityConfig c;
  c.tau = tau;
  c.psi = psi;
  c.validate();
  return c;
}

}  // namespace

SweepResult sweep_clusters(int k_min, int k_max, const std::vector<double>& taus,
                           int points_per_location, PsiKind psi, double plateau_fraction) {
  if (k_min < 1 || k_max <= k_min) throw std::invalid_argument("sweep_clusters: need 1 <= k_min < k_max");
  if (taus.empty()) throw std::invalid_argument("sweep_clusters: no temperatures given");
  SweepResult r{"sweep-clusters", "number of clusters K", "loss", {}, std::nullopt};
  for (double tau : taus) {
    const SimilarityConfig cfg = make_cfg(tau, psi);
    SweepSeries s;
    s.tau = tau;
    for (int K = k_min; K <= k_max; ++K) {
      s.axis.push_back(K);
      s.loss.push_back(generalized_loss(roots_of_unity(K, points_per_location), cfg));
    }
    s.monotone = non_increasing(s.loss);
    const double drop = s.loss.front() - s.loss.back();
    for (std::size_t i = 0; i + 1 < s.loss.size(); ++i) {
      if (s.loss[i] - s.loss[i + 1] < plateau_fraction * drop) {
        s.threshold = s.axis[i];
        break;
      }
    }
    r.series.push_back(std::move(s));
  }
  return r;
}

double max_feasible_sq_distance(int K) {
  if (K < 1) throw std::invalid_argument("max_feasible_sq_distance: K must be positive");
  if (K == 1) return 0.0;
  return 2.0 - 2.0 * std::cos(2.0 * std::numbers::pi / K);
}

Eigen::MatrixXd arc_configuration(int K, double min_sq_distance) {
  const double smax = max_feasible_sq_distance(K);
  if (!(min_sq_distance >= 0.0) || min_sq_distance > smax + 1e-12)
    throw std::invalid_argument("arc_configuration: minimum squared distance " + std::to_string(min_sq_distance) +
                                " is infeasible for " + std::to_string(K) + " points on the circle (max " +
                                std::to_string(smax) + ")");
  const double a = std::acos(std::clamp(1.0 - 0.5 * min_sq_distance, -1.0, 1.0));
  Eigen::MatrixXd z(2, K);
  for (int k = 0; k < K; ++k) {
    z(0, k) = std::cos(k * a);
    z(1, k) = std::sin(k * a);
  }
  return z;
}

std::optional<double> min_distance_threshold(int K, double tau, double knee_fraction, PsiKind psi) {
  if (K < 2) throw std::invalid_argument("min_distance_threshold: needs K >= 2");
  if (!(knee_fraction > 0.0 && knee_fraction < 1.0))
    throw std::invalid_argument("min_distance_threshold: knee fraction must lie in (0, 1)");
  const SimilarityConfig cfg = make_cfg(tau, psi);
  const double plateau = cfg.psi_value(1.0 / K);
  const auto loss = [&](double s) { return generalized_loss(LatentConfiguration(arc_configuration(K, s)), cfg); };
  const double level = plateau + knee_fraction * (loss(0.0) - plateau);
  const std::vector<double> grid = linspace(0.0, max_feasible_sq_distance(K), 257);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (loss(grid[i]) > level) continue;
    double lo = grid[i - 1], hi = grid[i];
    for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      (loss(mid) <= level ? hi : lo) = mid;
    }
    return hi;
  }
  return std::nullopt;
}

SweepResult sweep_min_distance(int K, const std::vector<double>& sq_distances,
                               const std::vector<double>& taus, double knee_fraction, PsiKind psi) {
  if (sq_distances.empty() || taus.empty()) throw std::invalid_argument("sweep_min_distance: empty axis");
  for (std::size_t i = 1; i < sq_distances.size(); ++i)
    if (!(sq_distances[i] > sq_distances[i - 1]))
      throw std::invalid_argument("sweep_min_distance: distances must be strictly increasing");
  SweepResult r{"sweep-distance", "minimum squared distance", "loss", {}, std::nullopt};
  for (double tau : taus) {
    const SimilarityConfig cfg = make_cfg(tau, psi);
    SweepSeries s;
    s.tau = tau;
    for (double d2 : sq_distances) {
      s.axis.push_back(d2);
      s.loss.push_back(generalized_loss(LatentConfiguration(arc_configuration(K, d2)), cfg));
    }
    s.monotone = non_increasing(s.loss);
    s.threshold = min_distance_threshold(K, tau, knee_fraction, psi);
    r.series.push_back(std::move(s));
  }
  return r;
}

SweepResult sweep_tau_threshold(const std::vector<double>& taus, int K, double knee_fraction, PsiKind psi) {
  for (std::size_t i = 1; i < taus.size(); ++i)
    if (!(taus[i] > taus[i - 1])) throw std::invalid_argument("sweep_tau_threshold: taus must be strictly increasing");
  SweepResult r{"sweep-tau", "tau", "threshold squared distance", {}, std::nullopt};
  SweepSeries s;
  for (double tau : taus) {
    if (auto t = min_distance_threshold(K, tau, knee_fraction, psi)) {
      s.axis.push_back(tau);
      s.loss.push_back(*t);
    }
  }
  s.monotone = true;
  for (std::size_t i = 1; i < s.loss.size(); ++i) s.monotone = s.monotone && s.loss[i] > s.loss[i - 1];
  if (s.axis.size() >= 2) r.fit = fit_line(s.axis, s.loss);
  r.series.push_back(std::move(s));
  return r;
}

void CompareConfig::validate() const {
  if (centers_x.size() < 2) throw std::invalid_argument("compare: needs at least two clusters");
  if (n < static_cast<int>(centers_x.size())) throw std::invalid_argument("compare: fewer points than clusters");
  if (latent_dim < 2 || latent_dim > 3 || latent_dim > ambient_dim)
    throw std::invalid_argument("compare: latent_dim must be 2 or 3 and at most ambient_dim");
  if (width < 1 || kernel_steps < 0 || vanilla_steps < 0 || record_stride < 1)
    throw std::invalid_argument("compare: width, step counts and stride must be valid");
  if (!(kernel_step > 0.0) || !(vanilla_step > 0.0) || !(tau > 0.0))
    throw std::invalid_argument("compare: step sizes and tau must be positive");
}

CompareResult compare_dynamics(const CompareConfig& config) {
  config.validate();
  const int N = static_cast<int>(config.centers_x.size());
  Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(config.ambient_dim, N);
  for (int q = 0; q < N; ++q) centers(0, q) = config.centers_x[static_cast<std::size_t>(q)];
  std::vector<int> sizes(static_cast<std::size_t>(N), config.n / N);
  for (int q = 0; q < config.n % N; ++q) ++sizes[static_cast<std::size_t>(q)];

  CompareResult r;
  r.data = generate_from_centers(centers, config.latent_dim, sizes, config.noise_bound, config.seed);

  NetSpec spec;
  spec.input_dim = config.ambient_dim;
  spec.output_dim = config.latent_dim;
  spec.width = config.width;
  spec.activation = config.activation;
  spec.weight_std = config.weight_std;
  OneHiddenNet net = init_gaussian(spec, config.seed);
  if (config.invariant_init) net = make_invariant(net, config.latent_dim);

  SimilarityConfig cfg = make_cfg(config.tau, config.psi);
  const PerturbationSet perturb = PerturbationSet::orthogonal_noise(config.latent_dim, 0.5 * config.noise_bound);

  FlowConfig kflow;
  kflow.mode = FlowMode::WeightSpace;
  kflow.step = config.kernel_step;
  kflow.max_steps = config.kernel_steps;
  kflow.record_stride = config.record_stride;
  kflow.normalize_embedding = true;
  kflow.sphere_projection = false;
  kflow.invariance_samples = 16;
  r.kernel_path = run_weight_space(net, r.data, perturb, cfg, kflow).trajectory;

  FlowConfig vflow;
  vflow.mode = FlowMode::Vanilla;
  vflow.step = config.vanilla_step;
  vflow.max_steps = config.vanilla_steps;
  vflow.record_stride = config.record_stride;
  vflow.sphere_projection = true;
  const LatentConfiguration z0(normalize_columns(net.forward_batch(r.data.points)));
  r.vanilla_path = run_latent(z0, cfg, vflow, r.data.assignment);

  for (std::size_t i = 0; i < r.kernel_path.size(); ++i) {
    const double c = r.kernel_path.diagnostics[i].coherence;
    r.best_coherence = i == 0 ? c : std::max(r.best_coherence, c);
    if (r.coherence_step < 0 && c >= config.coherence_target) r.coherence_step = r.kernel_path.times[i];
  }
  for (std::size_t i = 0; i < r.vanilla_path.size(); ++i) {
    const double u = r.vanilla_path.diagnostics[i].uniformity;
    r.best_uniformity = i == 0 ? u : std::min(r.best_uniformity, u);
    if (r.uniformity_step < 0 && u <= config.uniformity_target) r.uniformity_step = r.vanilla_path.times[i];
  }
  r.initial_coherence = r.kernel_path.diagnostics.front().coherence;
  r.final_coherence = r.kernel_path.diagnostics.back().coherence;
  r.vanilla_final_coherence = r.vanilla_path.diagnostics.back().coherence;
  r.final_uniformity = r.vanilla_path.diagnostics.back().uniformity;
  r.kernel_final_tangential = r.kernel_path.diagnostics.back().max_grad;
  r.vanilla_final_tangential = r.vanilla_path.diagnostics.back().max_grad;
  return r;
}

KernelConvergence kernel_convergence(const std::vector<int>& widths, const std::vector<double>& angles,
                                     int seeds, int output_dim, std::uint64_t seed,
                                     std::pair<int, int> ratio_widths) {
  if (widths.empty() || angles.empty() || seeds < 2 || output_dim < 1)
    throw std::invalid_argument("kernel_convergence: need widths, angles, two or more seeds and d >= 1");
  KernelConvergence out;
  out.widths = widths;
  out.angles = angles;
  const int A = static_cast<int>(angles.size());
  Eigen::MatrixXd X(2, A + 1);
  X.col(0) << 1.0, 0.0;
  Eigen::VectorXd limit(A);
  for (int a = 0; a < A; ++a) {
    const double th = angles[static_cast<std::size_t>(a)];
    X.col(a + 1) << std::cos(th), std::sin(th);
    limit(a) = std::cos(th) * (0.5 - th / (2.0 * std::numbers::pi));
  }
  for (int M : widths) {
    NetSpec spec;
    spec.input_dim = 2;
    spec.output_dim = output_dim;
    spec.width = M;
    spec.activation = Activation::Relu;
    // entries[a * d + k] collects K^{kk}(x_0, x_a) over seeds
    std::vector<std::vector<double>> entries(static_cast<std::size_t>(A * output_dim));
    double sq = 0.0;
    for (int s = 0; s < seeds; ++s) {
      const std::uint64_t key = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(M) * 1000003ULL + static_cast<std::uint64_t>(s)));
      const KernelMatrix K = kernel(init_gaussian(spec, key), X);
      for (int a = 0; a < A; ++a) {
        for (int k = 0; k < output_dim; ++k) {
          const double v = K.data(k, static_cast<Eigen::Index>(a + 1) * output_dim + k);
          entries[static_cast<std::size_t>(a * output_dim + k)].push_back(v);
          sq += (v - limit(a)) * (v - limit(a));
        }
      }
    }
    out.rms_error.push_back(std::sqrt(sq / static_cast<double>(seeds * A * output_dim)));
    double zmax = 0.0;
    for (int a = 0; a < A; ++a) {
      for (int k = 0; k < output_dim; ++k) {
        const auto& e = entries[static_cast<std::size_t>(a * output_dim + k)];
        double mean = 0.0;
        for (double v : e) mean += v;
        mean /= static_cast<double>(e.size());
        double var = 0.0;
        for (double v : e) var += (v - mean) * (v - mean);
        var /= static_cast<double>(e.size() - 1);
        const double se = std::sqrt(var / static_cast<double>(e.size()));
        const double dev = std::abs(mean - limit(a));
        if (se > 0.0) zmax = std::max(zmax, dev / se);
        else if (dev > 1e-12) zmax = std::numeric_limits<double>::infinity();
      }
    }
    out.max_z_score.push_back(zmax);
  }
  const auto idx = [&](int w) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < widths.size(); ++i)
      if (widths[i] == w) return i;
    return std::nullopt;
  };
  const auto i1 = idx(ratio_widths.first), i2 = idx(ratio_widths.second);
  if (i1 && i2 && out.rms_error[*i2] > 0.0) out.error_ratio = out.rms_error[*i1] / out.rms_error[*i2];
  return out;
}

GradientCheck check_gradients(int instances, std::uint64_t seed, double fd_step) {
  if (instances < 1) throw std::invalid_argument("check_gradients: need at least one instance");
  GradientCheck out;
  out.instances = instances;
  constexpr PsiKind kPsis[] = {PsiKind::Log1p, PsiKind::Log1pHalf, PsiKind::Identity};
  for (int t = 0; t < instances; ++t) {
    CounterRng rng(seed, 100 + static_cast<std::uint64_t>(t));
    const int n = 2 + static_cast<int>(rng.uniform() * 9.0);
    const int d = 1 + static_cast<int>(rng.uniform() * 4.0);
    SimilarityConfig cfg;
    cfg.tau = 0.3 + 1.7 * rng.uniform();
    cfg.psi = kPsis[t % 3];
    cfg.constraint = Constraint::Unconstrained;

    Eigen::MatrixXd pts(d, n);
    for (int i = 0; i < n; ++i) pts.col(i) = 0.8 * rng.normal_vector(d);
    const LatentConfiguration z(pts);
    const Eigen::MatrixXd g = invariant_gradient(z, cfg).euclidean;
    const Eigen::MatrixXd fd = finite_difference_gradient(z, cfg, fd_step);
    out.max_gradient_error = std::max(out.max_gradient_error, (g - fd).norm() / std::max(fd.norm(), 1e-12));

    // Non-invariant embedding of D = d + 2 inputs with two orthogonal shifts.
    const int D = d + 2;
    const int m = std::min(n, 6);
    Eigen::MatrixXd X(D, m);
    for (int i = 0; i < m; ++i) X.col(i) = rng.normal_vector(D);
    Eigen::MatrixXd W(d, D), V(d, D);
    for (int r = 0; r < d; ++r) {
      W.row(r) = rng.normal_vector(D).transpose();
      V.row(r) = 0.5 * rng.normal_vector(D).transpose();
    }
    std::vector<Eigen::VectorXd> draws;
    for (int k = 0; k < 2; ++k) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(D);
      v.tail(2) = 0.3 * rng.normal_vector(2);
      draws.push_back(v);
    }
    const PerturbationSet nu = PerturbationSet::finite_list(d, draws);
    const Embedding f = [W](const Eigen::VectorXd& x) { return Eigen::VectorXd((W * x).array().tanh()); };
    const Direction h = [V](const Eigen::VectorXd& x) { return Eigen::VectorXd(V * x); };
    const double pairing = first_variation_pairing(X, f, nu, cfg, h);
    const auto shifted = [&](double eps) {
      const Embedding fe = [&, eps](const Eigen::VectorXd& x) { return Eigen::VectorXd(f(x) + eps * h(x)); };
      return full_loss_two_view_exact(X, fe, nu, cfg);
    };
    const double fd_pair = (shifted(fd_step) - shifted(-fd_step)) / (2.0 * fd_step);
    out.max_pairing_error = std::max(out.max_pairing_error, std::abs(pairing - fd_pair) / std::max(std::abs(fd_pair), 1e-12));
  }
  return out;
}

LatentConfiguration read_latent_csv(const std::filesystem::path& path) {
  const io::CsvTable table = io::read_csv(path);
  std::vector<int> cols;
  for (int k = 0;; ++k) {
    const int c = table.column("z_" + std::to_string(k));
    if (c < 0) break;
    cols.push_back(c);
  }
  if (cols.empty()) throw std::runtime_error(path.string() + ": no z_0 column");
  const int step_col = table.column("step");
  double last = -std::numeric_limits<double>::infinity();
  if (step_col >= 0)
    for (const auto& row : table.rows) last = std::max(last, row[static_cast<std::size_t>(step_col)]);
  std::vector<const std::vector<double>*> rows;
  for (const auto& row : table.rows)
    if (step_col < 0 || row[static_cast<std::size_t>(step_col)] == last) rows.push_back(&row);
  if (rows.empty()) throw std::runtime_error(path.string() + ": no points");
  Eigen::MatrixXd z(static_cast<Eigen::Index>(cols.size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < cols.size(); ++k)
      z(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = (*rows[i])[static_cast<std::size_t>(cols[k])];
  return LatentConfiguration(z);
}

OutputFormat parse_output_format(std::string_view name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "svg") return OutputFormat::Svg;
  if (name == "both") return OutputFormat::Both;
  throw std::invalid_argument("unknown output format '" + std::string(name) + "'");
}

std::string_view to_string(OutputFormat f) {
  switch (f) {
    case OutputFormat::Csv: return "csv";
    case OutputFormat::Svg: return "svg";
    case OutputFormat::Both: return "both";
  }
  return "?";
}

Figure figure_from_sweep(const SweepResult& sweep) {
  Figure fig;
  fig.stem = sweep.name;
  fig.plot.title = sweep.name;
  fig.plot.x_label = sweep.axis_label;
  fig.plot.y_label = sweep.value_label;
  for (const auto& s : sweep.series)
    fig.plot.series.push_back({sweep.fit ? std::string("threshold") : tau_label(s.tau), s.axis, s.loss});
  return fig;
}

std::vector<Figure> figures_from_compare(const CompareResult& result) {
  const auto column = [](const Trajectory& t, double StepDiagnostics::*field) {
    PlotSeries s;
    for (std::size_t i = 0; i < t.size(); ++i) {
      s.x.push_back(t.times[i]);
      s.y.push_back(t.diagnostics[i].*field);
    }
    return s;
  };
  std::vector<Figure> figs;
  const std::pair<const char*, double StepDiagnostics::*> metrics[] = {
      {"coherence", &StepDiagnostics::coherence},
      {"uniformity", &StepDiagnostics::uniformity},
      {"loss", &StepDiagnostics::loss},
  };
  for (const auto& [name, field] : metrics) {
    Figure f;
    f.stem = std::string("compare-") + name;
    f.plot.title = std::string(name) + " over iterations";
    f.plot.x_label = "step";
    f.plot.y_label = name;
    PlotSeries k = column(result.kernel_path, field);
    k.label = "with network";
    PlotSeries v = column(result.vanilla_path, field);
    v.label = "vanilla";
    f.plot.series = {k, v};
    figs.push_back(std::move(f));
  }
  return figs;
}

std::vector<std::filesystem::path> emit_plots(const std::vector<Figure>& figures,
                                              const std::filesystem::path& dir, OutputFormat format) {
  if (figures.empty()) throw std::invalid_argument("emit_plots: nothing to emit");
  std::vector<std::string> svgs;
  for (const auto& f : figures) svgs.push_back(render_svg(f.plot));

  std::vector<std::filesystem::path> files;
  for (std::size_t i = 0; i < figures.size(); ++i) {
    const auto& f = figures[i];
    if (format != OutputFormat::Csv) {
      const auto path = dir / (f.stem + ".svg");
      io::open_for_write(path) << svgs[i];
      files.push_back(path);
    }
    if (format != OutputFormat::Svg) {
      const auto path = dir / (f.stem + ".csv");
      auto out = io::open_for_write(path);
      out << "series,x,y\n";
      for (const auto& s : f.plot.series)
        for (std::size_t k = 0; k < s.x.size(); ++k)
          out << s.label << ',' << io::format_double(s.x[k]) << ',' << io::format_double(s.y[k]) << '\n';
      files.push_back(path);
    }
  }
  return files;
}

std::string fnv1a_hex(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::filesystem::path write_manifest(const std::filesystem::path& dir, const std::string& experiment,
                                     const nlohmann::json& config, std::uint64_t seed,
                                     const nlohmann::json& results) {
  nlohmann::json m;
  m["experiment"] = experiment;
  m["config"] = config;
  m["config_hash"] = fnv1a_hex(config.dump());
  m["seed"] = seed;
  m["versions"] = {{"clrlab", CLR_VERSION},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"compiler", __VERSION__},
                   {"network_layout", kLayoutVersion}};
  m["results"] = results;
  const auto path = dir / "manifest.json";
  io::open_for_write(path) << m.dump(2) << '\n';
  return path;
}

}  // namespace clr
