#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "clr/config.hpp"
#include "clr/dataset.hpp"
#include "clr/dynamics.hpp"
#include "clr/experiments.hpp"
#include "clr/losses.hpp"
#include "clr/network.hpp"
#include "clr/variations.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

clr::SimilarityConfig make_cfg(double tau, const std::string& psi, bool sphere) {
  clr::SimilarityConfig c;
  c.tau = tau;
  c.psi = clr::parse_psi(psi);
  c.constraint = sphere ? clr::Constraint::Sphere : clr::Constraint::Unconstrained;
  c.validate();
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Contrastive loss, kernel and dynamics routines";
  m.attr("__version__") = CLR_VERSION;

  py::class_<clr::ClusteredDataset>(m, "ClusteredDataset")
      .def_readonly("points", &clr::ClusteredDataset::points)
      .def_readonly("centers", &clr::ClusteredDataset::centers)
      .def_readonly("assignment", &clr::ClusteredDataset::assignment)
      .def_readonly("latent_dim", &clr::ClusteredDataset::latent_dim)
      .def_readonly("noise_bound", &clr::ClusteredDataset::noise_bound)
      .def("max_noise_norm", &clr::ClusteredDataset::max_noise_norm);

  m.def(
      "generate_dataset",
      [](int ambient_dim, int latent_dim, std::vector<int> sizes, std::vector<double> norms, double noise_bound,
         std::uint64_t seed) {
        clr::ClusterSpec s;
        s.ambient_dim = ambient_dim;
        s.latent_dim = latent_dim;
        s.num_clusters = static_cast<int>(sizes.size());
        s.cluster_sizes = std::move(sizes);
        s.center_norms = std::move(norms);
        s.noise_bound = noise_bound;
        s.seed = seed;
        return clr::generate(s);
      },
      "ambient_dim"_a, "latent_dim"_a, "sizes"_a, "norms"_a, "noise_bound"_a = 0.0, "seed"_a = 0);

  m.def(
      "generalized_loss",
      [](const Eigen::MatrixXd& z, double tau, const std::string& psi) {
        return clr::generalized_loss(clr::LatentConfiguration(z), make_cfg(tau, psi, false));
      },
      "z"_a, "tau"_a = 0.5, "psi"_a = "log1p");
  m.def(
      "nt_xent_latent", [](const Eigen::MatrixXd& z, double tau) { return clr::nt_xent_latent(clr::LatentConfiguration(z), tau); },
      "z"_a, "tau"_a);
  m.def(
      "vicreg_latent",
      [](const Eigen::MatrixXd& z, double l2, double l3) { return clr::vicreg_latent(clr::LatentConfiguration(z), l2, l3); },
      "z"_a, "lambda2"_a = 1.0, "lambda3"_a = 1.0);

  m.def(
      "invariant_gradient",
      [](const Eigen::MatrixXd& z, double tau, const std::string& psi, bool sphere) {
        const auto r = clr::invariant_gradient(clr::LatentConfiguration(z), make_cfg(tau, psi, sphere));
        return py::dict("euclidean"_a = r.euclidean, "tangential"_a = r.tangential, "lambda_"_a = r.lambda,
                        "max_tangential_norm"_a = r.max_tangential_norm, "lambda_spread"_a = r.lambda_spread);
      },
      "z"_a, "tau"_a = 0.5, "psi"_a = "log1p", "sphere"_a = true);
  m.def(
      "stationarity_check",
      [](const Eigen::MatrixXd& z, double tau, const std::string& psi, double tol) {
        const auto r = clr::stationarity_check(clr::LatentConfiguration(z), make_cfg(tau, psi, true), tol);
        return py::dict("stationary"_a = r.stationary, "max_tangential_norm"_a = r.report.max_tangential_norm,
                        "lambda_spread"_a = r.report.lambda_spread);
      },
      "z"_a, "tau"_a = 0.5, "psi"_a = "log1p", "tol"_a = 1e-8);
  m.def(
      "second_variation",
      [](const Eigen::MatrixXd& z, double tau, const Eigen::MatrixXd& h) {
        const auto r = clr::second_variation(clr::LatentConfiguration(z), tau, h);
        return py::dict("value"_a = r.value, "sigma"_a = r.sigma, "num_locations"_a = r.num_locations,
                        "condition_satisfied"_a = r.condition_satisfied);
      },
      "z"_a, "tau"_a, "h"_a);

  m.def(
      "one_hidden_forward",
      [](const Eigen::MatrixXd& B, int width, int output_dim, const std::string& activation, const Eigen::MatrixXd& X) {
        clr::NetSpec s;
        s.input_dim = static_cast<int>(B.cols());
        s.output_dim = output_dim;
        s.width = width;
        s.activation = clr::parse_activation(activation);
        s.weight_bound = std::max(10.0, 2.0 * B.cwiseAbs().maxCoeff() + 1.0);
        return clr::OneHiddenNet(s, B).forward_batch(X);
      },
      "B"_a, "width"_a, "output_dim"_a, "activation"_a, "X"_a);
  m.def(
      "init_gaussian_weights",
      [](int input_dim, int output_dim, int width, std::uint64_t seed) {
        clr::NetSpec s;
        s.input_dim = input_dim;
        s.output_dim = output_dim;
        s.width = width;
        return clr::init_gaussian(s, seed).weights();
      },
      "input_dim"_a, "output_dim"_a, "width"_a, "seed"_a = 0);
  m.def(
      "kernel",
      [](const Eigen::MatrixXd& B, int width, int output_dim, const std::string& activation, const Eigen::MatrixXd& X) {
        clr::NetSpec s;
        s.input_dim = static_cast<int>(B.cols());
        s.output_dim = output_dim;
        s.width = width;
        s.activation = clr::parse_activation(activation);
        s.weight_bound = std::max(10.0, 2.0 * B.cwiseAbs().maxCoeff() + 1.0);
        return clr::kernel(clr::OneHiddenNet(s, B), X).data;
      },
      "B"_a, "width"_a, "output_dim"_a, "activation"_a, "X"_a);
  m.def(
      "kernel_infinite", [](const Eigen::MatrixXd& X, int d) { return clr::kernel_infinite(X, d).data; }, "X"_a,
      "output_dim"_a);

  m.def(
      "step_vanilla",
      [](const Eigen::MatrixXd& z, double tau, const std::string& psi, double step, bool sphere) {
        return clr::step_vanilla(clr::LatentConfiguration(z), make_cfg(tau, psi, sphere), step, sphere).points;
      },
      "z"_a, "tau"_a, "psi"_a = "log1p", "step"_a = 0.1, "sphere"_a = true);
  m.def(
      "step_kernel",
      [](const Eigen::MatrixXd& z, const Eigen::MatrixXd& K, double tau, const std::string& psi, double step) {
        clr::KernelMatrix km;
        km.n = static_cast<int>(z.cols());
        km.d = static_cast<int>(z.rows());
        km.data = K;
        return clr::step_kernel(clr::LatentConfiguration(z), km, make_cfg(tau, psi, false), step).points;
      },
      "z"_a, "K"_a, "tau"_a, "psi"_a = "log1p", "step"_a = 0.1);
  m.def("cluster_coherence", &clr::cluster_coherence, "z"_a, "labels"_a);
  m.def("uniformity_score", &clr::uniformity_score, "z"_a);

  m.def(
      "run_experiment",
      [](const std::string& config_json) {
        const auto rep = clr::run_experiment(clr::parse_config(nlohmann::json::parse(config_json)));
        py::list checks;
        for (const auto& c : rep.checks) checks.append(py::make_tuple(c.name, c.passed, c.detail));
        return py::dict("passed"_a = rep.passed(), "checks"_a = checks, "results"_a = rep.results.dump());
      },
      "config_json"_a);
}
