#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bvsglm/baselines.hpp"
#include "bvsglm/conditions.hpp"
#include "bvsglm/estimators.hpp"
#include "bvsglm/graphical.hpp"
#include "bvsglm/harness.hpp"

namespace py = pybind11;
using namespace bvsglm;

namespace {

GlmFamily family_from_name(const std::string& name, double dispersion) {
  if (name == "logistic") return GlmFamily::logistic();
  if (name == "probit") return GlmFamily::probit();
  if (name == "poisson") return GlmFamily::poisson();
  if (name == "exponential") return GlmFamily::exponential_log_link();
  if (name == "normal") return GlmFamily::normal_known_var(dispersion);
  if (name == "normal_unknown") return GlmFamily::normal_unknown_var();
  throw std::invalid_argument("unknown family '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_bvsglm, m) {
  m.doc() = "Bayesian variable selection for high-dimensional GLMs";

  py::class_<GlmFamily>(m, "GlmFamily")
      .def(py::init([](const std::string& name, double dispersion) {
             return family_from_name(name, dispersion);
           }),
           py::arg("name"), py::arg("dispersion") = 1.0)
      .def_property_readonly("name", [](const GlmFamily& f) { return family_name(f.kind); })
      .def_readonly("dispersion", &GlmFamily::dispersion);

  m.def("log_density", &log_density, py::arg("family"), py::arg("y"), py::arg("h"),
        py::arg("phi") = std::nullopt);
  m.def("mean", &mean, py::arg("family"), py::arg("h"));
  m.def("hellinger_affinity", &hellinger_affinity, py::arg("family"), py::arg("h1"),
        py::arg("h2"));
  m.def("hellinger_affinity_normal", &hellinger_affinity_normal, py::arg("h1"), py::arg("phi1"),
        py::arg("h2"), py::arg("phi2"));

  py::class_<ModelIndicator>(m, "ModelIndicator")
      .def(py::init<std::vector<int>, int>(), py::arg("included"), py::arg("K"))
      .def_readonly("included", &ModelIndicator::included)
      .def_readonly("K", &ModelIndicator::K)
      .def("__len__", &ModelIndicator::size);

  py::class_<VPolicy>(m, "VPolicy")
      .def_static("identity_scale", &VPolicy::identity_scale, py::arg("c"))
      .def_static("ar1", &VPolicy::ar1, py::arg("c"), py::arg("rho"));

  py::class_<DispersionPrior>(m, "DispersionPrior")
      .def(py::init([](double kappa, double rate) {
             return DispersionPrior{kappa, rate};
           }),
           py::arg("kappa"), py::arg("rate"))
      .def_readonly("kappa", &DispersionPrior::kappa)
      .def_readonly("rate", &DispersionPrior::rate);

  py::class_<PriorSpec>(m, "PriorSpec")
      .def(py::init([](int r_exp, int r_max, VPolicy policy,
                       std::optional<DispersionPrior> dispersion) {
             PriorSpec s;
             s.r_exp = r_exp;
             s.r_max = r_max;
             s.v_policy = policy;
             s.dispersion = dispersion;
             return s;
           }),
           py::arg("r_exp"), py::arg("r_max"),
           py::arg("v_policy") = VPolicy::identity_scale(1.0),
           py::arg("dispersion") = std::nullopt)
      .def_readonly("r_exp", &PriorSpec::r_exp)
      .def_readonly("r_max", &PriorSpec::r_max);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init([](Eigen::MatrixXd X, Eigen::VectorXd y, const GlmFamily& fam) {
             Dataset d{std::move(X), std::move(y), fam};
             d.validate();
             return d;
           }),
           py::arg("X"), py::arg("y"), py::arg("family"))
      .def_readonly("X", &Dataset::X)
      .def_readonly("y", &Dataset::y);

  py::class_<McmcConfig>(m, "McmcConfig")
      .def(py::init([](long iterations, long burn_in, int thin, double rw_step,
                       std::uint64_t seed) {
             McmcConfig c;
             c.iterations = iterations;
             c.burn_in = burn_in;
             c.thin = thin;
             c.rw_step = rw_step;
             c.seed = seed;
             return c;
           }),
           py::arg("iterations") = 20000, py::arg("burn_in") = 5000, py::arg("thin") = 10,
           py::arg("rw_step") = 0.25, py::arg("seed") = 0);

  py::class_<PosteriorDraw>(m, "PosteriorDraw")
      .def_readonly("gamma", &PosteriorDraw::gamma)
      .def_readonly("beta", &PosteriorDraw::beta)
      .def_readonly("phi", &PosteriorDraw::phi);

  py::class_<Chain>(m, "Chain")
      .def_readonly("draws", &Chain::draws)
      .def("__len__", [](const Chain& c) { return c.draws.size(); })
      .def_property_readonly("acceptance", [](const Chain& c) {
        return py::dict(py::arg("add") = c.add.rate(), py::arg("delete") = c.del.rate(),
                        py::arg("swap") = c.swap.rate(), py::arg("walk") = c.walk.rate());
      });

  m.def("mcmc_run", &mcmc_run, py::arg("data"), py::arg("prior"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def(
      "inclusion_probabilities",
      [](const Chain& c, int K) { return inclusion_probabilities(c, K); }, py::arg("chain"),
      py::arg("K"));
  m.def("conjugate_log_marginal", &conjugate_log_marginal, py::arg("data"), py::arg("prior"),
        py::arg("gamma"));

  py::class_<XLaw>(m, "XLaw")
      .def_static("indicator_design", &XLaw::indicator_design, py::arg("K"))
      .def_static("uniform_cube", &XLaw::uniform_cube, py::arg("K"))
      .def_static("gaussian_graph", &XLaw::gaussian_graph, py::arg("precision"));

  py::class_<TrueModel>(m, "TrueModel")
      .def(py::init([](const GlmFamily& fam, Eigen::VectorXd beta_star, const XLaw& law,
                       std::optional<double> dispersion_star) {
             return TrueModel{fam, std::move(beta_star), law, dispersion_star};
           }),
           py::arg("family"), py::arg("beta_star"), py::arg("x_law"),
           py::arg("dispersion_star") = std::nullopt);

  py::class_<XSample>(m, "XSample")
      .def_readonly("points", &XSample::points)
      .def_readonly("weights", &XSample::weights)
      .def_readonly("exact", &XSample::exact);

  py::class_<HellingerEstimate>(m, "HellingerEstimate")
      .def_readonly("value", &HellingerEstimate::value)
      .def_readonly("se", &HellingerEstimate::se)
      .def_readonly("n_x", &HellingerEstimate::n_x)
      .def_readonly("exact", &HellingerEstimate::exact);

  m.def(
      "make_x_sample",
      [](const TrueModel& truth, int n_draws, std::uint64_t seed) {
        Rng rng(seed);
        return make_x_sample(truth, n_draws, rng);
      },
      py::arg("truth"), py::arg("n_draws"), py::arg("seed") = 1);
  m.def("hellinger_distance_full", &hellinger_distance_full, py::arg("truth"),
        py::arg("candidate_family"), py::arg("beta_full"), py::arg("phi"), py::arg("xs"));
  m.def("posterior_hellinger", &posterior_hellinger, py::arg("chain"), py::arg("truth"),
        py::arg("candidate_family"), py::arg("xs"));

  py::class_<ChebyshevResult>(m, "ChebyshevResult")
      .def_readonly("empirical_tail", &ChebyshevResult::empirical_tail)
      .def_readonly("bound", &ChebyshevResult::bound)
      .def_readonly("pass_", &ChebyshevResult::pass)
      .def_readonly("eta", &ChebyshevResult::eta);

  m.def(
      "chebyshev_check",
      [](int n, long draws, std::uint64_t seed) {
        Rng rng(seed);
        return chebyshev_check(n, draws, rng);
      },
      py::arg("n"), py::arg("posterior_draws") = 10000, py::arg("seed") = 1);

  m.def(
      "delta", [](const Eigen::VectorXd& beta, int r) { return delta(beta, r); },
      py::arg("beta_star"), py::arg("r"));
  m.def("d_growth", &d_growth, py::arg("family"), py::arg("R"));

  m.def("parse_config", &parse_config, py::arg("json_text"));
  m.def("canonical_json", &canonical_json, py::arg("config"));
  m.def("run_experiment", &run_experiment, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("replicates", &ExperimentConfig::replicates)
      .def_readwrite("threads", &ExperimentConfig::threads)
      .def_readwrite("out_dir", &ExperimentConfig::out_dir);

  py::class_<ExperimentResult>(m, "ExperimentResult")
      .def_readonly("files", &ExperimentResult::files)
      .def_readonly("check_passed", &ExperimentResult::check_passed)
      .def_readonly("check_detail", &ExperimentResult::check_detail)
      .def_readonly("slope", &ExperimentResult::slope)
      .def_readonly("slope_se", &ExperimentResult::slope_se);

  py::register_exception<ConfigError>(m, "ConfigError");
}
