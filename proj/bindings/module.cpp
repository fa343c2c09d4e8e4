#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tvsar/evaluation.hpp"

namespace py = pybind11;
using namespace tvsar;

PYBIND11_MODULE(pytvsar, m) {
  m.doc() = "time-varying seasonal AR inference";

  m.def("theta_to_pacf", &theta_to_pacf, py::arg("theta"));
  m.def("pacf_to_phi", &pacf_to_phi, py::arg("r"));
  m.def("phi_to_theta", &phi_to_theta, py::arg("phi"));
  m.def(
      "theta_to_phi",
      [](const Vector& theta) { return pacf_to_phi(theta_to_pacf(theta)); },
      py::arg("theta"));
  m.def(
      "sample_uniform_stable_theta",
      [](int p, std::uint64_t seed) {
        Rng rng(seed);
        return sample_uniform_stable_theta(p, rng);
      },
      py::arg("p"), py::arg("seed"));

  py::class_<SarStructure>(m, "SarStructure")
      .def(py::init<std::vector<int>, std::vector<int>>(), py::arg("seasons"),
           py::arg("orders"))
      .def_property_readonly("seasons", &SarStructure::seasons)
      .def_property_readonly("orders", &SarStructure::orders)
      .def_property_readonly("p_max", &SarStructure::p_max)
      .def_property_readonly("lags", &SarStructure::lags)
      .def_property_readonly("total_order", &SarStructure::total_order);

  m.def(
      "spectral_density",
      [](const SarStructure& st, const Vector& theta, double sigma,
         const Vector& omegas) {
        return spectral_density(st, theta, sigma, omegas);
      },
      py::arg("structure"), py::arg("theta"), py::arg("sigma"),
      py::arg("omegas"));
  m.def("default_omegas", &default_omegas, py::arg("m") = 314);

  m.def(
      "simulate_experiment",
      [](const std::string& id, int T, double sigma, std::uint64_t seed) {
        ExperimentSpec spec = builtin_experiment(id, T);
        NoiseState noise;
        noise.sigma = sigma;
        const int warmup = std::max(10 * spec.paths.structure.p_max(), 200);
        Rng rng = Rng(seed).split(0x5157, 0);
        Vector y = simulate_tvsar(spec.paths, noise, warmup, rng);
        return py::make_tuple(y, spec.paths.theta);
      },
      py::arg("id"), py::arg("T") = 1000, py::arg("sigma") = 1.0,
      py::arg("seed") = 0);

  py::class_<PosteriorDraws>(m, "PosteriorDraws")
      .def_readonly("seasons", &PosteriorDraws::seasons)
      .def_readonly("orders", &PosteriorDraws::orders)
      .def_readonly("theta", &PosteriorDraws::theta)
      .def_readonly("h", &PosteriorDraws::h)
      .def_readonly("sigma", &PosteriorDraws::sigma)
      .def_readonly("mu", &PosteriorDraws::mu)
      .def_readonly("kappa", &PosteriorDraws::kappa)
      .def_readonly("update_rates", &PosteriorDraws::update_rates)
      .def_readonly("seconds", &PosteriorDraws::seconds);

  m.def(
      "fit",
      [](const Vector& y, const std::vector<int>& seasons,
         const std::vector<int>& orders, int draws, int burnin, int thin,
         const std::string& sampler, int particles, bool sv,
         std::uint64_t seed) {
        SarStructure st(seasons, orders);
        GibbsConfig cfg;
        cfg.draws = draws;
        cfg.burnin = burnin;
        cfg.thin = thin;
        if (sampler == "pgas") {
          cfg.sampler = GibbsConfig::Sampler::kPgas;
        } else if (sampler != "ffbsx") {
          throw std::invalid_argument("sampler must be ffbsx or pgas");
        }
        cfg.particles = particles;
        cfg.stochastic_volatility = sv;
        cfg.seed = seed;
        return gibbs_run(y, st, cfg);
      },
      py::arg("y"), py::arg("seasons"), py::arg("orders"),
      py::arg("draws") = 1000, py::arg("burnin") = 300, py::arg("thin") = 10,
      py::arg("sampler") = "ffbsx", py::arg("particles") = 100,
      py::arg("sv") = false, py::arg("seed") = 0);

  m.def(
      "chain_ess",
      [](const Vector& chain) {
        bool zero = false;
        const double e = chain_ess(chain, &zero);
        return py::make_tuple(e, zero);
      },
      py::arg("chain"));
  m.def("update_rate", &update_rate, py::arg("chain"));
}
