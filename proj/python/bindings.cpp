#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kspacings/empirical_modulus.hpp"
#include "kspacings/errors.hpp"
#include "kspacings/gamma_kernel.hpp"
#include "kspacings/harness.hpp"
#include "kspacings/regimes.hpp"
#include "kspacings/spacings_lab.hpp"
#include "kspacings/transform_maps.hpp"

namespace py = pybind11;
namespace ks = kspacings;

namespace {

py::dict modulus_dict(const ks::ModulusReport& r) {
  py::dict d;
  d["a"] = r.a;
  d["N"] = r.n_points;
  d["lambda"] = r.lambda;
  d["positive_part"] = r.positive_part;
  d["negative_part"] = r.negative_part;
  d["b_n"] = r.b_n;
  d["k_n"] = r.k_n;
  d["theta"] = r.theta;
  return d;
}

py::dict increment_dict(const ks::IncrementReport& r) {
  py::dict d;
  d["k"] = r.k;
  d["mu"] = r.mu;
  d["a"] = r.a;
  d["log_a"] = r.log_a;
  d["sup"] = r.sup_value;
  d["log_sup"] = r.log_sup;
  d["ratio"] = r.ratio;
  d["argmax_h"] = r.argmax_h;
  d["argmax_end"] = std::string(ks::to_string(r.argmax_end));
  d["competing_scale"] = r.competing_scale;
  d["secondary_ratio"] = r.secondary_ratio;
  return d;
}

ks::RegimeSpec make_spec(const std::string& regime, double c, std::uint32_t k,
                         std::optional<double> delta, const std::string& c_schedule) {
  ks::RegimeSpec spec;
  spec.variant = ks::parse_variant(regime);
  spec.c = c;
  spec.c_schedule = c_schedule;
  spec.k_mode = k == 0 ? ks::KMode::grow() : ks::KMode::fixed(k);
  spec.delta = delta;
  spec.validate();
  return spec;
}

}  // namespace

PYBIND11_MODULE(_kspacings, m) {
  m.doc() = "Non-overlapping k-spacings: gamma kernel, sampling, oscillation modulus, regimes";

  py::register_exception<ks::DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ks::PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<ks::ResourceError>(m, "ResourceError", PyExc_MemoryError);
  py::register_exception<ks::NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<ks::IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<ks::ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("gamma_cdf", [](std::int64_t k, double x) { return ks::gamma::cdf(ks::gamma::Order(k), x); },
        py::arg("k"), py::arg("x"));
  m.def("gamma_survival",
        [](std::int64_t k, double x) { return ks::gamma::survival(ks::gamma::Order(k), x); },
        py::arg("k"), py::arg("x"));
  m.def("gamma_log_survival",
        [](std::int64_t k, double x) { return ks::gamma::log_survival(ks::gamma::Order(k), x); },
        py::arg("k"), py::arg("x"));
  m.def("gamma_pdf", [](std::int64_t k, double x) { return ks::gamma::pdf(ks::gamma::Order(k), x); },
        py::arg("k"), py::arg("x"));
  m.def("gamma_quantile",
        [](std::int64_t k, double s) { return ks::gamma::quantile(ks::gamma::Order(k), s); },
        py::arg("k"), py::arg("s"));
  m.def(
      "tail_threshold_log",
      [](std::int64_t k, double delta) { return ks::gamma::tail_threshold(k, delta).log_value; },
      py::arg("k"), py::arg("delta"));

  m.def(
      "sample_spacings",
      [](std::int64_t k, std::int64_t n_spacings, std::uint64_t seed, std::uint64_t replicate) {
        const ks::SpacingsSample s = ks::sample_spacings(k, n_spacings, seed, replicate);
        py::dict d;
        d["k"] = s.k;
        d["N"] = s.n_spacings;
        d["n"] = s.n;
        d["y"] = s.y;
        d["d"] = s.d;
        d["mu"] = s.mu;
        d["seed"] = s.seed;
        d["w"] = ks::uniformize(s).w;
        return d;
      },
      py::arg("k"), py::arg("N"), py::arg("seed"), py::arg("replicate") = 0);

  m.def(
      "oscillation_modulus",
      [](std::vector<double> points, double a) {
        return modulus_dict(
            ks::oscillation_modulus(ks::EmpiricalPath::from_unsorted(std::move(points)), a));
      },
      py::arg("points"), py::arg("a"));
  m.def(
      "brute_force_modulus",
      [](std::vector<double> points, double a) {
        return ks::brute_force_modulus(ks::EmpiricalPath::from_unsorted(std::move(points)), a);
      },
      py::arg("points"), py::arg("a"));
  m.def("lil_normalizer", &ks::lil_normalizer, py::arg("a"));

  m.def(
      "psi_increment_sup",
      [](std::uint32_t k, double mu, double a) {
        return increment_dict(ks::psi_increment_sup(ks::PsiMap{k, mu}, a));
      },
      py::arg("k"), py::arg("mu"), py::arg("a"));
  m.def(
      "phi_increment_sup",
      [](std::uint32_t k, double a) { return increment_dict(ks::phi_increment_sup(ks::PhiMap{k}, a)); },
      py::arg("k"), py::arg("a"));

  m.def("erdos_renyi_beta", &ks::erdos_renyi_beta, py::arg("c"));
  m.def("h_function", &ks::h_function, py::arg("s"));
  m.def(
      "bandwidth",
      [](const std::string& regime, double c, std::uint64_t n_spacings, std::uint32_t k,
         std::optional<double> delta, const std::string& c_schedule) {
        return ks::bandwidth(make_spec(regime, c, k, delta, c_schedule), n_spacings);
      },
      py::arg("regime"), py::arg("c"), py::arg("N"), py::arg("k") = 1,
      py::arg("delta") = py::none(), py::arg("c_schedule") = "",
      "k = 0 selects the growing-k rule (requires delta).");
  m.def(
      "check_conditions",
      [](const std::string& regime, double c, std::vector<std::uint64_t> n_grid, std::uint32_t k,
         std::optional<double> delta, const std::string& c_schedule) {
        py::list out;
        for (const auto& r :
             ks::check_conditions(make_spec(regime, c, k, delta, c_schedule), n_grid)) {
          py::dict d;
          d["id"] = r.id;
          d["values"] = r.values;
          d["required"] = std::string(ks::to_string(r.required));
          d["verdict"] = std::string(ks::to_string(r.verdict));
          d["slope"] = r.slope;
          d["applicable"] = r.applicable;
          out.append(d);
        }
        return out;
      },
      py::arg("regime"), py::arg("c"), py::arg("n_grid"), py::arg("k") = 1,
      py::arg("delta") = py::none(), py::arg("c_schedule") = "");

  m.def(
      "run_experiment",
      [](const std::string& config_json, unsigned threads) {
        const ks::ExperimentConfig config = ks::parse_config(config_json);
        ks::ExperimentResult result;
        {
          py::gil_scoped_release release;
          result = ks::run_experiment(config, ks::RunOptions{threads});
        }
        return py::make_tuple(ks::records_csv(result.records),
                              ks::summary_csv(ks::summarize(result.records)));
      },
      py::arg("config_json"), py::arg("threads") = 1,
      "Returns (records_csv, summary_csv) without touching the file system.");
}
