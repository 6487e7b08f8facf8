#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "siren/diagnostics.hpp"
#include "siren/experiments.hpp"
#include "siren/init.hpp"
#include "siren/mathfn.hpp"
#include "siren/network.hpp"

namespace py = pybind11;
using namespace siren;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// 1-D arrays become column vectors of scalar inputs.
Matrix to_matrix(const Array& a) {
  if (a.ndim() == 1) {
    Matrix m(a.shape(0), 1);
    for (py::ssize_t i = 0; i < a.shape(0); ++i) m(i, 0) = a.at(i);
    return m;
  }
  if (a.ndim() != 2) throw py::value_error("expected a 1-D or 2-D array");
  Matrix m(a.shape(0), a.shape(1));
  std::copy(a.data(), a.data() + a.size(), m.data().begin());
  return m;
}

Array to_array(const Matrix& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

Array to_array(const Vector& v) {
  Array out(v.size());
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

InitScheme scheme_arg(const std::string& name, double custom_cw, double custom_cb) {
  try {
    return parse_scheme(name, custom_cw, custom_cb);
  } catch (const std::invalid_argument& e) {
    throw py::value_error(e.what());
  }
}

py::dict report_dict(const ExperimentReport& r) {
  py::dict d;
  d["task"] = r.task;
  d["scheme"] = r.scheme;
  d["depth"] = r.depth;
  d["width"] = r.width;
  d["seed"] = r.seed;
  d["epochs"] = r.epochs;
  d["learning_rate"] = r.learning_rate;
  d["omega0"] = r.omega0;
  d["n_train"] = r.n_train;
  d["n_test"] = r.n_test;
  d["train_mse"] = r.train_mse;
  d["test_mse"] = r.test_mse;
  d["psnr"] = r.psnr;
  d["snr"] = r.snr;
  d["loss_curve"] = to_array(r.loss_curve);
  d["wall_seconds"] = r.wall_seconds;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sinusoidal networks with edge-of-chaos initialization";
  m.attr("__version__") = SIREN_VERSION;

  m.def("lambert_w0", &lambert_w0, py::arg("x"));
  m.def("sigma_a_closed_form", &sigma_a_closed_form, py::arg("c_w"), py::arg("c_b"));
  m.def("sigma_g", &sigma_g, py::arg("c_w"), py::arg("sigma_a"));
  m.def("c_b_on_curve", &c_b_on_curve, py::arg("c_w"));
  m.def("sigma1_cw", &sigma1_cw);
  m.def("sigma1_cb", &sigma1_cb);
  m.def(
      "sigma_a_fixed_point_iterate",
      [](double c_w, double c_b, double tol) {
        const auto r = sigma_a_fixed_point_iterate(c_w, c_b, tol);
        py::dict d;
        d["sigma_a"] = r.sigma_a;
        d["sigma_g"] = r.sigma_g;
        d["converged"] = r.converged;
        d["iterations"] = r.iterations;
        return d;
      },
      py::arg("c_w"), py::arg("c_b"), py::arg("tol") = 1e-15);
  m.def(
      "scheme_params",
      [](const std::string& name, double omega0, std::size_t n0, std::size_t width, std::size_t depth,
         double custom_cw, double custom_cb) {
        const auto p = resolve_scheme(scheme_arg(name, custom_cw, custom_cb), omega0, n0, width, depth).params;
        return py::make_tuple(p.c_w, p.c_b);
      },
      py::arg("scheme"), py::arg("omega0") = 1.0, py::arg("n0") = 1, py::arg("width") = 256,
      py::arg("depth") = 10, py::arg("custom_cw") = -1.0, py::arg("custom_cb") = -1.0,
      "(c_w, c_b) a scheme resolves to");

  py::class_<SirenNet>(m, "SirenNet")
      .def_static(
          "sample",
          [](const std::string& scheme, std::size_t width, std::size_t depth, double omega0, std::size_t n0,
             std::uint64_t seed, double custom_cw, double custom_cb) {
            const auto init = resolve_scheme(scheme_arg(scheme, custom_cw, custom_cb), omega0, n0, width, depth);
            Rng rng(seed);
            return sample_network(init, rng);
          },
          py::arg("scheme") = "proposed-sigma0", py::arg("width") = 256, py::arg("depth") = 10,
          py::arg("omega0") = 1.0, py::arg("n0") = 1, py::arg("seed") = 0, py::arg("custom_cw") = -1.0,
          py::arg("custom_cb") = -1.0)
      .def_static("from_json", [](const std::string& text) { return network_from_json(text); })
      .def("to_json", [](const SirenNet& net) { return network_to_json(net); })
      .def_property_readonly("depth", &SirenNet::depth)
      .def_property_readonly("width", &SirenNet::width)
      .def_property_readonly("input_dim", &SirenNet::input_dim)
      .def_property_readonly("parameter_count", &SirenNet::parameter_count)
      .def_readonly("omega0", &SirenNet::omega0)
      .def_property_readonly("scheme", [](const SirenNet& net) { return scheme_name(net.scheme); })
      .def("parameters", [](const SirenNet& net) { return to_array(net.flat_parameters()); })
      .def("set_parameters",
           [](SirenNet& net, const Array& flat) {
             if (flat.size() != static_cast<py::ssize_t>(net.parameter_count())) {
               throw py::value_error("parameter vector has the wrong length");
             }
             net.set_flat_parameters({flat.data(), static_cast<std::size_t>(flat.size())});
           })
      .def("__call__", [](const SirenNet& net, const Array& x) { return to_array(predict(net, to_matrix(x))); })
      .def("input_gradients",
           [](const SirenNet& net, const Array& x) { return to_array(input_gradients(net, to_matrix(x))); });

  m.def(
      "variance_profile",
      [](const std::string& scheme, const Array& inputs, std::size_t width, std::size_t depth,
         std::size_t ensembles, std::uint64_t seed, double omega0) {
        const auto p = variance_profile(scheme_arg(scheme, -1, -1), NetworkDims{1, width, depth, omega0}, ensembles,
                                        to_matrix(inputs), seed);
        py::dict d;
        Vector layer, preact, preact_se, jac, jac_se;
        for (const auto& l : p.layers) {
          layer.push_back(static_cast<double>(l.layer));
          preact.push_back(l.preact_std);
          preact_se.push_back(l.preact_se);
          jac.push_back(l.jac_scaled_std);
          jac_se.push_back(l.jac_se);
        }
        d["layer"] = to_array(layer);
        d["preact_std"] = to_array(preact);
        d["preact_se"] = to_array(preact_se);
        d["jac_scaled_std"] = to_array(jac);
        d["jac_se"] = to_array(jac_se);
        return d;
      },
      py::arg("scheme"), py::arg("inputs"), py::arg("width") = 256, py::arg("depth") = 10,
      py::arg("ensembles") = 20, py::arg("seed") = 0, py::arg("omega0") = 1.0);

  m.def(
      "ntk",
      [](const SirenNet& net, const Array& inputs) {
        const auto r = ntk_matrix(net, to_matrix(inputs));
        py::dict d;
        d["kernel"] = to_array(r.kernel);
        d["eigenvalues"] = to_array(r.eigenvalues);
        d["eigenvectors"] = to_array(r.eigenvectors);
        d["normalized_trace"] = r.normalized_trace;
        return d;
      },
      py::arg("net"), py::arg("inputs"));

  m.def(
      "output_spectrum",
      [](const SirenNet& net, double omega0, std::size_t samples, double lo, double hi) {
        const auto r = output_spectrum(net, samples, lo, hi, omega0);
        py::dict d;
        d["frequencies"] = to_array(r.frequencies);
        d["magnitudes"] = to_array(r.magnitudes);
        d["cutoff_bin"] = r.cutoff_bin;
        d["cutoff_energy_fraction"] = r.cutoff_energy_fraction;
        return d;
      },
      py::arg("net"), py::arg("omega0"), py::arg("samples") = 2048, py::arg("lo") = -1.0, py::arg("hi") = 1.0);

  m.def(
      "fit_1d",
      [](const std::string& scheme, std::size_t width, std::size_t depth, std::size_t epochs, double lr,
         std::size_t n_train, std::size_t n_test, std::uint64_t task_seed, std::uint64_t seed) {
        const FitTask task = make_function_task(1, n_train, n_test, task_seed);
        TrainConfig cfg;
        cfg.epochs = epochs;
        cfg.adam.learning_rate = lr;
        ExperimentReport r;
        {
          py::gil_scoped_release release;
          r = run_fit(task, RunSpec{scheme_arg(scheme, -1, -1), depth, width, seed}, cfg);
        }
        return report_dict(r);
      },
      py::arg("scheme") = "proposed-sigma0", py::arg("width") = 128, py::arg("depth") = 8,
      py::arg("epochs") = 5000, py::arg("lr") = 1e-4, py::arg("n_train") = 200, py::arg("n_test") = 1000,
      py::arg("task_seed") = 123, py::arg("seed") = 0);

  m.def("target_f1d", py::vectorize(&target_f1d));
  m.def("psnr", [](const Array& a, const Array& b) {
    if (a.size() != b.size()) throw py::value_error("length mismatch");
    return psnr({a.data(), static_cast<std::size_t>(a.size())}, {b.data(), static_cast<std::size_t>(b.size())});
  });
}
