#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <optional>

#include "dlrlab/experiments.hpp"
#include "dlrlab/version.hpp"

namespace py = pybind11;
using namespace dlrlab;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const DoubleArray& arr) {
  if (arr.ndim() != 2) throw std::invalid_argument("expected a 2-d array");
  Matrix m(static_cast<std::size_t>(arr.shape(0)), static_cast<std::size_t>(arr.shape(1)));
  std::memcpy(m.data(), arr.data(), sizeof(double) * m.size());
  return m;
}

py::array_t<double> to_array(const Matrix& m) {
  py::array_t<double> arr({m.rows(), m.cols()});
  std::memcpy(arr.mutable_data(), m.data(), sizeof(double) * m.size());
  return arr;
}

DlrMode mode_from_string(const std::string& mode) {
  if (mode == "pre") return DlrMode::PreNorm;
  if (mode == "post") return DlrMode::PostNorm;
  throw std::invalid_argument("mode must be 'pre' or 'post'");
}

Dataset dataset_from_arrays(const DoubleArray& pixels, const py::array_t<std::int64_t>& labels) {
  if (labels.ndim() != 1 || labels.shape(0) != pixels.shape(0))
    throw std::invalid_argument("labels must be 1-d with one entry per pixel row");
  ImageSet images{static_cast<std::size_t>(pixels.shape(0)), 1,
                  static_cast<std::size_t>(pixels.shape(1)), to_matrix(pixels)};
  LabelSet label_set;
  label_set.count = images.count;
  label_set.labels.resize(images.count);
  for (std::size_t n = 0; n < images.count; ++n) {
    const auto v = labels.at(n);
    if (v < 0 || v > 9) throw std::invalid_argument("labels must lie in [0,9]");
    label_set.labels[n] = static_cast<std::uint8_t>(v);
  }
  return make_dataset(std::move(images), std::move(label_set));
}

OptimizerConfig optimizer_from_kwargs(const std::string& algo, const py::dict& params) {
  OptimizerConfig opt;
  opt.algo = algorithm_from_string(algo);
  for (const auto& item : params)
    set_param(opt, py::cast<std::string>(item.first), py::cast<double>(item.second));
  return opt;
}

py::dict trial_to_dict(const TrialRecord& rec) {
  py::dict out;
  py::list t, acc;
  for (const auto& p : rec.curve) {
    t.append(p.t);
    acc.append(p.accuracy);
  }
  out["t"] = std::move(t);
  out["accuracy"] = std::move(acc);
  out["epochs_to_threshold"] = rec.epochs_to_threshold
                                   ? py::object(py::float_(*rec.epochs_to_threshold))
                                   : py::object(py::none());
  out["final_accuracy"] = rec.final_accuracy;
  py::list traces;
  for (const auto& trace : rec.traces) {
    py::dict entry;
    entry["layer_id"] = trace.layer_id;
    entry["t"] = trace.t;
    entry["mean_rate"] = trace.mean_rate;
    traces.append(std::move(entry));
  }
  out["rate_traces"] = std::move(traces);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Training core: logistic MLP, per-synapse dynamic learning rates, "
            "baseline optimizers, schedule fitting.";
  m.attr("__version__") = kVersion;

  m.def("logistic", &logistic, py::arg("z"), "Numerically stable sigmoid.");

  m.def(
      "one_hot", [](int label) { return one_hot(label); }, py::arg("label"),
      "Length-10 one-hot vector.");

  m.def(
      "load_idx_images",
      [](const std::string& path) {
        const auto set = load_idx_images(path);
        return py::make_tuple(to_array(set.pixels), set.rows, set.cols);
      },
      py::arg("path"), "Returns (pixels in [0,1] of shape (count, rows*cols), rows, cols).");

  m.def(
      "load_idx_labels",
      [](const std::string& path) {
        const auto set = load_idx_labels(path);
        py::array_t<std::uint8_t> arr(set.count);
        std::memcpy(arr.mutable_data(), set.labels.data(), set.count);
        return arr;
      },
      py::arg("path"));

  py::class_<Mlp>(m, "Mlp")
      .def_static(
          "init",
          [](std::size_t hidden, std::uint64_t seed, std::size_t input_dim,
             std::size_t output_dim) {
            return init_mlp(hidden, InitSpec{seed}, input_dim, output_dim);
          },
          py::arg("hidden"), py::arg("seed") = 0, py::arg("input_dim") = 784,
          py::arg("output_dim") = 10)
      .def_property_readonly("w1", [](const Mlp& net) { return to_array(net.w1); })
      .def_property_readonly("w2", [](const Mlp& net) { return to_array(net.w2); })
      .def_property_readonly("hidden_dim", &Mlp::hidden_dim)
      .def_property_readonly("input_dim", &Mlp::input_dim)
      .def_property_readonly("output_dim", &Mlp::output_dim);

  m.def(
      "forward",
      [](const Mlp& net, const DoubleArray& x) {
        return to_array(forward(net, to_matrix(x)).a2);
      },
      py::arg("net"), py::arg("x"), "Batched output activations.");

  m.def(
      "mse_loss",
      [](const DoubleArray& a2, const DoubleArray& y) {
        return mse_loss(to_matrix(a2), to_matrix(y));
      },
      py::arg("a2"), py::arg("y"));

  m.def(
      "backward",
      [](const Mlp& net, const DoubleArray& x, const DoubleArray& y) {
        const Matrix xm = to_matrix(x), ym = to_matrix(y);
        const auto trace = forward(net, xm);
        const auto grads = backward(net, trace, xm, ym);
        return py::make_tuple(to_array(grads.g1), to_array(grads.g2));
      },
      py::arg("net"), py::arg("x"), py::arg("y"),
      "Batch-averaged (g1, g2) of the mse loss.");

  m.def(
      "accuracy",
      [](const Mlp& net, const DoubleArray& pixels, const py::array_t<std::int64_t>& labels) {
        return accuracy(net, dataset_from_arrays(pixels, labels));
      },
      py::arg("net"), py::arg("pixels"), py::arg("labels"));

  m.def(
      "sgd_step",
      [](const DoubleArray& w, const DoubleArray& g, double eta) {
        Matrix wm = to_matrix(w);
        sgd_step(wm, to_matrix(g), eta);
        return to_array(wm);
      },
      py::arg("w"), py::arg("g"), py::arg("eta"));

  m.def(
      "neuron_norms",
      [](const DoubleArray& w, const std::string& mode) {
        return neuron_norms(to_matrix(w), mode_from_string(mode));
      },
      py::arg("w"), py::arg("mode") = "pre");

  m.def(
      "dlr_rates",
      [](const DoubleArray& w, double eta0, double alpha, const std::string& mode) {
        return to_array(dlr_rates(to_matrix(w), DlrConfig{eta0, alpha, mode_from_string(mode)}));
      },
      py::arg("w"), py::arg("eta0"), py::arg("alpha"), py::arg("mode") = "pre");

  m.def(
      "dlr_step",
      [](const DoubleArray& w, const DoubleArray& g, double eta0, double alpha,
         const std::string& mode) {
        Matrix wm = to_matrix(w);
        const auto rates =
            dlr_step(wm, to_matrix(g), DlrConfig{eta0, alpha, mode_from_string(mode)});
        return py::make_tuple(to_array(wm), to_array(rates));
      },
      py::arg("w"), py::arg("g"), py::arg("eta0"), py::arg("alpha"), py::arg("mode") = "pre",
      "Returns (updated weights, per-synapse rates).");

  m.def(
      "scheduled_rate",
      [](double t, double a, double b, double c, double d) {
        return scheduled_rate(t, ScheduleParams{a, b, c, d});
      },
      py::arg("t"), py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"));

  m.def(
      "fit_schedule",
      [](const std::vector<double>& t, const std::vector<double>& mean_rate, int layer_id) {
        RateTrace trace{layer_id, t, mean_rate};
        const auto fit = fit_schedule(trace);
        py::dict out;
        out["layer_id"] = layer_id;
        out["a"] = fit.params.a;
        out["b"] = fit.params.b;
        out["c"] = fit.params.c;
        out["d"] = fit.params.d;
        out["sse"] = fit.sse;
        out["converged"] = fit.converged;
        out["iterations"] = fit.iterations;
        return out;
      },
      py::arg("t"), py::arg("mean_rate"), py::arg("layer_id") = 1);

  m.def(
      "train_to_threshold",
      [](const DoubleArray& train_pixels, const py::array_t<std::int64_t>& train_labels,
         const DoubleArray& test_pixels, const py::array_t<std::int64_t>& test_labels,
         const std::string& algo, const py::dict& params, std::size_t hidden,
         std::size_t batch_size, double threshold, double max_epochs, std::size_t eval_interval,
         std::uint64_t seed) {
        TrialConfig cfg;
        cfg.hidden_units = hidden;
        cfg.opt = optimizer_from_kwargs(algo, params);
        cfg.batch_size = batch_size;
        cfg.threshold = threshold;
        cfg.max_epochs = max_epochs;
        cfg.eval_interval = eval_interval;
        cfg.seed = seed;
        const auto train = dataset_from_arrays(train_pixels, train_labels);
        const auto test = dataset_from_arrays(test_pixels, test_labels);
        TrialRecord rec;
        {
          py::gil_scoped_release release;
          rec = train_to_threshold(cfg, train, test);
        }
        return trial_to_dict(rec);
      },
      py::arg("train_pixels"), py::arg("train_labels"), py::arg("test_pixels"),
      py::arg("test_labels"), py::arg("algo") = "dlr-pre", py::arg("params") = py::dict(),
      py::arg("hidden") = 16, py::arg("batch_size") = 10, py::arg("threshold") = 0.95,
      py::arg("max_epochs") = 20.0, py::arg("eval_interval") = 10, py::arg("seed") = 1,
      "Seeded minibatch training; returns the accuracy curve, the epochs-to-threshold "
      "outcome, and per-layer rate traces for dlr runs.");
}
