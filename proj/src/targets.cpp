#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "siren/experiments.hpp"

namespace siren {

double target_f1d(double x) {
  return std::sin(3 * x) + 0.7 * std::cos(8 * x) + 0.3 * std::sin(40 * x + 1) + std::exp(-x * x);
}

double target_f2d(double x, double y) {
  return std::sin(3 * x) * std::cos(3 * y) + std::sin(15 * x - 2) * std::cos(15 * y) +
         std::exp(-(x * x + y * y));
}

double target_f3d(double x, double y, double z) {
  return std::sin(5 * x) * std::cos(12 * y) * std::sin(3 * z) + std::exp(-(x * x + y * y + z * z));
}

double test_pattern(double x, double y) {
  const double r2 = x * x + y * y;
  // Chirp with local frequency 8r cycles per unit, under 12 in the corners.
  double v = 0.5 + 0.2 * std::cos(2 * std::numbers::pi * 4.0 * r2);
  const double dx = x + 0.35, dy = y - 0.3;
  if (dx * dx + dy * dy < 0.09) v += 0.25;
  if (x > 0.2 && x < 0.75 && y > -0.7 && y < -0.15) v -= 0.3;
  return std::clamp(v, 0.0, 1.0);
}

double equivalent_nyquist_omega(std::size_t points, std::size_t dim) {
  if (points == 0 || dim == 0) throw std::invalid_argument("equivalent_nyquist_omega: empty grid");
  const double per_axis = std::pow(static_cast<double>(points), 1.0 / static_cast<double>(dim));
  return std::numbers::pi * per_axis / 2.0;
}

namespace {

double evaluate_target(std::size_t dim, const double* x) {
  switch (dim) {
    case 1: return target_f1d(x[0]);
    case 2: return target_f2d(x[0], x[1]);
    default: return target_f3d(x[0], x[1], x[2]);
  }
}

Dataset sample_uniform(std::size_t dim, std::size_t n, Rng& rng) {
  Dataset d{Matrix(n, dim), Vector(n)};
  for (std::size_t i = 0; i < n; ++i) {
    double* row = d.inputs.data().data() + i * dim;
    for (std::size_t k = 0; k < dim; ++k) row[k] = rng.uniform(-1.0, 1.0);
    d.targets[i] = evaluate_target(dim, row);
  }
  return d;
}

}  // namespace

FitTask make_function_task(std::size_t dim, std::size_t n_train, std::size_t n_test,
                           std::uint64_t seed, double omega0_override) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("make_function_task: dim must be 1, 2 or 3");
  if (n_train == 0 || n_test == 0) throw std::invalid_argument("make_function_task: empty split");
  Rng rng(seed, 0x7a5c);
  FitTask task;
  task.name = std::to_string(dim) + "d";
  Rng train_rng = rng.fork(1);
  Rng test_rng = rng.fork(2);
  task.train = sample_uniform(dim, n_train, train_rng);
  task.test = sample_uniform(dim, n_test, test_rng);
  task.omega0 = omega0_override > 0.0 ? omega0_override : equivalent_nyquist_omega(n_train, dim);
  return task;
}

DenoiseData make_denoise_dataset(const GrayImage& image, std::size_t waves, double f_nyq,
                                 double sigma_noise, std::uint64_t seed) {
  if (image.width < 2 || image.height < 2) throw std::invalid_argument("make_denoise_dataset: image too small");
  if (!(f_nyq > 0.0)) throw std::invalid_argument("make_denoise_dataset: f_nyq must be positive");
  const std::size_t n = image.width * image.height;
  DenoiseData out;
  out.f_nyq = f_nyq;
  Rng rng(seed, 0xde2015e);
  for (std::size_t k = 0; k < waves; ++k) {
    out.fx.push_back(rng.uniform(2 * f_nyq, 4 * f_nyq));
    out.fy.push_back(rng.uniform(2 * f_nyq, 4 * f_nyq));
    out.phase.push_back(rng.uniform(0.0, 2 * std::numbers::pi));
  }

  out.train.inputs = Matrix(n, 2);
  out.train.targets.resize(n);
  out.clean_train.resize(n);
  out.noise.assign(n, 0.0);
  for (std::size_t r = 0; r < image.height; ++r) {
    const double y = -1.0 + 2.0 * static_cast<double>(r) / static_cast<double>(image.height - 1);
    for (std::size_t c = 0; c < image.width; ++c) {
      const double x = -1.0 + 2.0 * static_cast<double>(c) / static_cast<double>(image.width - 1);
      const std::size_t i = r * image.width + c;
      out.train.inputs(i, 0) = x;
      out.train.inputs(i, 1) = y;
      out.clean_train[i] = image.at(r, c);
      double eta = 0.0;
      for (std::size_t k = 0; k < waves; ++k) {
        eta += std::sin(2 * std::numbers::pi * (out.fx[k] * x + out.fy[k] * y) + out.phase[k]);
      }
      out.noise[i] = eta;
    }
  }

  double mean = 0.0;
  for (double v : out.noise) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double& v : out.noise) {
    v -= mean;
    var += v * v;
  }
  var /= static_cast<double>(n);
  const double scale = var > 0.0 ? 1.0 / std::sqrt(var) : 0.0;
  for (double& v : out.noise) v *= scale;

  for (std::size_t i = 0; i < n; ++i) {
    out.train.targets[i] = sigma_noise == 0.0 ? out.clean_train[i]
                                              : out.clean_train[i] + sigma_noise * out.noise[i];
  }
  return out;
}

}  // namespace siren
