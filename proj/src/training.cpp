#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "siren/experiments.hpp"

namespace siren {

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamConfig& config) {
  if (grads.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * grads[i];
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.eps);
  }
}

TrainingDiverged::TrainingDiverged(std::size_t epoch, double loss)
    : std::runtime_error("training diverged at epoch " + std::to_string(epoch) +
                         " (loss = " + std::to_string(loss) + ")"),
      epoch_(epoch) {}

namespace {

void validate(const TrainConfig& c) {
  const AdamConfig& a = c.adam;
  if (!(a.learning_rate > 0.0)) throw std::invalid_argument("train: learning_rate must be positive");
  if (!(a.beta1 > 0.0 && a.beta1 < 1.0 && a.beta2 > 0.0 && a.beta2 < 1.0)) {
    throw std::invalid_argument("train: betas must lie in (0, 1)");
  }
  if (!(a.eps > 0.0)) throw std::invalid_argument("train: eps must be positive");
}

void check_dataset(const SirenNet& net, const Dataset& d, const char* which) {
  if (d.inputs.rows() != d.targets.size() || d.size() == 0) {
    throw std::invalid_argument(std::string("train: malformed ") + which + " set");
  }
  if (d.inputs.cols() != net.input_dim() || net.output_dim() != 1) {
    throw std::invalid_argument(std::string("train: ") + which + " set does not match network dims");
  }
}

Vector column0(const Matrix& m) {
  Vector v(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) v[i] = m(i, 0);
  return v;
}

}  // namespace

ExperimentReport train(SirenNet& net, const Dataset& train_set, const Dataset& test_set,
                       const TrainConfig& config) {
  validate(config);
  check_dataset(net, train_set, "train");
  check_dataset(net, test_set, "test");
  const auto start = std::chrono::steady_clock::now();

  ExperimentReport rep;
  rep.scheme = scheme_name(net.scheme);
  rep.depth = net.depth();
  rep.width = net.width();
  rep.seed = config.seed;
  rep.epochs = config.epochs;
  rep.learning_rate = config.adam.learning_rate;
  rep.omega0 = net.omega0;
  rep.n_train = train_set.size();
  rep.n_test = test_set.size();
  rep.loss_curve.reserve(config.epochs);

  const std::size_t n = train_set.size();
  Vector params = net.flat_parameters();
  AdamState state(params.size());
  Vector grad;
  Matrix upstream(n, 1);
  BatchWorkspace ws;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    forward_batch(net, train_set.inputs, ws);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = ws.trace.output(i, 0) - train_set.targets[i];
      loss += r * r;
      upstream(i, 0) = 2.0 * r / static_cast<double>(n);
    }
    loss /= static_cast<double>(n);
    if (!std::isfinite(loss)) throw TrainingDiverged(epoch, loss);
    rep.loss_curve.push_back(loss);
    backward_batch(net, upstream, ws);
    ws.grad.flatten_into(grad);
    adam_step(params, grad, state, config.adam);
    net.set_flat_parameters(params);
  }

  const Vector train_pred = column0(predict(net, train_set.inputs));
  rep.train_mse = mse(train_pred, train_set.targets);
  if (!std::isfinite(rep.train_mse)) throw TrainingDiverged(config.epochs, rep.train_mse);
  const Vector test_pred = column0(predict(net, test_set.inputs));
  rep.test_mse = mse(test_pred, test_set.targets);
  rep.psnr = psnr(test_pred, test_set.targets);
  Vector residual(test_pred.size());
  for (std::size_t i = 0; i < residual.size(); ++i) residual[i] = test_pred[i] - test_set.targets[i];
  rep.snr = snr(test_set.targets, residual);
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace siren
