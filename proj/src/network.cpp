#include "siren/network.hpp"

#include <Eigen/Dense>

#include "kernels.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace siren {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;
using ConstVec = Eigen::Map<const Eigen::RowVectorXd>;

ConstMap view(const Matrix& m) {
  return {m.data().data(), static_cast<Eigen::Index>(m.rows()),
          static_cast<Eigen::Index>(m.cols())};
}
MutMap view(Matrix& m) {
  return {m.data().data(), static_cast<Eigen::Index>(m.rows()),
          static_cast<Eigen::Index>(m.cols())};
}
ConstVec view(const Vector& v) { return {v.data(), static_cast<Eigen::Index>(v.size())}; }

void check_input(const SirenNet& net, std::size_t n) {
  if (net.depth() == 0) throw std::invalid_argument("network has no layers");
  if (n != net.input_dim()) {
    throw std::invalid_argument("input has dimension " + std::to_string(n) + ", network expects " +
                                std::to_string(net.input_dim()));
  }
}

void check_trace(const SirenNet& net, const ForwardTrace& trace) {
  if (trace.pre_activations.size() != net.depth() ||
      trace.activations.size() + 1 != net.depth()) {
    throw std::invalid_argument("trace does not belong to this network");
  }
}

Matrix affine_batch(const DenseLayer& layer, const Matrix& h) {
  Matrix z(h.rows(), layer.fan_out());
  view(z).noalias() = view(h) * view(layer.weight).transpose();
  view(z).rowwise() += view(layer.bias);
  return z;
}

}  // namespace

SirenNet::SirenNet(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw std::invalid_argument("SirenNet needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].bias.size() != layers_[i].fan_out()) {
      throw std::invalid_argument("layer " + std::to_string(i + 1) + ": bias length mismatch");
    }
    if (i > 0 && layers_[i].fan_in() != layers_[i - 1].fan_out()) {
      throw std::invalid_argument("layer " + std::to_string(i + 1) +
                                  ": fan_in does not match previous fan_out");
    }
  }
}

std::size_t SirenNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

const DenseLayer& SirenNet::layer(std::size_t l) const {
  if (l < 1 || l > layers_.size()) {
    throw std::out_of_range("layer index " + std::to_string(l) + " outside 1.." +
                            std::to_string(layers_.size()));
  }
  return layers_[l - 1];
}

DenseLayer& SirenNet::layer(std::size_t l) {
  return const_cast<DenseLayer&>(static_cast<const SirenNet&>(*this).layer(l));
}

Vector SirenNet::flat_parameters() const {
  Vector flat;
  flat.reserve(parameter_count());
  for (const auto& l : layers_) {
    flat.insert(flat.end(), l.weight.data().begin(), l.weight.data().end());
    flat.insert(flat.end(), l.bias.begin(), l.bias.end());
  }
  return flat;
}

void SirenNet::set_flat_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw std::invalid_argument("set_flat_parameters: expected " +
                                std::to_string(parameter_count()) + " values");
  }
  std::size_t k = 0;
  for (auto& l : layers_) {
    for (double& w : l.weight.data()) w = flat[k++];
    for (double& b : l.bias) b = flat[k++];
  }
}

Vector ParamGradient::flatten() const {
  Vector flat;
  flatten_into(flat);
  return flat;
}

void ParamGradient::flatten_into(Vector& out) const {
  out.clear();
  for (const auto& l : layers) {
    out.insert(out.end(), l.weight.data().begin(), l.weight.data().end());
    out.insert(out.end(), l.bias.begin(), l.bias.end());
  }
}

ForwardTrace forward(const SirenNet& net, std::span<const double> x) {
  check_input(net, x.size());
  ForwardTrace trace;
  trace.input.assign(x.begin(), x.end());
  trace.pre_activations.reserve(net.depth());
  trace.activations.reserve(net.depth() - 1);
  const Vector* h = &trace.input;
  for (std::size_t l = 1; l <= net.depth(); ++l) {
    const DenseLayer& layer = net.layer(l);
    Vector z = matvec(layer.weight, *h);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += layer.bias[i];
    trace.pre_activations.push_back(std::move(z));
    if (l < net.depth()) {
      Vector a(trace.pre_activations.back().size());
      for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::sin(trace.pre_activations.back()[i]);
      trace.activations.push_back(std::move(a));
      h = &trace.activations.back();
    }
  }
  trace.output = trace.pre_activations.back();
  return trace;
}

Matrix layer_jacobian(const SirenNet& net, const ForwardTrace& trace, std::size_t l) {
  check_trace(net, trace);
  const DenseLayer& layer = net.layer(l);
  Matrix j = layer.weight;
  if (l == net.depth()) return j;
  const Vector& z = trace.pre_activations[l - 1];
  for (std::size_t r = 0; r < j.rows(); ++r) {
    const double c = std::cos(z[r]);
    for (double& v : j.row(r)) v *= c;
  }
  return j;
}

Matrix end_to_end_jacobian(const SirenNet& net, const ForwardTrace& trace) {
  if (net.depth() < 3) {
    throw std::invalid_argument("end_to_end_jacobian needs at least two hidden layers (depth >= 3)");
  }
  Matrix product = layer_jacobian(net, trace, net.depth() - 1);
  for (std::size_t l = net.depth() - 2; l >= 2; --l) {
    product = matmul(product, layer_jacobian(net, trace, l));
  }
  return product;
}

Matrix input_gradient(const SirenNet& net, const ForwardTrace& trace) {
  check_trace(net, trace);
  Matrix g = net.layer(net.depth()).weight;
  for (std::size_t l = net.depth() - 1; l >= 1; --l) {
    g = matmul(g, layer_jacobian(net, trace, l));
  }
  return g;
}

ParamGradient param_gradient(const SirenNet& net, const ForwardTrace& trace,
                             std::span<const double> upstream) {
  check_trace(net, trace);
  if (upstream.size() != net.output_dim()) {
    throw std::invalid_argument("param_gradient: upstream has length " +
                                std::to_string(upstream.size()) + ", expected " +
                                std::to_string(net.output_dim()));
  }
  ParamGradient grad;
  grad.layers.resize(net.depth());
  Vector g(upstream.begin(), upstream.end());  // dPsi/dh_l seeded at the output
  for (std::size_t l = net.depth(); l >= 1; --l) {
    const DenseLayer& layer = net.layer(l);
    Vector delta = g;
    if (l < net.depth()) {
      const Vector& z = trace.pre_activations[l - 1];
      for (std::size_t i = 0; i < delta.size(); ++i) delta[i] *= std::cos(z[i]);
    }
    const Vector& h_prev = trace.hidden(l - 1);
    DenseLayer& out = grad.layers[l - 1];
    out.weight = Matrix(layer.fan_out(), layer.fan_in());
    for (std::size_t i = 0; i < delta.size(); ++i) {
      auto row = out.weight.row(i);
      for (std::size_t j = 0; j < h_prev.size(); ++j) row[j] = delta[i] * h_prev[j];
    }
    out.bias = delta;
    if (l > 1) g = matvec_transposed(layer.weight, delta);
  }
  return grad;
}

Vector ntk_feature(const SirenNet& net, std::span<const double> x) {
  if (net.output_dim() != 1) {
    throw std::invalid_argument("ntk_feature needs a scalar-output network");
  }
  const ForwardTrace trace = forward(net, x);
  const double one = 1.0;
  return param_gradient(net, trace, std::span<const double>(&one, 1)).flatten();
}

Matrix predict(const SirenNet& net, const Matrix& inputs) {
  check_input(net, inputs.cols());
  Matrix h = inputs;
  for (std::size_t l = 1; l <= net.depth(); ++l) {
    Matrix z = affine_batch(net.layer(l), h);
    if (l == net.depth()) return z;
    detail::sin_n(z.data().data(), z.data().data(), z.data().size());
    h = std::move(z);
  }
  return h;
}

namespace {

void forward_into(const SirenNet& net, const Matrix& inputs, BatchTrace& trace) {
  check_input(net, inputs.cols());
  const std::size_t depth = net.depth();
  trace.input = inputs;
  trace.pre.resize(depth);
  trace.hidden.resize(depth - 1);
  trace.slope.resize(depth - 1);
  for (std::size_t l = 1; l <= depth; ++l) {
    const DenseLayer& layer = net.layer(l);
    const Matrix& h = trace.hidden_at(l - 1);
    Matrix& z = trace.pre[l - 1];
    z.resize(h.rows(), layer.fan_out());
    view(z).noalias() = view(h) * view(layer.weight).transpose();
    view(z).rowwise() += view(layer.bias);
    if (l < depth) {
      Matrix& s = trace.hidden[l - 1];
      Matrix& c = trace.slope[l - 1];
      s.resize(z.rows(), z.cols());
      c.resize(z.rows(), z.cols());
      detail::sincos_n(z.data().data(), s.data().data(), c.data().data(), z.data().size());
    }
  }
  trace.output = trace.pre.back();
}

void backward_into(const SirenNet& net, const BatchTrace& trace, const Matrix& upstream,
                   ParamGradient& grad, Matrix& g, Matrix& next) {
  if (upstream.rows() != trace.input.rows() || upstream.cols() != net.output_dim()) {
    throw std::invalid_argument("backward_batch: upstream must be batch x d_out");
  }
  grad.layers.resize(net.depth());
  g = upstream;
  for (std::size_t l = net.depth(); l >= 1; --l) {
    const DenseLayer& layer = net.layer(l);
    if (l < net.depth()) {
      view(g).array() *= view(trace.slope[l - 1]).array();
    }
    DenseLayer& out = grad.layers[l - 1];
    out.weight.resize(layer.fan_out(), layer.fan_in());
    view(out.weight).noalias() = view(g).transpose() * view(trace.hidden_at(l - 1));
    out.bias.resize(layer.fan_out());
    Eigen::Map<Eigen::RowVectorXd>(out.bias.data(), static_cast<Eigen::Index>(out.bias.size())) =
        view(g).colwise().sum();
    if (l > 1) {
      next.resize(g.rows(), layer.fan_in());
      view(next).noalias() = view(g) * view(layer.weight);
      std::swap(g, next);
    }
  }
}

}  // namespace

BatchTrace forward_batch(const SirenNet& net, const Matrix& inputs) {
  BatchTrace trace;
  forward_into(net, inputs, trace);
  return trace;
}

void forward_batch(const SirenNet& net, const Matrix& inputs, BatchWorkspace& ws) {
  forward_into(net, inputs, ws.trace);
}

ParamGradient backward_batch(const SirenNet& net, const BatchTrace& trace,
                             const Matrix& upstream) {
  ParamGradient grad;
  Matrix g, next;
  backward_into(net, trace, upstream, grad, g, next);
  return grad;
}

void backward_batch(const SirenNet& net, const Matrix& upstream, BatchWorkspace& ws) {
  backward_into(net, ws.trace, upstream, ws.grad, ws.delta, ws.scratch);
}

std::vector<Matrix> output_sensitivities(const SirenNet& net, const BatchTrace& trace) {
  if (net.output_dim() != 1) {
    throw std::invalid_argument("output_sensitivities needs a scalar-output network");
  }
  std::vector<Matrix> deltas(net.depth());
  deltas.back() = Matrix(trace.input.rows(), 1, 1.0);
  for (std::size_t l = net.depth() - 1; l >= 1; --l) {
    Matrix d(trace.input.rows(), net.layer(l).fan_out());
    view(d).noalias() = view(deltas[l]) * view(net.layer(l + 1).weight);
    view(d).array() *= view(trace.slope[l - 1]).array();
    deltas[l - 1] = std::move(d);
  }
  return deltas;
}

Matrix input_gradients(const SirenNet& net, const Matrix& inputs) {
  const BatchTrace trace = forward_batch(net, inputs);
  const auto deltas = output_sensitivities(net, trace);
  Matrix out(inputs.rows(), net.input_dim());
  view(out).noalias() = view(deltas.front()) * view(net.layer(1).weight);
  return out;
}

}  // namespace siren
