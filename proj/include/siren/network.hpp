#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "siren/init.hpp"
#include "siren/linalg.hpp"

namespace siren {

/// One affine map z = W h + b. `weight` is fan_out x fan_in.
struct DenseLayer {
  Matrix weight;
  Vector bias;

  std::size_t fan_in() const { return weight.cols(); }
  std::size_t fan_out() const { return weight.rows(); }
  bool operator==(const DenseLayer&) const = default;
};

/// Sine-activated MLP, Psi(x) = W_L sin(... sin(W_1 x + b_1) ...) + b_L.
///
/// Layers are numbered 1..L as in the usual notation; every layer but the last
/// is followed by sin, the last is linear.
class SirenNet {
 public:
  SirenNet() = default;
  explicit SirenNet(std::vector<DenseLayer> layers);

  std::size_t depth() const { return layers_.size(); }
  std::size_t input_dim() const { return layers_.front().fan_in(); }
  std::size_t output_dim() const { return layers_.back().fan_out(); }
  std::size_t width() const { return layers_.front().fan_out(); }
  std::size_t parameter_count() const;

  /// Layer l, 1 <= l <= depth(). Throws std::out_of_range.
  const DenseLayer& layer(std::size_t l) const;
  DenseLayer& layer(std::size_t l);
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  /// Flat parameter vector: layer 1..L, weights row-major, then bias.
  Vector flat_parameters() const;
  void set_flat_parameters(std::span<const double> flat);

  // Provenance, carried through serialization.
  InitScheme scheme;
  double omega0 = 1.0;
  std::uint64_t seed = 0;

  bool operator==(const SirenNet&) const = default;

 private:
  std::vector<DenseLayer> layers_;
};

/// Pre-activations z_l (l = 1..L, stored at l-1) and hidden activations
/// h_l = sin(z_l) (l = 1..L-1) for one input. output == z_L.
struct ForwardTrace {
  Vector input;
  std::vector<Vector> pre_activations;
  std::vector<Vector> activations;
  Vector output;

  /// h_l with h_0 = input.
  const Vector& hidden(std::size_t l) const { return l == 0 ? input : activations[l - 1]; }
};

/// Per-layer parameter gradient with the shapes of the network.
struct ParamGradient {
  std::vector<DenseLayer> layers;

  /// Same order as SirenNet::flat_parameters.
  Vector flatten() const;
  void flatten_into(Vector& out) const;
};

ForwardTrace forward(const SirenNet& net, std::span<const double> x);

/// J_l = d h_l / d h_{l-1} = diag(cos z_l) W_l for l < L, and W_L for l = L.
Matrix layer_jacobian(const SirenNet& net, const ForwardTrace& trace, std::size_t l);

/// d h_{L-1} / d h_1 = J_{L-1} ... J_2 (width x width). Needs depth >= 3.
Matrix end_to_end_jacobian(const SirenNet& net, const ForwardTrace& trace);

/// d Psi / d x, d_out x n0, first-layer factor included.
Matrix input_gradient(const SirenNet& net, const ForwardTrace& trace);

/// Reverse pass seeded with `upstream` = dLoss/dPsi (length d_out).
ParamGradient param_gradient(const SirenNet& net, const ForwardTrace& trace,
                             std::span<const double> upstream);

/// grad_theta Psi(x) flattened in SirenNet::flat_parameters order. Scalar
/// output only; throws std::invalid_argument otherwise.
Vector ntk_feature(const SirenNet& net, std::span<const double> x);

// ---------------------------------------------------------------------------
// Batched evaluation. Inputs are B x n0 with one sample per row.

/// Network outputs, B x d_out.
Matrix predict(const SirenNet& net, const Matrix& inputs);

/// Forward pass keeping every layer, for reverse-mode passes over a batch.
struct BatchTrace {
  Matrix input;                // B x n0
  std::vector<Matrix> pre;     // z_l, B x fan_out(l)
  std::vector<Matrix> hidden;  // h_l = sin(z_l), l = 1..L-1
  std::vector<Matrix> slope;   // cos(z_l), l = 1..L-1
  Matrix output;               // B x d_out

  const Matrix& hidden_at(std::size_t l) const { return l == 0 ? input : hidden[l - 1]; }
};

BatchTrace forward_batch(const SirenNet& net, const Matrix& inputs);

/// Gradient of sum_b upstream(b,:) . Psi(x_b) with respect to all parameters.
ParamGradient backward_batch(const SirenNet& net, const BatchTrace& trace, const Matrix& upstream);

/// Buffers for repeated batch passes (one per training loop). The in-place
/// overloads below give the same results as the value-returning ones.
struct BatchWorkspace {
  BatchTrace trace;
  ParamGradient grad;
  Matrix delta;
  Matrix scratch;
};

/// Fills ws.trace.
void forward_batch(const SirenNet& net, const Matrix& inputs, BatchWorkspace& ws);
/// Fills ws.grad from ws.trace.
void backward_batch(const SirenNet& net, const Matrix& upstream, BatchWorkspace& ws);

/// Per-sample sensitivities delta_l = dPsi/dz_l (B x fan_out(l), l = 1..L) of
/// a scalar-output network.
std::vector<Matrix> output_sensitivities(const SirenNet& net, const BatchTrace& trace);

/// dPsi/dx for each sample of a scalar-output network, B x n0.
Matrix input_gradients(const SirenNet& net, const Matrix& inputs);

// ---------------------------------------------------------------------------
// Serialization: JSON with dims, scheme, seed and parameter arrays. Doubles
// are written in shortest round-trip form, so save/load is bit-exact.

std::string network_to_json(const SirenNet& net);
SirenNet network_from_json(std::string_view text);
void save_network(const SirenNet& net, const std::string& path);
SirenNet load_network(const std::string& path);

}  // namespace siren
