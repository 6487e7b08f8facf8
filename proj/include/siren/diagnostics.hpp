#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "siren/init.hpp"
#include "siren/linalg.hpp"
#include "siren/network.hpp"

namespace siren {

/// Architecture shared by every network of a scan. depth is ignored by the
/// depth scans, which take their own list.
struct NetworkDims {
  std::size_t n0 = 1;
  std::size_t width = 256;
  std::size_t depth = 10;
  double omega0 = 1.0;
};

/// `count` equispaced points on [lo, hi], endpoints included, as a count x 1 matrix.
Matrix linspace_inputs(double lo, double hi, std::size_t count);

/// `count` points x_m = lo + m (hi - lo) / count, m = 0..count-1 (periodic grid).
Matrix periodic_grid(double lo, double hi, std::size_t count);

// ---------------------------------------------------------------------------
// Least-squares helpers

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares y = slope x + intercept. Needs >= 2 distinct x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// Forward / backward variance propagation

struct LayerStatistics {
  std::size_t layer = 0;            // 1-based hidden layer index
  double preact_std = 0.0;          // pooled std of z_l entries
  double preact_se = 0.0;           // preact_std / sqrt(ensembles * inputs)
  double jac_scaled_std = 0.0;      // sqrt(fan_in * Var(J_l entries))
  double jac_se = 0.0;
};

struct VarianceProfile {
  InitScheme scheme;
  NetworkDims dims;
  std::size_t ensembles = 0;
  std::size_t inputs = 0;
  std::uint64_t seed = 0;
  std::vector<LayerStatistics> layers;  // hidden layers 1..L-1

  const LayerStatistics& last_hidden() const { return layers.back(); }
};

/// Pools z_l and J_l = diag(cos z_l) W_l entries over ensemble members,
/// inputs and neurons for each hidden layer.
VarianceProfile variance_profile(const InitScheme& scheme, const NetworkDims& dims,
                                 std::size_t ensembles, const Matrix& inputs, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Gradient scaling with depth

struct GradientDepthRow {
  std::size_t depth = 0;
  double input_grad_std = 0.0;        // pooled std of dPsi/dx over inputs and ensembles
  std::vector<double> param_grad_var; // per layer l = 1..L, Var(dPsi/dW_l entries)
};

struct GradientDepthScan {
  InitScheme scheme;
  NetworkDims dims;
  std::size_t ensembles = 0;
  std::uint64_t seed = 0;
  std::vector<GradientDepthRow> rows;
  LinearFit log_std_fit;  // log(input_grad_std) against L
  /// Slope of log Var(dPsi/dW_l) against l over hidden layers 2..L-1 of the
  /// deepest network.
  LinearFit param_var_fit;
};

GradientDepthScan gradient_depth_scan(const InitScheme& scheme, const NetworkDims& dims,
                                      std::span<const std::size_t> depths, const Matrix& inputs,
                                      std::size_t ensembles, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Neural tangent kernel

struct NtkResult {
  Matrix kernel;        // |I| x |I|
  Vector eigenvalues;   // descending
  Matrix eigenvectors;  // column i pairs with eigenvalues[i]
  double normalized_trace = 0.0;  // Tr(K) / (|I| N)
};

/// Largest input count accepted by ntk_matrix.
inline constexpr std::size_t kMaxNtkInputs = 1024;

/// K_ij = grad_theta Psi(x_i) . grad_theta Psi(x_j), assembled layer by layer
/// as sum_l (D_l D_l^T) o (H_{l-1} H_{l-1}^T + 1), then eigendecomposed.
/// `decompose = false` skips the eigendecomposition.
NtkResult ntk_matrix(const SirenNet& net, const Matrix& inputs, bool decompose = true);

/// Tr(K) / (|I| N) without forming K.
double ntk_normalized_trace(const SirenNet& net, const Matrix& inputs);

enum class GrowthLaw { Exponential, Linear, Plateau, Unclassified };
std::string growth_law_name(GrowthLaw law);

struct GrowthFit {
  GrowthLaw law = GrowthLaw::Unclassified;
  LinearFit log_fit;     // log(trace) against L
  LinearFit linear_fit;  // trace against L
  double plateau_change = 0.0;  // |mean(last third) / mean(middle third) - 1|
  double ratio = 0.0;           // exp(slope of log trace over the deeper half)
};

/// Exponential: log fit slope > 0.05 and R^2 > 0.95 (and at least as good as
/// the linear fit); linear: R^2 > 0.95 with positive slope; plateau: last-third
/// mean within 5% of the middle-third mean.
GrowthFit classify_growth(std::span<const double> depths, std::span<const double> values);

struct NtkTraceRow {
  std::size_t depth = 0;
  double normalized_trace = 0.0;  // ensemble mean
  double trace_se = 0.0;
};

struct NtkTraceScan {
  InitScheme scheme;
  NetworkDims dims;
  std::size_t ensembles = 0;
  std::uint64_t seed = 0;
  std::vector<NtkTraceRow> rows;
  GrowthFit growth;
};

NtkTraceScan ntk_trace_depth_scan(const InitScheme& scheme, const NetworkDims& dims,
                                  std::span<const std::size_t> depths, const Matrix& inputs,
                                  std::size_t ensembles, std::uint64_t seed);

/// u(t) = sum_i exp(-t lambda_i) <u0, v_i> v_i for each t. Throws
/// std::invalid_argument on negative times or a length mismatch.
std::vector<Vector> linearized_dynamics(const NtkResult& ntk, std::span<const double> u0,
                                        std::span<const double> times);

// ---------------------------------------------------------------------------
// Fourier diagnostics

/// Grid of M samples on [lo, hi); bin k is angular frequency 2 pi k / (hi - lo).
/// The cutoff bin is ceil(omega0 (hi - lo) / (2 pi)); the energy fraction is
/// taken over bins 1..M/2 (DC excluded) strictly above it.
struct SpectrumReport {
  double lo = -1.0;
  double hi = 1.0;
  double omega0 = 0.0;
  Vector frequencies;  // angular, bins 0..M/2
  Vector magnitudes;   // |S_k|, bins 0..M/2
  std::size_t cutoff_bin = 0;
  double cutoff_energy_fraction = 0.0;
  double signal_energy = 0.0;  // sum of squared samples
};

/// Throws std::invalid_argument if omega0 maps above the Nyquist bin.
SpectrumReport signal_spectrum(std::span<const double> samples, double lo, double hi,
                               double omega0);

/// Spectrum of a scalar 1-D network on a periodic grid of `samples` points.
SpectrumReport output_spectrum(const SirenNet& net, std::size_t samples, double lo, double hi,
                               double omega0);

/// Power of each NTK eigenvector against unit-norm discrete Fourier vectors
/// phi_k(n) = exp(2 pi i k n / M) / sqrt(M). With unit eigenvectors each row
/// sums to 1.
struct OverlapMap {
  Matrix power;         // eigen-index x frequency, columns in signed order
  Vector frequencies;   // angular frequency of each column, ascending
  double omega0 = 0.0;  // marker at +-omega0
};

OverlapMap fourier_overlap(const NtkResult& ntk, double lo, double hi, double omega0);

/// Power-weighted mean |frequency| of each row of an overlap map.
Vector overlap_centroids(const OverlapMap& overlap);

// ---------------------------------------------------------------------------
// End-to-end Jacobian spectrum

struct SingularSpectrumRow {
  std::size_t depth = 0;
  Vector singular_values;       // descending, averaged rank by rank
  double max_singular = 0.0;    // mean largest singular value
  double normalized_max = 0.0;  // max_singular / 2, the edge of one unit-gain square layer
};

struct SingularSpectrumScan {
  InitScheme scheme;
  NetworkDims dims;
  std::size_t ensembles = 0;
  std::uint64_t seed = 0;
  std::vector<SingularSpectrumRow> rows;
};

SingularSpectrumScan jacobian_singular_spectrum(const InitScheme& scheme, const NetworkDims& dims,
                                                std::span<const std::size_t> depths,
                                                const Matrix& sample_points,
                                                std::size_t ensembles, std::uint64_t seed);

/// Seed used for ensemble member `member` of a scan at `depth`.
std::uint64_t ensemble_seed(std::uint64_t seed, std::size_t depth, std::size_t member);

}  // namespace siren
