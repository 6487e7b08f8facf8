#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "siren/init.hpp"
#include "siren/linalg.hpp"
#include "siren/network.hpp"

namespace siren {

// ---------------------------------------------------------------------------
// Metrics

/// Mean squared difference. Throws std::invalid_argument on length mismatch
/// or empty input.
double mse(std::span<const double> a, std::span<const double> b);

/// 10 log10(peak^2 / mse). Returns +infinity when the inputs are identical.
double psnr(std::span<const double> a, std::span<const double> b, double peak = 1.0);

/// 10 log10(sum signal^2 / sum residual^2). +infinity for a zero residual.
double snr(std::span<const double> signal, std::span<const double> residual);

// ---------------------------------------------------------------------------
// Synthetic targets on [-1, 1]^dim

double target_f1d(double x);
double target_f2d(double x, double y);
double target_f3d(double x, double y, double z);

/// Procedural grayscale test pattern on [-1, 1]^2 with values in [0, 1]: a
/// radial chirp, a bright disc and a dark rectangle with sharp edges.
double test_pattern(double x, double y);

// ---------------------------------------------------------------------------
// Images

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  Vector pixels;  // row-major, values in [0, 1]

  double at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
};

/// Reads binary (P5) or ASCII (P2) PGM, maxval up to 65535.
GrayImage read_pgm(const std::string& path);
/// Writes 8-bit binary PGM, clamping to [0, 1].
void write_pgm(const GrayImage& image, const std::string& path);

/// Samples `fn` on a side x side grid with coordinates linspace(-1, 1, side).
GrayImage render(const std::function<double(double, double)>& fn, std::size_t side);

/// Bilinear interpolation of an image identified with [-1, 1]^2.
double sample_bilinear(const GrayImage& image, double x, double y);

/// side^2 coordinates, row-major with x along columns, as a side^2 x 2 matrix.
Matrix grid_coordinates(std::size_t side);

// ---------------------------------------------------------------------------
// Datasets

struct Dataset {
  Matrix inputs;   // samples x n0
  Vector targets;  // one scalar target per sample

  std::size_t size() const { return targets.size(); }
};

struct FitTask {
  std::string name;
  Dataset train;
  Dataset test;
  double omega0 = 1.0;
  /// Grid side for image tasks (train resolution), 0 otherwise.
  std::size_t grid_side = 0;
};

/// Angular Nyquist frequency of a uniform grid with the same point count:
/// pi * m / 2 with m = points^(1/dim) samples along each unit-2 axis.
double equivalent_nyquist_omega(std::size_t points, std::size_t dim);

/// Random-split fitting task for f_1d, f_2d or f_3d on [-1, 1]^dim. Train and
/// test points are independent uniform draws. omega0 follows the train-set
/// equivalent Nyquist frequency unless `omega0_override` is positive.
FitTask make_function_task(std::size_t dim, std::size_t n_train, std::size_t n_test,
                           std::uint64_t seed, double omega0_override = 0.0);

struct DenoiseData {
  Dataset train;        // noisy targets on the side x side grid
  Vector clean_train;   // clean targets at the same points
  Vector noise;         // normalized field eta~ (zero mean, unit variance)
  std::vector<double> fx, fy, phase;  // drawn waves
  double f_nyq = 0.0;
};

/// Noisy targets y + sigma_noise * eta~, with eta a sum of `waves` random
/// sinusoids, frequencies ~ U(2 f_nyq, 4 f_nyq), phases ~ U(0, 2 pi), and eta~
/// its exact normalization on the grid.
DenoiseData make_denoise_dataset(const GrayImage& image, std::size_t waves, double f_nyq,
                                 double sigma_noise, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Training

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  Vector m;
  Vector v;
  std::size_t step = 0;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update of `params` in place.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamConfig& config);

struct TrainConfig {
  AdamConfig adam;
  std::size_t epochs = 5000;
  std::uint64_t seed = 0;
  /// Record the loss every epoch (always on) and keep the trained net.
};

struct ExperimentReport {
  std::string task;
  std::string scheme;
  std::size_t depth = 0;
  std::size_t width = 0;
  std::uint64_t seed = 0;
  std::size_t epochs = 0;
  double learning_rate = 0.0;
  double omega0 = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double train_mse = 0.0;
  double test_mse = 0.0;
  double psnr = 0.0;  // test PSNR, peak 1
  double snr = 0.0;   // test SNR
  /// Spectral energy above omega0 of the test-resolution output (image tasks).
  std::optional<double> cutoff_energy_fraction;
  Vector loss_curve;  // train MSE before each update
  double wall_seconds = 0.0;
};

/// Thrown when the training loss stops being finite.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(std::size_t epoch, double loss);
  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t epoch_;
};

/// Full-batch MSE training with Adam. loss_curve[0] is the initial MSE; the
/// reported train_mse is measured after the final update.
ExperimentReport train(SirenNet& net, const Dataset& train_set, const Dataset& test_set,
                       const TrainConfig& config);

// ---------------------------------------------------------------------------
// Experiment drivers

struct RunSpec {
  InitScheme scheme;
  std::size_t depth = 8;
  std::size_t width = 128;
  std::uint64_t seed = 0;
};

/// Samples a network for `task` and trains it.
ExperimentReport run_fit(const FitTask& task, const RunSpec& run, const TrainConfig& config);

struct ImageFitOptions {
  std::size_t depth = 10;
  std::size_t width = 256;
  std::size_t upsample = 4;
  std::uint64_t seed = 0;
  /// High-resolution ground truth; when absent the upsampled field is only
  /// analysed spectrally.
  std::function<double(double, double)> ground_truth;
};

struct ImageFitResult {
  ExperimentReport report;  // test metrics are on the upsampled grid when ground truth exists
  GrayImage fitted;         // native resolution
  GrayImage upsampled;
};

/// Trains each scheme on the image (grid coordinates in [-1, 1]^2) and
/// evaluates at native and `upsample`x resolution.
std::vector<ImageFitResult> image_fit_experiment(const GrayImage& image,
                                                 std::span<const InitScheme> schemes,
                                                 const ImageFitOptions& options,
                                                 const TrainConfig& config);

struct DenoiseOptions {
  std::size_t side = 64;
  std::size_t waves = 10;
  double sigma_noise = 0.05;
  std::size_t depth = 10;
  std::size_t width = 256;
  std::size_t test_side = 256;
  std::uint64_t seed = 0;
};

/// Trains on the noisy grid, reports the final (noisy) train loss and the MSE
/// against the clean pattern on a test_side x test_side grid.
ExperimentReport denoise_experiment(const std::function<double(double, double)>& clean,
                                    const InitScheme& scheme, const DenoiseOptions& options,
                                    const TrainConfig& config);

/// Cutoff energy fraction of a field on the inclusive [-1, 1]^2 grid, pooled
/// over all rows and columns.
double field_cutoff_fraction(const GrayImage& field, double omega0);

struct SweepSpec {
  std::vector<InitScheme> schemes;
  std::vector<std::size_t> depths;
  std::vector<std::size_t> widths;
  std::vector<std::uint64_t> seeds;
};

/// Cross product of schemes x depths x widths x seeds on one task. Cells are
/// independent and may run concurrently; output order is the loop order.
std::vector<ExperimentReport> depth_width_sweep(const FitTask& task, const SweepSpec& spec,
                                                const TrainConfig& config);

}  // namespace siren
