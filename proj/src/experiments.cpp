#include <chrono>
#include <cmath>
#include <stdexcept>

#include "siren/diagnostics.hpp"
#include "siren/experiments.hpp"
#include "siren/parallel.hpp"

namespace siren {

ExperimentReport run_fit(const FitTask& task, const RunSpec& run, const TrainConfig& config) {
  const ResolvedInit init =
      resolve_scheme(run.scheme, task.omega0, task.train.inputs.cols(), run.width, run.depth);
  Rng rng(run.seed, 0x517e);
  SirenNet net = sample_network(init, rng);
  net.seed = run.seed;
  TrainConfig cfg = config;
  cfg.seed = run.seed;
  ExperimentReport rep = train(net, task.train, task.test, cfg);
  rep.task = task.name;
  return rep;
}

namespace {

Dataset image_dataset(const GrayImage& image) {
  if (image.width != image.height) throw std::invalid_argument("image must be square");
  return Dataset{grid_coordinates(image.width), image.pixels};
}

GrayImage predict_field(const SirenNet& net, std::size_t side) {
  const Matrix out = predict(net, grid_coordinates(side));
  GrayImage img{side, side, Vector(side * side)};
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = out(i, 0);
  return img;
}

}  // namespace

double field_cutoff_fraction(const GrayImage& field, double omega0) {
  if (field.width != field.height || field.width < 2) {
    throw std::invalid_argument("field_cutoff_fraction: need a square field");
  }
  const std::size_t m = field.width;
  const double period = 2.0 * static_cast<double>(m) / static_cast<double>(m - 1);
  double above = 0.0, total = 0.0;
  Vector line(m);
  for (int axis = 0; axis < 2; ++axis) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) line[j] = axis == 0 ? field.at(i, j) : field.at(j, i);
      const SpectrumReport s = signal_spectrum(line, -1.0, -1.0 + period, omega0);
      double energy = 0.0;
      for (std::size_t k = 1; k < s.magnitudes.size(); ++k) {
        energy += (2 * k == m ? 1.0 : 2.0) * s.magnitudes[k] * s.magnitudes[k];
      }
      total += energy;
      above += s.cutoff_energy_fraction * energy;
    }
  }
  return total > 0.0 ? above / total : 0.0;
}

std::vector<ImageFitResult> image_fit_experiment(const GrayImage& image,
                                                 std::span<const InitScheme> schemes,
                                                 const ImageFitOptions& options,
                                                 const TrainConfig& config) {
  if (options.upsample < 1) throw std::invalid_argument("image_fit_experiment: upsample must be >= 1");
  const Dataset train_set = image_dataset(image);
  const std::size_t side = image.width;
  const std::size_t hi_side = side * options.upsample;
  const double omega0 = equivalent_nyquist_omega(side * side, 2);

  Dataset test_set = train_set;
  if (options.ground_truth) {
    test_set.inputs = grid_coordinates(hi_side);
    test_set.targets.resize(hi_side * hi_side);
    for (std::size_t i = 0; i < test_set.targets.size(); ++i) {
      test_set.targets[i] = options.ground_truth(test_set.inputs(i, 0), test_set.inputs(i, 1));
    }
  }

  std::vector<ImageFitResult> results(schemes.size());
  for (std::size_t s = 0; s < schemes.size(); ++s) {
    const ResolvedInit init = resolve_scheme(schemes[s], omega0, 2, options.width, options.depth);
    Rng rng(options.seed, 0x1a6e);
    SirenNet net = sample_network(init, rng);
    net.seed = options.seed;
    TrainConfig cfg = config;
    cfg.seed = options.seed;
    ImageFitResult& r = results[s];
    r.report = train(net, train_set, test_set, cfg);
    r.report.task = "image";
    r.fitted = predict_field(net, side);
    r.upsampled = predict_field(net, hi_side);
    r.report.cutoff_energy_fraction = field_cutoff_fraction(r.upsampled, omega0);
  }
  return results;
}

ExperimentReport denoise_experiment(const std::function<double(double, double)>& clean,
                                    const InitScheme& scheme, const DenoiseOptions& options,
                                    const TrainConfig& config) {
  if (options.side < 2 || options.test_side < 2) throw std::invalid_argument("denoise: grid too small");
  const GrayImage image = render(clean, options.side);
  const double f_nyq = static_cast<double>(options.side) / 4.0;
  const DenoiseData data =
      make_denoise_dataset(image, options.waves, f_nyq, options.sigma_noise, options.seed);

  Dataset test_set;
  if (options.test_side == options.side) {
    test_set = Dataset{data.train.inputs, data.clean_train};
  } else {
    const GrayImage ref = render(clean, options.test_side);
    test_set = Dataset{grid_coordinates(options.test_side), ref.pixels};
  }

  const double omega0 = equivalent_nyquist_omega(options.side * options.side, 2);
  const ResolvedInit init = resolve_scheme(scheme, omega0, 2, options.width, options.depth);
  Rng rng(options.seed, 0x5eed);
  SirenNet net = sample_network(init, rng);
  net.seed = options.seed;
  TrainConfig cfg = config;
  cfg.seed = options.seed;
  ExperimentReport rep = train(net, data.train, test_set, cfg);
  rep.task = "denoise";
  return rep;
}

std::vector<ExperimentReport> depth_width_sweep(const FitTask& task, const SweepSpec& spec,
                                                const TrainConfig& config) {
  if (spec.schemes.empty() || spec.depths.empty() || spec.widths.empty() || spec.seeds.empty()) {
    throw std::invalid_argument("depth_width_sweep: every list must be non-empty");
  }
  struct Cell {
    std::size_t scheme, depth, width, seed;
  };
  std::vector<Cell> cells;
  for (std::size_t s = 0; s < spec.schemes.size(); ++s)
    for (std::size_t d = 0; d < spec.depths.size(); ++d)
      for (std::size_t w = 0; w < spec.widths.size(); ++w)
        for (std::size_t k = 0; k < spec.seeds.size(); ++k) cells.push_back({s, d, w, k});

  std::vector<ExperimentReport> out(cells.size());
  parallel_for(cells.size(), [&](std::size_t i) {
    const Cell& c = cells[i];
    RunSpec run{spec.schemes[c.scheme], spec.depths[c.depth], spec.widths[c.width],
                spec.seeds[c.seed]};
    out[i] = run_fit(task, run, config);
  });
  return out;
}

}  // namespace siren
