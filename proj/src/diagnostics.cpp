#include "siren/diagnostics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "siren/parallel.hpp"

namespace siren {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

ConstMap view(const Matrix& m) {
  return {m.data().data(), static_cast<Eigen::Index>(m.rows()),
          static_cast<Eigen::Index>(m.cols())};
}
MutMap view(Matrix& m) {
  return {m.data().data(), static_cast<Eigen::Index>(m.rows()),
          static_cast<Eigen::Index>(m.cols())};
}

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  double count = 0.0;

  void merge(const Moments& o) {
    sum += o.sum;
    sum_sq += o.sum_sq;
    count += o.count;
  }
  double mean() const { return count > 0 ? sum / count : 0.0; }
  double variance() const {
    if (count <= 0) return 0.0;
    const double m = mean();
    return std::max(sum_sq / count - m * m, 0.0);
  }
};

SirenNet sample_member(const InitScheme& scheme, const NetworkDims& dims, std::size_t depth,
                       std::uint64_t seed, std::size_t member) {
  Rng rng(ensemble_seed(seed, depth, member));
  return sample_network(resolve_scheme(scheme, dims.omega0, dims.n0, dims.width, depth), rng);
}

void require_depths(std::span<const std::size_t> depths, std::size_t min_depth) {
  if (depths.empty()) throw std::invalid_argument("depth list is empty");
  for (std::size_t i = 0; i < depths.size(); ++i) {
    if (depths[i] < min_depth) {
      throw std::invalid_argument("depth " + std::to_string(depths[i]) + " is below the minimum " +
                                  std::to_string(min_depth));
    }
    if (i > 0 && depths[i] <= depths[i - 1]) {
      throw std::invalid_argument("depth list must be strictly ascending");
    }
  }
}

Vector to_double(std::span<const std::size_t> v) { return Vector(v.begin(), v.end()); }

}  // namespace

std::uint64_t ensemble_seed(std::uint64_t seed, std::size_t depth, std::size_t member) {
  return Rng::mix(Rng::mix(seed, depth), member);
}

Matrix linspace_inputs(double lo, double hi, std::size_t count) {
  Matrix x(count, 1);
  if (count == 1) {
    x(0, 0) = 0.5 * (lo + hi);
    return x;
  }
  for (std::size_t i = 0; i < count; ++i) {
    x(i, 0) = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return x;
}

Matrix periodic_grid(double lo, double hi, std::size_t count) {
  Matrix x(count, 1);
  for (std::size_t i = 0; i < count; ++i) {
    x(i, 0) = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count);
  }
  return x;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("fit_line needs two equal-length series of at least 2 points");
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: x values are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

VarianceProfile variance_profile(const InitScheme& scheme, const NetworkDims& dims,
                                 std::size_t ensembles, const Matrix& inputs, std::uint64_t seed) {
  if (ensembles < 1) throw std::invalid_argument("variance_profile needs at least one ensemble");
  if (inputs.rows() < 1) throw std::invalid_argument("variance_profile needs inputs");
  const std::size_t hidden = dims.depth - 1;

  struct MemberStats {
    std::vector<Moments> preact, jac;
  };
  std::vector<MemberStats> members(ensembles);
  parallel_for(ensembles, [&](std::size_t e) {
    const SirenNet net = sample_member(scheme, dims, dims.depth, seed, e);
    const BatchTrace trace = forward_batch(net, inputs);
    MemberStats& out = members[e];
    out.preact.resize(hidden);
    out.jac.resize(hidden);
    for (std::size_t l = 1; l <= hidden; ++l) {
      const auto z = view(trace.pre[l - 1]);
      Moments& pm = out.preact[l - 1];
      pm.sum = z.sum();
      pm.sum_sq = z.squaredNorm();
      pm.count = static_cast<double>(z.size());

      // Entries of diag(cos z) W: sum_i cos z_i * sum_j W_ij and the same for squares.
      const auto w = view(net.layer(l).weight);
      const Eigen::VectorXd row_sum = w.rowwise().sum();
      const Eigen::VectorXd row_sq = w.rowwise().squaredNorm();
      const RowMajor c = z.array().cos().matrix();
      Moments& jm = out.jac[l - 1];
      jm.sum = (c * row_sum).sum();
      jm.sum_sq = (c.array().square().matrix() * row_sq).sum();
      jm.count = static_cast<double>(z.size()) * static_cast<double>(w.cols());
    }
  });

  VarianceProfile profile;
  profile.scheme = scheme;
  profile.dims = dims;
  profile.ensembles = ensembles;
  profile.inputs = inputs.rows();
  profile.seed = seed;
  const double effective = std::sqrt(static_cast<double>(ensembles * inputs.rows()));
  for (std::size_t l = 1; l <= hidden; ++l) {
    Moments pm, jm;
    for (const auto& m : members) {
      pm.merge(m.preact[l - 1]);
      jm.merge(m.jac[l - 1]);
    }
    const double fan_in = static_cast<double>(l == 1 ? dims.n0 : dims.width);
    LayerStatistics s;
    s.layer = l;
    s.preact_std = std::sqrt(pm.variance());
    s.preact_se = s.preact_std / effective;
    s.jac_scaled_std = std::sqrt(fan_in * jm.variance());
    s.jac_se = s.jac_scaled_std / effective;
    profile.layers.push_back(s);
  }
  return profile;
}

GradientDepthScan gradient_depth_scan(const InitScheme& scheme, const NetworkDims& dims,
                                      std::span<const std::size_t> depths, const Matrix& inputs,
                                      std::size_t ensembles, std::uint64_t seed) {
  require_depths(depths, 2);
  if (ensembles < 1) throw std::invalid_argument("gradient_depth_scan needs ensembles >= 1");
  GradientDepthScan scan;
  scan.scheme = scheme;
  scan.dims = dims;
  scan.ensembles = ensembles;
  scan.seed = seed;

  for (const std::size_t depth : depths) {
    struct MemberStats {
      Moments input;
      std::vector<Moments> params;
    };
    std::vector<MemberStats> members(ensembles);
    parallel_for(ensembles, [&](std::size_t e) {
      const SirenNet net = sample_member(scheme, dims, depth, seed, e);
      const BatchTrace trace = forward_batch(net, inputs);
      const auto deltas = output_sensitivities(net, trace);
      MemberStats& out = members[e];
      const RowMajor gx = view(deltas.front()) * view(net.layer(1).weight);
      out.input = {gx.sum(), gx.squaredNorm(), static_cast<double>(gx.size())};
      out.params.resize(depth);
      for (std::size_t l = 1; l <= depth; ++l) {
        const auto d = view(deltas[l - 1]);
        const auto h = view(trace.hidden_at(l - 1));
        Moments& m = out.params[l - 1];
        m.sum = (d.rowwise().sum().array() * h.rowwise().sum().array()).sum();
        m.sum_sq = (d.rowwise().squaredNorm().array() * h.rowwise().squaredNorm().array()).sum();
        m.count = static_cast<double>(d.rows()) * static_cast<double>(d.cols()) *
                  static_cast<double>(h.cols());
      }
    });
    GradientDepthRow row;
    row.depth = depth;
    Moments input;
    std::vector<Moments> params(depth);
    for (const auto& m : members) {
      input.merge(m.input);
      for (std::size_t l = 0; l < depth; ++l) params[l].merge(m.params[l]);
    }
    row.input_grad_std = std::sqrt(input.variance());
    for (const auto& p : params) row.param_grad_var.push_back(p.variance());
    scan.rows.push_back(std::move(row));
  }

  if (scan.rows.size() >= 2) {
    Vector ls, logs;
    for (const auto& r : scan.rows) {
      ls.push_back(static_cast<double>(r.depth));
      logs.push_back(std::log(r.input_grad_std));
    }
    scan.log_std_fit = fit_line(ls, logs);
  }
  const auto& deepest = scan.rows.back();
  if (deepest.depth >= 4) {
    Vector ls, logs;
    for (std::size_t l = 2; l < deepest.depth; ++l) {
      ls.push_back(static_cast<double>(l));
      logs.push_back(std::log(deepest.param_grad_var[l - 1]));
    }
    scan.param_var_fit = fit_line(ls, logs);
  }
  return scan;
}

NtkResult ntk_matrix(const SirenNet& net, const Matrix& inputs, bool decompose) {
  if (net.output_dim() != 1) throw std::invalid_argument("ntk_matrix needs a scalar-output network");
  if (inputs.rows() < 1) throw std::invalid_argument("ntk_matrix needs at least one input");
  if (inputs.rows() > kMaxNtkInputs) {
    throw std::length_error("ntk_matrix: " + std::to_string(inputs.rows()) +
                            " inputs exceed the limit of " + std::to_string(kMaxNtkInputs));
  }
  const BatchTrace trace = forward_batch(net, inputs);
  const auto deltas = output_sensitivities(net, trace);
  NtkResult out;
  out.kernel = Matrix(inputs.rows(), inputs.rows());
  auto k = view(out.kernel);
  for (std::size_t l = 1; l <= net.depth(); ++l) {
    const auto d = view(deltas[l - 1]);
    const auto h = view(trace.hidden_at(l - 1));
    const RowMajor dd = d * d.transpose();
    const RowMajor hh = (h * h.transpose()).array() + 1.0;
    k += (dd.array() * hh.array()).matrix();
  }
  // Exact symmetry regardless of GEMM summation order.
  const RowMajor sym = 0.5 * (k + k.transpose());
  k = sym;
  out.normalized_trace = siren::trace(out.kernel) / (static_cast<double>(inputs.rows()) *
                                               static_cast<double>(net.width()));
  if (decompose) {
    auto eig = eigh_symmetric(out.kernel);
    out.eigenvalues = std::move(eig.values);
    out.eigenvectors = std::move(eig.vectors);
  }
  return out;
}

double ntk_normalized_trace(const SirenNet& net, const Matrix& inputs) {
  if (net.output_dim() != 1) {
    throw std::invalid_argument("ntk_normalized_trace needs a scalar-output network");
  }
  const BatchTrace trace = forward_batch(net, inputs);
  const auto deltas = output_sensitivities(net, trace);
  double total = 0.0;
  // ||grad_W_l||^2 = ||delta_l||^2 ||h_{l-1}||^2 and ||grad_b_l||^2 = ||delta_l||^2.
  for (std::size_t l = 1; l <= net.depth(); ++l) {
    const auto d = view(deltas[l - 1]);
    const auto h = view(trace.hidden_at(l - 1));
    total += (d.rowwise().squaredNorm().array() * (h.rowwise().squaredNorm().array() + 1.0)).sum();
  }
  return total / (static_cast<double>(inputs.rows()) * static_cast<double>(net.width()));
}

std::string growth_law_name(GrowthLaw law) {
  switch (law) {
    case GrowthLaw::Exponential: return "exponential";
    case GrowthLaw::Linear: return "linear";
    case GrowthLaw::Plateau: return "plateau";
    case GrowthLaw::Unclassified: return "unclassified";
  }
  return "unclassified";
}

GrowthFit classify_growth(std::span<const double> depths, std::span<const double> values) {
  if (depths.size() != values.size() || depths.size() < 3) {
    throw std::invalid_argument("classify_growth needs at least 3 (depth, value) pairs");
  }
  GrowthFit fit;
  Vector logs(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0)) throw std::invalid_argument("classify_growth needs positive values");
    logs[i] = std::log(values[i]);
  }
  fit.log_fit = fit_line(depths, logs);
  fit.linear_fit = fit_line(depths, values);

  const std::size_t n = values.size();
  const std::size_t third = std::max<std::size_t>(n / 3, 1);
  const auto mean_of = [&](std::size_t from, std::size_t to) {
    return std::accumulate(values.begin() + static_cast<std::ptrdiff_t>(from),
                           values.begin() + static_cast<std::ptrdiff_t>(to), 0.0) /
           static_cast<double>(to - from);
  };
  const double middle = mean_of(n - 2 * third, n - third);
  const double last = mean_of(n - third, n);
  fit.plateau_change = std::abs(last / middle - 1.0);

  const std::size_t half = n / 2;
  const LinearFit deep = fit_line(depths.subspan(half), std::span<const double>(logs).subspan(half));
  fit.ratio = std::exp(deep.slope);

  const bool exponential = fit.log_fit.slope > 0.05 && fit.log_fit.r2 > 0.95;
  const bool linear = fit.linear_fit.slope > 0.0 && fit.linear_fit.r2 > 0.95;
  if (exponential && (!linear || fit.log_fit.r2 >= fit.linear_fit.r2)) {
    fit.law = GrowthLaw::Exponential;
  } else if (linear) {
    fit.law = GrowthLaw::Linear;
  } else if (fit.plateau_change < 0.05) {
    fit.law = GrowthLaw::Plateau;
  }
  return fit;
}

NtkTraceScan ntk_trace_depth_scan(const InitScheme& scheme, const NetworkDims& dims,
                                  std::span<const std::size_t> depths, const Matrix& inputs,
                                  std::size_t ensembles, std::uint64_t seed) {
  require_depths(depths, 2);
  if (ensembles < 1) throw std::invalid_argument("ntk_trace_depth_scan needs ensembles >= 1");
  NtkTraceScan scan;
  scan.scheme = scheme;
  scan.dims = dims;
  scan.ensembles = ensembles;
  scan.seed = seed;
  Vector means;
  for (const std::size_t depth : depths) {
    Vector traces(ensembles);
    parallel_for(ensembles, [&](std::size_t e) {
      traces[e] = ntk_normalized_trace(sample_member(scheme, dims, depth, seed, e), inputs);
    });
    Moments m;
    for (double t : traces) m.merge({t, t * t, 1.0});
    NtkTraceRow row;
    row.depth = depth;
    row.normalized_trace = m.mean();
    row.trace_se = ensembles > 1
                       ? std::sqrt(m.variance() * static_cast<double>(ensembles) /
                                   static_cast<double>(ensembles - 1) / static_cast<double>(ensembles))
                       : 0.0;
    means.push_back(row.normalized_trace);
    scan.rows.push_back(row);
  }
  if (depths.size() >= 3) scan.growth = classify_growth(to_double(depths), means);
  return scan;
}

std::vector<Vector> linearized_dynamics(const NtkResult& ntk, std::span<const double> u0,
                                        std::span<const double> times) {
  const std::size_t n = ntk.eigenvalues.size();
  if (u0.size() != n || ntk.eigenvectors.rows() != n) {
    throw std::invalid_argument("linearized_dynamics: u0 length does not match the kernel");
  }
  Vector coeff(n);
  for (std::size_t i = 0; i < n; ++i) {
    double c = 0.0;
    for (std::size_t r = 0; r < n; ++r) c += u0[r] * ntk.eigenvectors(r, i);
    coeff[i] = c;
  }
  std::vector<Vector> out;
  out.reserve(times.size());
  for (const double t : times) {
    if (!(t >= 0.0)) throw std::invalid_argument("linearized_dynamics: negative time");
    if (t == 0.0) {
      out.emplace_back(u0.begin(), u0.end());
      continue;
    }
    Vector u(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = std::exp(-t * ntk.eigenvalues[i]) * coeff[i];
      for (std::size_t r = 0; r < n; ++r) u[r] += a * ntk.eigenvectors(r, i);
    }
    out.push_back(std::move(u));
  }
  return out;
}

SpectrumReport signal_spectrum(std::span<const double> samples, double lo, double hi,
                               double omega0) {
  if (!(hi > lo)) throw std::invalid_argument("signal_spectrum: empty domain");
  if (!(omega0 > 0.0)) throw std::invalid_argument("signal_spectrum: omega0 must be positive");
  const std::size_t m = samples.size();
  const double length = hi - lo;
  const auto cutoff = static_cast<std::size_t>(std::ceil(omega0 * length / (2.0 * std::numbers::pi)));
  if (m < 2 || cutoff > m / 2) {
    throw std::invalid_argument("signal_spectrum: omega0 = " + std::to_string(omega0) +
                                " lies above the Nyquist frequency of a " + std::to_string(m) +
                                "-point grid");
  }
  const auto spectrum = dft(samples);
  SpectrumReport rep;
  rep.lo = lo;
  rep.hi = hi;
  rep.omega0 = omega0;
  rep.cutoff_bin = cutoff;
  rep.frequencies.resize(m / 2 + 1);
  rep.magnitudes.resize(m / 2 + 1);
  double total = 0.0, above = 0.0;
  for (std::size_t k = 0; k <= m / 2; ++k) {
    rep.frequencies[k] = 2.0 * std::numbers::pi * static_cast<double>(k) / length;
    rep.magnitudes[k] = std::abs(spectrum[k]);
    if (k == 0) continue;
    // Bins k and M-k carry the same power for real input.
    const double weight = (2 * k == m) ? 1.0 : 2.0;
    const double p = weight * std::norm(spectrum[k]);
    total += p;
    if (k > cutoff) above += p;
  }
  rep.cutoff_energy_fraction = total > 0.0 ? above / total : 0.0;
  rep.signal_energy = std::inner_product(samples.begin(), samples.end(), samples.begin(), 0.0);
  return rep;
}

SpectrumReport output_spectrum(const SirenNet& net, std::size_t samples, double lo, double hi,
                               double omega0) {
  if (net.input_dim() != 1 || net.output_dim() != 1) {
    throw std::invalid_argument("output_spectrum needs a scalar 1-D network");
  }
  const Matrix y = predict(net, periodic_grid(lo, hi, samples));
  return signal_spectrum(y.data(), lo, hi, omega0);
}

OverlapMap fourier_overlap(const NtkResult& ntk, double lo, double hi, double omega0) {
  const std::size_t m = ntk.eigenvectors.rows();
  if (m < 2) throw std::invalid_argument("fourier_overlap needs at least 2 grid points");
  const std::size_t n_vec = ntk.eigenvectors.cols();
  const std::size_t first_negative = m / 2 + 1;  // bins above M/2 are negative frequencies
  OverlapMap out;
  out.omega0 = omega0;
  out.power = Matrix(n_vec, m);
  out.frequencies.resize(m);
  const double length = hi - lo;
  std::vector<std::size_t> column_of(m);
  for (std::size_t c = 0; c < m; ++c) {
    // Column c holds signed frequency c - (M - first_negative).
    const std::size_t negatives = m - first_negative;
    const auto signed_k = static_cast<long long>(c) - static_cast<long long>(negatives);
    const std::size_t bin = static_cast<std::size_t>((signed_k + static_cast<long long>(m)) %
                                                     static_cast<long long>(m));
    column_of[bin] = c;
    out.frequencies[c] = 2.0 * std::numbers::pi * static_cast<double>(signed_k) / length;
  }
  for (std::size_t n = 0; n < n_vec; ++n) {
    const auto spectrum = dft(ntk.eigenvectors.column(n));
    for (std::size_t k = 0; k < m; ++k) {
      out.power(n, column_of[k]) = std::norm(spectrum[k]) / static_cast<double>(m);
    }
  }
  return out;
}

Vector overlap_centroids(const OverlapMap& overlap) {
  Vector out(overlap.power.rows());
  for (std::size_t n = 0; n < overlap.power.rows(); ++n) {
    double total = 0.0, weighted = 0.0;
    for (std::size_t c = 0; c < overlap.power.cols(); ++c) {
      total += overlap.power(n, c);
      weighted += overlap.power(n, c) * std::abs(overlap.frequencies[c]);
    }
    out[n] = total > 0.0 ? weighted / total : 0.0;
  }
  return out;
}

SingularSpectrumScan jacobian_singular_spectrum(const InitScheme& scheme, const NetworkDims& dims,
                                                std::span<const std::size_t> depths,
                                                const Matrix& sample_points,
                                                std::size_t ensembles, std::uint64_t seed) {
  require_depths(depths, 3);
  if (ensembles < 1 || sample_points.rows() < 1) {
    throw std::invalid_argument("jacobian_singular_spectrum needs ensembles and sample points");
  }
  SingularSpectrumScan scan;
  scan.scheme = scheme;
  scan.dims = dims;
  scan.ensembles = ensembles;
  scan.seed = seed;
  for (const std::size_t depth : depths) {
    std::vector<Vector> sums(ensembles, Vector(dims.width, 0.0));
    parallel_for(ensembles, [&](std::size_t e) {
      const SirenNet net = sample_member(scheme, dims, depth, seed, e);
      for (std::size_t p = 0; p < sample_points.rows(); ++p) {
        const ForwardTrace tr = forward(net, sample_points.row(p));
        const Vector sv = singular_values(end_to_end_jacobian(net, tr));
        for (std::size_t i = 0; i < sv.size(); ++i) sums[e][i] += sv[i];
      }
    });
    SingularSpectrumRow row;
    row.depth = depth;
    row.singular_values.assign(dims.width, 0.0);
    const double count = static_cast<double>(ensembles * sample_points.rows());
    for (const auto& s : sums)
      for (std::size_t i = 0; i < s.size(); ++i) row.singular_values[i] += s[i] / count;
    row.max_singular = row.singular_values.front();
    row.normalized_max = row.max_singular / 2.0;
    scan.rows.push_back(std::move(row));
  }
  return scan;
}

std::size_t worker_count() {
  if (const char* env = std::getenv("SIREN_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(std::thread::hardware_concurrency(), 1);
}

}  // namespace siren
