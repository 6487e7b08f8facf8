#include <cmath>
#include <limits>
#include <stdexcept>

#include "siren/experiments.hpp"

namespace siren {

double mse(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("mse: length mismatch");
  if (a.empty()) throw std::invalid_argument("mse: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

double psnr(std::span<const double> a, std::span<const double> b, double peak) {
  if (!(peak > 0.0)) throw std::invalid_argument("psnr: peak must be positive");
  const double e = mse(a, b);
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / e);
}

double snr(std::span<const double> signal, std::span<const double> residual) {
  if (signal.size() != residual.size()) throw std::invalid_argument("snr: length mismatch");
  if (signal.empty()) throw std::invalid_argument("snr: empty input");
  double s = 0.0, r = 0.0;
  for (std::size_t i = 0; i < signal.size(); ++i) {
    s += signal[i] * signal[i];
    r += residual[i] * residual[i];
  }
  if (r == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(s / r);
}

}  // namespace siren
