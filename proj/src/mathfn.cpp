#include "siren/mathfn.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace siren {
namespace {

constexpr double kE = std::numbers::e;
constexpr int kMaxHalleySteps = 50;

// e*x + 1 below this is indistinguishable from the branch point after the
// rounding already present in x.
constexpr double kBranchSnap = 1e-15;
constexpr double kSeriesRegion = 1e-6;

double branch_series(double p) {
  return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0)));
}

}  // namespace

double lambert_w0(double x) {
  if (std::isnan(x)) throw std::domain_error("lambert_w0: NaN argument");
  if (x < kBranchPoint - kLambertDomainTolerance) {
    throw std::domain_error("lambert_w0: argument " + std::to_string(x) +
                            " is below -1/e");
  }
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return x;

  const double dist = std::fma(kE, x, 1.0);  // e*x + 1
  if (dist <= kBranchSnap) return -1.0;
  if (x <= kBranchPoint + kSeriesRegion) return branch_series(std::sqrt(2.0 * dist));

  double w;
  if (x < -0.3) {
    w = branch_series(std::sqrt(2.0 * dist));
  } else if (std::abs(x) < 0.5) {
    w = x;
  } else {
    w = std::log1p(x);
  }

  const double tol = 1e-14 * std::max(1.0, std::abs(x));
  for (int i = 0; i < kMaxHalleySteps; ++i) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    if (std::abs(f) <= tol) break;
    const double wp1 = w + 1.0;
    const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    w -= step;
    if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(w))) break;
  }
  return w;
}

}  // namespace siren
