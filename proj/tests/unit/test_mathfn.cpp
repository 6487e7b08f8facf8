#include <cmath>
#include <limits>
#include <stdexcept>

#include "doctest.h"
#include "siren/mathfn.hpp"

using siren::lambert_w0;

namespace {

// Root of w e^w = x on [lo, hi] by bisection.
double bisect_w(double x, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid * std::exp(mid) < x) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("lambert_w0 special points") {
  CHECK(lambert_w0(0.0) == 0.0);
  CHECK(lambert_w0(-1.0 / std::exp(1.0)) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(lambert_w0(siren::kBranchPoint) == -1.0);
  CHECK(lambert_w0(1.0) == doctest::Approx(0.5671432904).epsilon(1e-10));
  CHECK(lambert_w0(1.0) == doctest::Approx(bisect_w(1.0, 0.0, 1.0)).epsilon(1e-14));
  CHECK(lambert_w0(std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("lambert_w0 against bisection across the branch") {
  for (double x : {-0.3678, -0.36, -0.3, -0.2, -0.05, -1e-8, 1e-8, 0.3, 2.0, 10.0, 1e3, 1e8}) {
    CAPTURE(x);
    const double ref = bisect_w(x, -1.0, std::max(1.0, std::log(1.0 + x) + 1.0));
    CHECK(std::abs(lambert_w0(x) - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
  }
}

TEST_CASE("lambert_w0 satisfies its defining equation near the branch point") {
  for (double d : {1e-15, 1e-12, 1e-9, 1e-7, 1e-6, 1e-5, 1e-3}) {
    const double x = siren::kBranchPoint + d;
    const double w = lambert_w0(x);
    CAPTURE(d);
    CHECK(w >= -1.0);
    CHECK(w * std::exp(w) == doctest::Approx(x).epsilon(1e-13));
  }
}

TEST_CASE("lambert_w0 is monotone") {
  double prev = lambert_w0(siren::kBranchPoint);
  for (double x = siren::kBranchPoint + 1e-4; x < 5.0; x += 0.01) {
    const double w = lambert_w0(x);
    CHECK(w > prev);
    prev = w;
  }
}

TEST_CASE("lambert_w0 domain errors") {
  CHECK_THROWS_AS(lambert_w0(-0.5), std::domain_error);
  CHECK_THROWS_AS(lambert_w0(siren::kBranchPoint - 1e-12), std::domain_error);
  CHECK_THROWS_AS(lambert_w0(std::numeric_limits<double>::quiet_NaN()), std::domain_error);
  CHECK(lambert_w0(siren::kBranchPoint - 1e-16) == -1.0);
}
