#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "siren/init.hpp"
#include "siren/network.hpp"

using namespace siren;

namespace {

const double kSqrt3 = std::sqrt(3.0);
const double kSqrt6 = std::sqrt(6.0);
const double kE2 = std::exp(-2.0);

// Direct iteration of s <- (c_w^2/6)(1 - e^{-2s}) + c_b^2, written out here.
double iterate_sigma_a(double cw, double cb, int steps) {
  double s = 1.0;
  for (int i = 0; i < steps; ++i) s = cw * cw / 6.0 * (1.0 - std::exp(-2.0 * s)) + cb * cb;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("closed-form sigma_a at the named points") {
  CHECK(std::abs(sigma_a_closed_form(kSqrt3, 0.0)) <= 1e-12);
  const double cw1 = std::sqrt(6.0 / (1.0 + kE2));
  CHECK(std::abs(sigma_a_closed_form(cw1, cw1 * std::exp(-1.0) / kSqrt3) - 1.0) <= 1e-12);
  const double sitz = sigma_a_closed_form(kSqrt6, 0.0);
  CHECK(sitz == doctest::Approx(iterate_sigma_a(kSqrt6, 0.0, 2000)).epsilon(1e-12));
  CHECK(sitz == doctest::Approx(0.893).epsilon(1e-3));
}

TEST_CASE("fixed-point iteration") {
  const auto r = sigma_a_fixed_point_iterate(kSqrt6, 0.0);
  CHECK(r.converged);
  CHECK(r.iterations < 100);
  CHECK(r.sigma_a == doctest::Approx(0.893).epsilon(1e-3));

  const auto slow = sigma_a_fixed_point_iterate(kSqrt3, 0.0, 1e-15, 1'000'000);
  CHECK(slow.sigma_a < 1e-2);

  const auto mixed = sigma_a_fixed_point_iterate(1.0, 0.5);
  CHECK(mixed.converged);
  CHECK(std::abs(mixed.sigma_a - sigma_a_closed_form(1.0, 0.5)) <= 1e-8);
}

TEST_CASE("sigma_g") {
  CHECK(std::abs(sigma_g(kSqrt3, 0.0) - 1.0) <= 1e-12);
  CHECK(std::abs(sigma_g(std::sqrt(6.0 / (1.0 + kE2)), 1.0) - 1.0) <= 1e-12);
  // (6/6)(1 + e^{-2 * 0.893^2}) under the square root.
  const double sa = sigma_a_closed_form(kSqrt6, 0.0);
  CHECK(sigma_g(kSqrt6, sa) == doctest::Approx(std::sqrt(1.0 + std::exp(-2.0 * sa * sa))));
  CHECK(sigma_g(kSqrt6, sa) == doctest::Approx(1.097).epsilon(1e-3));
}

TEST_CASE("on-curve bias scale") {
  CHECK(c_b_on_curve(kSqrt3) == 0.0);
  const double cw1 = std::sqrt(6.0 / (1.0 + kE2));
  CHECK(std::abs(c_b_on_curve(cw1) - cw1 * std::exp(-1.0) / kSqrt3) <= 1e-12);
  CHECK(c_b_on_curve(cw1) == doctest::Approx(0.4883).epsilon(1e-4));
  CHECK(sigma1_cw() == cw1);
  CHECK(std::abs(sigma1_cb() - c_b_on_curve(cw1)) <= 1e-12);
  // (c_w^2/6)(1 - e^-2) + c_b^2 = 1 for the sigma_a = 1 pair.
  CHECK(std::abs(cw1 * cw1 / 6.0 * (1.0 - kE2) + sigma1_cb() * sigma1_cb() - 1.0) <= 1e-12);

  CHECK_THROWS_AS(c_b_on_curve(1.0), std::domain_error);
  CHECK_THROWS_AS(c_b_on_curve(kSqrt6), std::domain_error);
  CHECK_THROWS_AS(c_b_on_curve(3.0), std::domain_error);
}

TEST_CASE("curve consistency over the valid arc") {
  for (int i = 0; i < 50; ++i) {
    const double cw = kSqrt3 + (kSqrt6 - 0.01 - kSqrt3) * (i + 0.5) / 50.0;
    const double cb = c_b_on_curve(cw);
    const double sa = sigma_a_closed_form(cw, cb);
    CAPTURE(cw);
    CHECK(std::abs(sigma_g(cw, sa) - 1.0) <= 1e-8);
    const auto it = sigma_a_fixed_point_iterate(cw, cb);
    CHECK(it.converged);
    CHECK(std::abs(it.sigma_a - sa) <= 1e-8);
  }
}

TEST_CASE("scheme names round-trip") {
  for (const auto& s : named_schemes()) CHECK(parse_scheme(scheme_name(s)) == s);
  CHECK(parse_scheme("custom", 2.0).kind == SchemeKind::CustomOnCurve);
  CHECK(parse_scheme("custom", 2.0, 0.1) == InitScheme::custom(2.0, 0.1));
  CHECK_THROWS_AS(parse_scheme("pytorch"), std::invalid_argument);
  CHECK_THROWS_AS(parse_scheme("custom"), std::invalid_argument);
}

TEST_CASE("resolve_scheme") {
  const auto p = resolve_scheme(InitScheme::proposed(), 1.0, 1, 256, 10);
  REQUIRE(p.layers.size() == 10);
  CHECK(p.layers[0].weight == ParamDistribution{Distribution::Uniform, 1.0});
  CHECK(p.layers[1].weight.scale == doctest::Approx(kSqrt3 / 16.0));
  CHECK(p.layers[1].bias.kind == Distribution::Normal);
  CHECK(p.layers[1].bias.scale == 0.0);
  CHECK(p.layers[9].fan_out == 1);

  const auto s = resolve_scheme(InitScheme::sitzmann(), 30.0, 2, 256, 10);
  CHECK(s.layers[0].weight.scale == doctest::Approx(15.0));
  CHECK(s.layers[0].bias == ParamDistribution{Distribution::Uniform, 1.0 / std::sqrt(2.0)});
  CHECK(s.layers[1].weight.scale == doctest::Approx(kSqrt6 / 16.0));
  CHECK(s.layers[1].bias == ParamDistribution{Distribution::Uniform, 1.0 / 16.0});

  const auto one = resolve_scheme(InitScheme::sigma1(), 1.0, 1, 64, 4);
  CHECK(one.params.c_w == sigma1_cw());
  CHECK(one.params.c_b == doctest::Approx(one.params.c_w * std::exp(-1.0) / kSqrt3).epsilon(1e-12));
  CHECK(one.layers[2].bias.scale == doctest::Approx(one.params.c_b));

  const auto fw = resolve_scheme(InitScheme::framework_default(), 1.0, 1, 64, 4);
  CHECK(fw.layers[2].weight == ParamDistribution{Distribution::Uniform, 1.0 / 8.0});
  CHECK(fw.layers[2].bias == ParamDistribution{Distribution::Uniform, 1.0 / 8.0});

  CHECK_THROWS_AS(resolve_scheme(InitScheme::proposed(), 1.0, 1, 8, 1), std::invalid_argument);
  CHECK_THROWS_AS(resolve_scheme(InitScheme::proposed(), 0.0, 1, 8, 3), std::invalid_argument);
  CHECK_THROWS_AS(resolve_scheme(InitScheme::proposed(), 1.0, 1, 0, 3), std::invalid_argument);
  CHECK_THROWS(resolve_scheme(InitScheme::on_curve(1.0), 1.0, 1, 8, 3));
}

TEST_CASE("sample_network") {
  const auto init = resolve_scheme(InitScheme::proposed(), 1.0, 1, 256, 4);
  Rng r1(7), r2(7);
  const SirenNet a = sample_network(init, r1);
  const SirenNet b = sample_network(init, r2);
  CHECK(a == b);
  for (std::size_t l = 1; l <= 4; ++l) {
    for (double v : a.layer(l).bias) CHECK(v == 0.0);
  }

  // Moment check per scheme on the 256 x 256 hidden layer.
  for (const auto& scheme : named_schemes()) {
    const auto ri = resolve_scheme(scheme, 1.0, 1, 256, 4);
    Rng rng(99);
    const SirenNet net = sample_network(ri, rng);
    const auto& w = net.layer(2).weight;
    double s2 = 0.0;
    for (double v : w.data()) s2 += v * v;
    const double var = s2 / static_cast<double>(w.size());
    CAPTURE(scheme_name(scheme));
    CHECK(var == doctest::Approx(ri.layers[1].weight.variance()).epsilon(0.05));
    for (double v : net.layer(1).weight.data()) CHECK(std::abs(v) <= 1.0);
  }
  CHECK(a.scheme == InitScheme::proposed());
}
