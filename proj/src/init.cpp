#include "siren/init.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "siren/mathfn.hpp"
#include "siren/network.hpp"

namespace siren {
namespace {

constexpr double kClampTolerance = 1e-12;

const double kSqrt3 = std::sqrt(3.0);
const double kSqrt6 = std::sqrt(6.0);

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string(what) + " must be positive and finite");
  }
}

ParamDistribution uniform(double half_width) { return {Distribution::Uniform, half_width}; }
ParamDistribution normal(double stddev) { return {Distribution::Normal, stddev}; }

double draw(const ParamDistribution& d, Rng& rng) {
  if (d.kind == Distribution::Normal) return rng.normal(0.0, d.scale);
  if (d.scale == 0.0) return 0.0;
  return rng.uniform(-d.scale, d.scale);
}

}  // namespace

std::string scheme_name(const InitScheme& scheme) {
  switch (scheme.kind) {
    case SchemeKind::ProposedSigmaA0: return "proposed-sigma0";
    case SchemeKind::SigmaA1: return "sigma1";
    case SchemeKind::SitzmannOriginal: return "sitzmann";
    case SchemeKind::FrameworkDefault: return "framework-default";
    case SchemeKind::CustomOnCurve:
    case SchemeKind::Custom: return "custom";
  }
  return "unknown";
}

InitScheme parse_scheme(std::string_view name, double custom_cw, double custom_cb) {
  if (name == "proposed-sigma0") return InitScheme::proposed();
  if (name == "sigma1") return InitScheme::sigma1();
  if (name == "sitzmann") return InitScheme::sitzmann();
  if (name == "framework-default") return InitScheme::framework_default();
  if (name == "custom") {
    if (!(custom_cw > 0.0)) throw std::invalid_argument("scheme 'custom' needs a positive c_w");
    if (custom_cb < 0.0) {
      c_b_on_curve(custom_cw);  // validates the arc
      return InitScheme::on_curve(custom_cw);
    }
    return InitScheme::custom(custom_cw, custom_cb);
  }
  throw std::invalid_argument("unknown scheme '" + std::string(name) +
                              "' (expected proposed-sigma0, sigma1, sitzmann, "
                              "framework-default or custom)");
}

std::vector<InitScheme> named_schemes() {
  return {InitScheme::proposed(), InitScheme::sigma1(), InitScheme::sitzmann(),
          InitScheme::framework_default()};
}

double sigma_a_closed_form(double c_w, double c_b) {
  require_positive(c_w, "c_w");
  const double cw2 = c_w * c_w;
  const double cb2 = c_b * c_b;
  const double w = lambert_w0(-(cw2 / 3.0) * std::exp(-cw2 / 3.0 - 2.0 * cb2));
  const double radicand = cb2 + cw2 / 6.0 + 0.5 * w;
  if (radicand < -kClampTolerance) {
    throw std::domain_error("sigma_a_closed_form: negative radicand " + std::to_string(radicand));
  }
  return radicand <= 0.0 ? 0.0 : std::sqrt(radicand);
}

FixedPointReport sigma_a_fixed_point_iterate(double c_w, double c_b, double tol,
                                             std::size_t max_iter) {
  require_positive(c_w, "c_w");
  require_positive(tol, "tol");
  const double a = c_w * c_w / 6.0;
  const double cb2 = c_b * c_b;
  FixedPointReport report;
  double s = 1.0;
  for (std::size_t i = 0; i < max_iter; ++i) {
    const double next = -a * std::expm1(-2.0 * s) + cb2;
    report.iterations = i + 1;
    const bool done = std::abs(next - s) <= tol;
    s = next;
    if (done) {
      report.converged = true;
      break;
    }
  }
  report.sigma_a = std::sqrt(std::max(s, 0.0));
  report.sigma_g = sigma_g(c_w, report.sigma_a);
  return report;
}

double sigma_g(double c_w, double sigma_a) {
  require_positive(c_w, "c_w");
  if (!(sigma_a >= 0.0)) throw std::invalid_argument("sigma_a must be non-negative");
  return std::sqrt(c_w * c_w / 6.0 * (1.0 + std::exp(-2.0 * sigma_a * sigma_a)));
}

double c_b_on_curve(double c_w) {
  require_positive(c_w, "c_w");
  if (!(c_w < kSqrt6)) {
    throw std::domain_error("c_b_on_curve: c_w must be below sqrt(6), got " + std::to_string(c_w));
  }
  const double cw2 = c_w * c_w;
  const double radicand = 1.0 - cw2 / 3.0 - 0.5 * std::log(6.0 / cw2 - 1.0);
  if (radicand < -kClampTolerance) {
    throw std::domain_error("c_b_on_curve: c_w = " + std::to_string(c_w) +
                            " is off the valid arc (radicand " + std::to_string(radicand) + ")");
  }
  return std::abs(radicand) <= kClampTolerance ? 0.0 : std::sqrt(radicand);
}

double sigma1_cw() { return std::sqrt(6.0 / (1.0 + std::exp(-2.0))); }
double sigma1_cb() { return sigma1_cw() * std::exp(-1.0) / kSqrt3; }

ResolvedInit resolve_scheme(const InitScheme& scheme, double omega0, std::size_t n0,
                            std::size_t width, std::size_t depth, std::size_t d_out) {
  require_positive(omega0, "omega0");
  if (n0 < 1) throw std::invalid_argument("input dimension must be at least 1");
  if (width < 1) throw std::invalid_argument("width must be at least 1");
  if (depth < 2) throw std::invalid_argument("depth must be at least 2");
  if (d_out < 1) throw std::invalid_argument("output dimension must be at least 1");

  ResolvedInit out;
  InitParams& p = out.params;
  p.scheme = scheme;
  p.omega0 = omega0;
  p.n0 = n0;
  p.width = width;
  p.depth = depth;
  p.d_out = d_out;

  const double sqrt_n = std::sqrt(static_cast<double>(width));
  bool gaussian_bias = true;
  switch (scheme.kind) {
    case SchemeKind::ProposedSigmaA0:
      p.c_w = kSqrt3;
      p.c_b = 0.0;
      break;
    case SchemeKind::SigmaA1:
      p.c_w = sigma1_cw();
      p.c_b = sigma1_cb();
      break;
    case SchemeKind::CustomOnCurve:
      require_positive(scheme.c_w, "c_w");
      p.c_w = scheme.c_w;
      p.c_b = c_b_on_curve(scheme.c_w);
      break;
    case SchemeKind::Custom:
      require_positive(scheme.c_w, "c_w");
      if (!(scheme.c_b >= 0.0)) throw std::invalid_argument("c_b must be non-negative");
      p.c_w = scheme.c_w;
      p.c_b = scheme.c_b;
      break;
    case SchemeKind::SitzmannOriginal:
      p.c_w = kSqrt6;
      p.c_b = 1.0 / (std::sqrt(3.0) * sqrt_n);
      gaussian_bias = false;
      break;
    case SchemeKind::FrameworkDefault:
      p.c_w = 1.0;
      p.c_b = 1.0 / (std::sqrt(3.0) * sqrt_n);
      gaussian_bias = false;
      break;
  }

  out.layers.reserve(depth);
  for (std::size_t l = 1; l <= depth; ++l) {
    LayerDistribution layer;
    layer.fan_in = l == 1 ? n0 : width;
    layer.fan_out = l == depth ? d_out : width;
    const double sqrt_fan_in = std::sqrt(static_cast<double>(layer.fan_in));
    if (l == 1) {
      layer.weight = uniform(omega0 / static_cast<double>(n0));
    } else {
      layer.weight = uniform(p.c_w / sqrt_fan_in);
    }
    layer.bias = gaussian_bias ? normal(p.c_b) : uniform(1.0 / sqrt_fan_in);
    out.layers.push_back(layer);
  }
  return out;
}

SirenNet sample_network(const ResolvedInit& init, Rng& rng) {
  std::vector<DenseLayer> layers;
  layers.reserve(init.layers.size());
  for (const auto& spec : init.layers) {
    DenseLayer layer{Matrix(spec.fan_out, spec.fan_in), Vector(spec.fan_out)};
    for (double& w : layer.weight.data()) w = draw(spec.weight, rng);
    for (double& b : layer.bias) b = draw(spec.bias, rng);
    layers.push_back(std::move(layer));
  }
  SirenNet net(std::move(layers));
  net.scheme = init.params.scheme;
  net.omega0 = init.params.omega0;
  net.seed = rng.seed();
  return net;
}

}  // namespace siren
