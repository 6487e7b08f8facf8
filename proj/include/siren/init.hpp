#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "siren/linalg.hpp"

namespace siren {

class SirenNet;

enum class SchemeKind {
  ProposedSigmaA0,   // (c_w, c_b) = (sqrt 3, 0)
  SigmaA1,           // on-curve pair with fixed point sigma_a = 1
  SitzmannOriginal,  // U(-sqrt6/sqrt N, ..), bias U(-1/sqrt fan_in, ..)
  FrameworkDefault,  // U(-1/sqrt fan_in, ..) for weights and biases
  CustomOnCurve,     // user c_w, c_b taken from the sigma_g = 1 curve
  Custom,            // user c_w and c_b
};

struct InitScheme {
  SchemeKind kind = SchemeKind::ProposedSigmaA0;
  double c_w = 0.0;  // only read for the custom kinds
  double c_b = 0.0;  // only read for Custom

  static InitScheme proposed() { return {SchemeKind::ProposedSigmaA0}; }
  static InitScheme sigma1() { return {SchemeKind::SigmaA1}; }
  static InitScheme sitzmann() { return {SchemeKind::SitzmannOriginal}; }
  static InitScheme framework_default() { return {SchemeKind::FrameworkDefault}; }
  static InitScheme on_curve(double c_w) { return {SchemeKind::CustomOnCurve, c_w, 0.0}; }
  static InitScheme custom(double c_w, double c_b) { return {SchemeKind::Custom, c_w, c_b}; }

  bool operator==(const InitScheme&) const = default;
};

/// Stable names: "proposed-sigma0", "sigma1", "sitzmann", "framework-default",
/// "custom". Both custom kinds are named "custom".
std::string scheme_name(const InitScheme& scheme);

/// Parses a stable scheme name. "custom" needs `custom_cw`; a negative
/// `custom_cb` selects the on-curve variant. Throws std::invalid_argument.
InitScheme parse_scheme(std::string_view name, double custom_cw = -1.0, double custom_cb = -1.0);

/// The four named schemes in a fixed order.
std::vector<InitScheme> named_schemes();

// ---------------------------------------------------------------------------
// Closed-form initialization algebra

/// Fixed-point standard deviation of the pre-activations,
///   sigma_a^2 = c_b^2 + c_w^2/6 + W0(-(c_w^2/3) exp(-c_w^2/3 - 2 c_b^2)) / 2.
/// Radicands in [-1e-12, 0) clamp to zero; anything below throws
/// std::domain_error, as does a Lambert argument outside the domain.
double sigma_a_closed_form(double c_w, double c_b);

struct FixedPointReport {
  double sigma_a = 0.0;
  double sigma_g = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

/// Iterates s <- (c_w^2/6)(1 - exp(-2 s)) + c_b^2 from s = 1 until successive
/// iterates differ by at most `tol`. Non-convergence is reported, not thrown.
FixedPointReport sigma_a_fixed_point_iterate(double c_w, double c_b, double tol = 1e-15,
                                             std::size_t max_iter = 1'000'000);

/// Rescaled Jacobian standard deviation sqrt((c_w^2/6)(1 + exp(-2 sigma_a^2))).
double sigma_g(double c_w, double sigma_a);

/// Bias scale on the sigma_g = 1 curve,
///   c_b = sqrt(1 - c_w^2/3 - log(6/c_w^2 - 1)/2),  0 < c_w < sqrt 6.
/// |radicand| <= 1e-12 clamps to zero; a more negative radicand (c_w off the
/// valid arc, i.e. below sqrt 3) throws std::domain_error.
double c_b_on_curve(double c_w);

/// c_w of the sigma_a = 1 pair: sqrt(6 / (1 + e^-2)).
double sigma1_cw();
/// c_b of the sigma_a = 1 pair: c_w e^-1 / sqrt 3.
double sigma1_cb();

// ---------------------------------------------------------------------------
// Parameter distributions

enum class Distribution { Uniform, Normal };

/// Marginal of one parameter tensor. Uniform draws from [-scale, scale);
/// Normal draws N(0, scale^2).
struct ParamDistribution {
  Distribution kind = Distribution::Uniform;
  double scale = 0.0;

  /// Variance of a single entry.
  double variance() const { return kind == Distribution::Uniform ? scale * scale / 3.0 : scale * scale; }
  bool operator==(const ParamDistribution&) const = default;
};

struct LayerDistribution {
  std::size_t fan_in = 0;
  std::size_t fan_out = 0;
  ParamDistribution weight;
  ParamDistribution bias;
};

struct InitParams {
  InitScheme scheme;
  double c_w = 0.0;     // hidden-weight half-width scale
  double c_b = 0.0;     // bias standard deviation (equivalent, for uniform biases)
  double omega0 = 1.0;  // first-layer frequency scale
  std::size_t n0 = 1;
  std::size_t width = 1;
  std::size_t depth = 2;  // number of affine layers, final linear included
  std::size_t d_out = 1;
};

struct ResolvedInit {
  InitParams params;
  std::vector<LayerDistribution> layers;  // layer l at index l-1
};

/// Maps a scheme and dimensions to per-layer distributions. The first layer is
/// always U(-omega0/n0, omega0/n0). Throws std::invalid_argument on invalid
/// dims (width >= 1, depth >= 2, omega0 > 0) and std::domain_error for a
/// custom c_w off the curve.
ResolvedInit resolve_scheme(const InitScheme& scheme, double omega0, std::size_t n0,
                            std::size_t width, std::size_t depth, std::size_t d_out = 1);

/// Draws a network. Layers are filled in order, weights row-major then biases.
SirenNet sample_network(const ResolvedInit& init, Rng& rng);

}  // namespace siren
