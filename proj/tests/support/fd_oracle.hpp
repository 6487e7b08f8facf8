#pragma once

// Central finite differences for the network derivatives. Step h = 1e-6 max(1, |theta|).

#include <algorithm>
#include <cmath>
#include <functional>

#include "siren/network.hpp"

namespace fd {

inline double step(double v) { return 1e-6 * std::max(1.0, std::abs(v)); }

// Max abs difference over max abs reference entry.
inline double relative_error(std::span<const double> analytic, std::span<const double> numeric) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
    scale = std::max(scale, std::abs(numeric[i]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

inline siren::Vector param_gradient(const siren::SirenNet& net, std::span<const double> x) {
  siren::SirenNet probe = net;
  siren::Vector theta = net.flat_parameters();
  siren::Vector g(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double t = theta[i], h = step(t);
    theta[i] = t + h;
    probe.set_flat_parameters(theta);
    const double up = siren::forward(probe, x).output[0];
    theta[i] = t - h;
    probe.set_flat_parameters(theta);
    const double down = siren::forward(probe, x).output[0];
    theta[i] = t;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

inline siren::Matrix input_gradient(const siren::SirenNet& net, std::span<const double> x0) {
  siren::Matrix g(net.output_dim(), x0.size());
  siren::Vector x(x0.begin(), x0.end());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double t = x[k], h = step(t);
    x[k] = t + h;
    const auto up = siren::forward(net, x).output;
    x[k] = t - h;
    const auto down = siren::forward(net, x).output;
    x[k] = t;
    for (std::size_t o = 0; o < up.size(); ++o) g(o, k) = (up[o] - down[o]) / (2 * h);
  }
  return g;
}

// Output of layers from..to (1-based, inclusive) applied to h; sine except on layer L.
inline siren::Vector propagate(const siren::SirenNet& net, siren::Vector h, std::size_t from,
                               std::size_t to) {
  for (std::size_t l = from; l <= to; ++l) {
    const auto& layer = net.layer(l);
    siren::Vector z = siren::matvec(layer.weight, h);
    for (std::size_t i = 0; i < z.size(); ++i) {
      z[i] += layer.bias[i];
      if (l < net.depth()) z[i] = std::sin(z[i]);
    }
    h = std::move(z);
  }
  return h;
}

// d h_to / d h_{from-1} by perturbing h_{from-1}.
inline siren::Matrix block_jacobian(const siren::SirenNet& net, const siren::Vector& h0,
                                    std::size_t from, std::size_t to) {
  const std::size_t out = net.layer(to).fan_out();
  siren::Matrix j(out, h0.size());
  siren::Vector h = h0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double t = h[k], s = step(t);
    h[k] = t + s;
    const auto up = propagate(net, h, from, to);
    h[k] = t - s;
    const auto down = propagate(net, h, from, to);
    h[k] = t;
    for (std::size_t i = 0; i < out; ++i) j(i, k) = (up[i] - down[i]) / (2 * s);
  }
  return j;
}

}  // namespace fd
