#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "fd_oracle.hpp"
#include "siren/init.hpp"
#include "siren/network.hpp"

using namespace siren;

namespace {

SirenNet scalar_net(double w1, double b1, double w2, double b2) {
  return SirenNet({DenseLayer{Matrix{{w1}}, {b1}}, DenseLayer{Matrix{{w2}}, {b2}}});
}

SirenNet random_net(std::size_t n0, std::size_t width, std::size_t depth, std::uint64_t seed,
                    double omega0 = 2.0, std::size_t d_out = 1) {
  const auto init = resolve_scheme(InitScheme::sigma1(), omega0, n0, width, depth, d_out);
  Rng rng(seed);
  return sample_network(init, rng);
}

Vector random_point(std::size_t n0, Rng& rng) {
  Vector x(n0);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  return x;
}

double max_abs(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace

TEST_CASE("forward hand-evaluated cases") {
  const auto t = forward(scalar_net(2.0, 0.5, 3.0, -1.0), Vector{1.0});
  CHECK(t.output[0] == doctest::Approx(3.0 * std::sin(2.5) - 1.0).epsilon(1e-15));

  SirenNet linear({DenseLayer{Matrix{{1.0, 2.0}}, {0.5}}});
  CHECK(forward(linear, Vector{1.0, -1.0}).output[0] == doctest::Approx(-0.5));

  SirenNet zero({DenseLayer{Matrix(4, 2), Vector(4)}, DenseLayer{Matrix(4, 4), Vector(4)},
                 DenseLayer{Matrix(1, 4), Vector(1)}});
  const auto z = forward(zero, Vector{0.3, -0.7});
  CHECK(z.output[0] == 0.0);
  for (const auto& pre : z.pre_activations)
    for (double v : pre) CHECK(v == 0.0);
}

TEST_CASE("network construction checks") {
  CHECK_THROWS_AS(SirenNet({DenseLayer{Matrix(2, 1), Vector(3)}}), std::invalid_argument);
  CHECK_THROWS_AS(SirenNet({DenseLayer{Matrix(2, 1), Vector(2)}, DenseLayer{Matrix(1, 3), Vector(1)}}),
                  std::invalid_argument);
  const SirenNet net = random_net(1, 4, 3, 1);
  CHECK_THROWS_AS(net.layer(0), std::out_of_range);
  CHECK_THROWS_AS(net.layer(4), std::out_of_range);
  CHECK_THROWS_AS(forward(net, Vector{1.0, 2.0}), std::invalid_argument);
  CHECK(net.parameter_count() == (4 + 4) + (16 + 4) + (4 + 1));
}

TEST_CASE("scalar derivatives by hand") {
  const double w1 = 1.3, b1 = 0.2, w2 = -0.7, x = 0.4;
  const SirenNet net = scalar_net(w1, b1, w2, 0.1);
  const auto t = forward(net, Vector{x});
  CHECK(input_gradient(net, t)(0, 0) == doctest::Approx(w2 * w1 * std::cos(w1 * x + b1)));
  const auto g = param_gradient(net, t, Vector{1.0});
  CHECK(g.layers[0].weight(0, 0) == doctest::Approx(w2 * std::cos(w1 * x + b1) * x));
  CHECK(g.layers[1].bias[0] == 1.0);

  const auto zero = param_gradient(net, t, Vector{0.0});
  for (double v : zero.flatten()) CHECK(v == 0.0);

  const SirenNet flat = scalar_net(0.0, 0.2, w2, 0.1);
  CHECK(input_gradient(flat, forward(flat, Vector{x}))(0, 0) == 0.0);
}

TEST_CASE("layer Jacobian special cases") {
  SirenNet net({DenseLayer{Matrix{{1.0}, {2.0}}, Vector(2)}, DenseLayer{Matrix{{1, 2}, {3, 4}}, Vector(2)},
                DenseLayer{Matrix{{1, 1}}, Vector(1)}});
  const auto t0 = forward(net, Vector{0.0});
  CHECK(layer_jacobian(net, t0, 2) == net.layer(2).weight);
  CHECK(end_to_end_jacobian(net, t0) == net.layer(2).weight);

  const double hp = std::numbers::pi / 2;
  net.layer(2).bias = {hp, hp};
  const auto t1 = forward(net, Vector{0.0});
  for (double v : layer_jacobian(net, t1, 2).data()) CHECK(std::abs(v) <= 1e-15);
  CHECK_THROWS_AS(layer_jacobian(net, t1, 0), std::out_of_range);
}

TEST_CASE("all gradients match central differences") {
  Rng pts(17);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    for (std::size_t depth : {3u, 5u}) {
      const SirenNet net = random_net(2, 8, depth, seed);
      const Vector x = random_point(2, pts);
      const auto t = forward(net, x);
      CAPTURE(seed);
      CAPTURE(depth);
      CHECK(fd::relative_error(param_gradient(net, t, Vector{1.0}).flatten(), fd::param_gradient(net, x)) <= 1e-6);
      CHECK(fd::relative_error(input_gradient(net, t).values(), fd::input_gradient(net, x).values()) <= 1e-6);
      for (std::size_t l = 2; l <= depth; ++l) {
        const Matrix num = fd::block_jacobian(net, t.hidden(l - 1), l, l);
        CHECK(fd::relative_error(layer_jacobian(net, t, l).values(), num.values()) <= 1e-6);
      }
      const Matrix e2e = fd::block_jacobian(net, t.hidden(1), 2, depth - 1);
      CHECK(fd::relative_error(end_to_end_jacobian(net, t).values(), e2e.values()) <= 1e-5);
    }
  }
}

TEST_CASE("chain consistency and linear output layer") {
  const SirenNet net = random_net(3, 6, 4, 21);
  const Vector x{0.2, -0.4, 0.9};
  const auto t = forward(net, x);
  Matrix chain = layer_jacobian(net, t, 4);
  for (std::size_t l = 3; l >= 2; --l) chain = matmul(chain, layer_jacobian(net, t, l));
  chain = matmul(chain, layer_jacobian(net, t, 1));
  CHECK(max_abs(chain, input_gradient(net, t)) <= 1e-12);

  SirenNet shifted = net;
  shifted.layer(4).bias[0] += 0.25;
  CHECK(forward(shifted, x).output[0] - t.output[0] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(forward(net, x).output == t.output);
}

TEST_CASE("ntk features") {
  const SirenNet net = random_net(1, 8, 4, 3);
  const Vector x{0.3}, y{-0.6};
  const Vector fx = ntk_feature(net, x), fy = ntk_feature(net, y);
  CHECK(fx == param_gradient(net, forward(net, x), Vector{1.0}).flatten());
  CHECK(dot(fx, fy) == doctest::Approx(dot(fy, fx)).epsilon(1e-14));
  CHECK(fx.size() == net.parameter_count());
  CHECK_THROWS_AS(ntk_feature(random_net(1, 4, 3, 1, 1.0, 2), x), std::invalid_argument);
}

TEST_CASE("batched passes agree with single-sample passes") {
  const SirenNet net = random_net(2, 16, 5, 8, 10.0);
  Rng rng(4);
  Matrix xs(7, 2);
  for (double& v : xs.data()) v = rng.uniform(-1.0, 1.0);
  const Matrix out = predict(net, xs);
  Matrix up(7, 1);
  ParamGradient sum;
  Vector acc(net.parameter_count(), 0.0);
  for (std::size_t i = 0; i < 7; ++i) {
    up(i, 0) = 0.1 * static_cast<double>(i) - 0.3;
    const Vector xi(xs.row(i).begin(), xs.row(i).end());
    const auto t = forward(net, xi);
    CHECK(out(i, 0) == doctest::Approx(t.output[0]).epsilon(1e-12));
    const Vector g = param_gradient(net, t, Vector{up(i, 0)}).flatten();
    for (std::size_t k = 0; k < g.size(); ++k) acc[k] += g[k];
    const Matrix ig = input_gradient(net, t);
    const Matrix batch_ig = input_gradients(net, xs);
    CHECK(batch_ig(i, 0) == doctest::Approx(ig(0, 0)).epsilon(1e-10));
    CHECK(batch_ig(i, 1) == doctest::Approx(ig(0, 1)).epsilon(1e-10));
  }
  const Vector batch = backward_batch(net, forward_batch(net, xs), up).flatten();
  CHECK(fd::relative_error(batch, acc) <= 1e-12);
}

TEST_CASE("flat parameters and serialization round-trip") {
  SirenNet net = random_net(2, 5, 4, 12);
  net.scheme = InitScheme::sitzmann();
  net.omega0 = 30.0;
  net.seed = 12;
  Vector theta = net.flat_parameters();
  CHECK(theta.size() == net.parameter_count());
  CHECK(theta[0] == net.layer(1).weight(0, 0));
  CHECK(theta[10] == net.layer(1).bias[0]);
  theta[0] = 9.0;
  net.set_flat_parameters(theta);
  CHECK(net.layer(1).weight(0, 0) == 9.0);
  CHECK_THROWS_AS(net.set_flat_parameters(Vector(3)), std::invalid_argument);

  CHECK(network_from_json(network_to_json(net)) == net);
  const auto path = std::filesystem::temp_directory_path() / "siren_roundtrip.json";
  save_network(net, path.string());
  CHECK(load_network(path.string()) == net);
  std::filesystem::remove(path);
  CHECK_THROWS(network_from_json("{\"format\": \"other\"}"));
  CHECK_THROWS(load_network("/nonexistent/net.json"));
}
