#include <cmath>
#include <numbers>

#include "doctest.h"
#include "siren/diagnostics.hpp"

using namespace siren;

namespace {

SirenNet small_net(std::uint64_t seed, std::size_t width = 16, std::size_t depth = 4,
                   double omega0 = 3.0) {
  const auto init = resolve_scheme(InitScheme::sigma1(), omega0, 1, width, depth);
  Rng rng(seed);
  return sample_network(init, rng);
}

Matrix random_psd(std::size_t n, Rng& rng) {
  Matrix a(n, n);
  for (double& v : a.data()) v = rng.normal(0.0, 1.0);
  return matmul(a, a.transposed());
}

// exp(-t K) u0 by scaling and squaring a truncated Taylor series.
Vector expm_apply(const Matrix& k, double t, const Vector& u0) {
  const std::size_t n = k.rows();
  double norm = frobenius_norm(k) * t;
  int squarings = 0;
  while (norm > 0.5) {
    norm /= 2;
    ++squarings;
  }
  const double scale = -t / std::pow(2.0, squarings);
  Matrix a(n, n);
  for (std::size_t i = 0; i < k.size(); ++i) a.data()[i] = k.data()[i] * scale;
  Matrix e = Matrix::identity(n), term = Matrix::identity(n);
  for (int j = 1; j <= 30; ++j) {
    term = matmul(term, a);
    for (double& v : term.data()) v /= j;
    for (std::size_t i = 0; i < e.size(); ++i) e.data()[i] += term.data()[i];
  }
  for (int s = 0; s < squarings; ++s) e = matmul(e, e);
  return matvec(e, u0);
}

}  // namespace

TEST_CASE("fit_line and grids") {
  const Vector x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const auto f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r2 == doctest::Approx(1.0));
  CHECK_THROWS(fit_line(Vector{1, 1}, Vector{0, 1}));

  const Matrix g = linspace_inputs(-1, 1, 5);
  CHECK(g(0, 0) == -1.0);
  CHECK(g(4, 0) == 1.0);
  const Matrix p = periodic_grid(-1, 1, 4);
  CHECK(p(3, 0) == doctest::Approx(0.5));
}

TEST_CASE("ntk matrix") {
  const SirenNet net = small_net(1);
  const Vector x{0.37};
  const Vector fx = ntk_feature(net, x);

  const auto single = ntk_matrix(net, Matrix{{0.37}});
  CHECK(single.kernel(0, 0) == doctest::Approx(dot(fx, fx)).epsilon(1e-12));

  const auto dup = ntk_matrix(net, Matrix{{0.37}, {0.37}});
  CHECK(std::abs(dup.eigenvalues[1]) <= 1e-9 * dup.eigenvalues[0]);

  const Matrix xs = linspace_inputs(-1, 1, 12);
  const auto k = ntk_matrix(net, xs);
  double tr = 0.0;
  for (std::size_t i = 0; i < 12; ++i) {
    const Vector fi = ntk_feature(net, xs.row(i));
    tr += dot(fi, fi);
    for (std::size_t j = 0; j < 12; ++j) {
      const Vector fj = ntk_feature(net, xs.row(j));
      CHECK(k.kernel(i, j) == doctest::Approx(dot(fi, fj)).epsilon(1e-10));
    }
  }
  CHECK(trace(k.kernel) == doctest::Approx(tr).epsilon(1e-10));
  CHECK(k.normalized_trace == doctest::Approx(tr / (12.0 * 16.0)).epsilon(1e-10));
  CHECK(ntk_normalized_trace(net, xs) == doctest::Approx(k.normalized_trace).epsilon(1e-10));
  CHECK(k.eigenvalues.back() >= -1e-9 * k.eigenvalues.front());
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 12; ++j) CHECK(k.kernel(i, j) == doctest::Approx(k.kernel(j, i)).epsilon(1e-10));

  CHECK_THROWS_AS(ntk_matrix(net, Matrix(kMaxNtkInputs + 1, 1)), std::length_error);
}

TEST_CASE("linearized dynamics") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix k = random_psd(6, rng);
    const auto eig = eigh_symmetric(k);
    NtkResult ntk{k, eig.values, eig.vectors, 0.0};
    Vector u0(6);
    for (double& v : u0) v = rng.normal(0.0, 1.0);
    const Vector times{0.0, 0.01, 0.1, 0.5, 2.0};
    const auto traj = linearized_dynamics(ntk, u0, times);
    CHECK(traj[0] == u0);
    double prev = norm2(u0);
    for (std::size_t i = 1; i < times.size(); ++i) {
      const Vector ref = expm_apply(k, times[i], u0);
      for (std::size_t j = 0; j < 6; ++j) CHECK(std::abs(traj[i][j] - ref[j]) <= 1e-8);
      CHECK(norm2(traj[i]) <= prev + 1e-12);
      prev = norm2(traj[i]);
    }
  }

  const Matrix k = random_psd(4, rng);
  const auto eig = eigh_symmetric(k);
  NtkResult ntk{k, eig.values, eig.vectors, 0.0};
  const Vector v1 = eig.vectors.column(0);
  const auto mode = linearized_dynamics(ntk, v1, Vector{0.3});
  for (std::size_t j = 0; j < 4; ++j) CHECK(mode[0][j] == doctest::Approx(std::exp(-0.3 * eig.values[0]) * v1[j]));
  CHECK_THROWS(linearized_dynamics(ntk, v1, Vector{-1.0}));
}

TEST_CASE("signal spectrum") {
  const std::size_t m = 256;
  const double omega0 = 40.0;
  Vector low(m), high(m);
  for (std::size_t n = 0; n < m; ++n) {
    const double x = -1.0 + 2.0 * static_cast<double>(n) / m;
    // Periodic tones on [-1, 1): angular frequency pi k.
    low[n] = std::sin(std::numbers::pi * 6 * x);    // 18.8 < omega0 / 2
    high[n] = std::sin(std::numbers::pi * 26 * x);  // 81.7 ~ 2 omega0
  }
  const auto sl = signal_spectrum(low, -1, 1, omega0);
  const auto sh = signal_spectrum(high, -1, 1, omega0);
  CHECK(sl.cutoff_bin == 13);
  CHECK(sl.cutoff_energy_fraction <= 1e-20);
  CHECK(sh.cutoff_energy_fraction == doctest::Approx(1.0));

  // Parseval: sum_k |S_k|^2 = M sum_n s_n^2, counting mirrored bins.
  Rng rng(3);
  Vector s(m);
  for (double& v : s) v = rng.normal(0.0, 1.0);
  const auto rep = signal_spectrum(s, -1, 1, omega0);
  double spec = rep.magnitudes[0] * rep.magnitudes[0];
  for (std::size_t k = 1; k < rep.magnitudes.size(); ++k) {
    spec += (2 * k == m ? 1.0 : 2.0) * rep.magnitudes[k] * rep.magnitudes[k];
  }
  CHECK(spec == doctest::Approx(m * rep.signal_energy).epsilon(1e-10));
  CHECK(rep.cutoff_energy_fraction >= 0.0);
  CHECK(rep.cutoff_energy_fraction <= 1.0);
  CHECK_THROWS_AS(signal_spectrum(s, -1, 1, 500.0), std::invalid_argument);

  const auto out = output_spectrum(small_net(2), 128, -1, 1, 20.0);
  CHECK(out.frequencies.size() == 65);
}

TEST_CASE("fourier overlap") {
  // Circulant kernel: eigenvectors are Fourier modes.
  const std::size_t m = 16;
  Matrix k(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double d = 2 * std::numbers::pi * static_cast<double>((i + m - j) % m) / m;
      k(i, j) = 4.0 + 2.0 * std::cos(d) + 1.0 * std::cos(3 * d);
    }
  const auto eig = eigh_symmetric(k);
  NtkResult ntk{k, eig.values, eig.vectors, 0.0};
  const auto map = fourier_overlap(ntk, -1, 1, 10.0);
  REQUIRE(map.power.rows() == m);
  REQUIRE(map.power.cols() == m);
  for (std::size_t i = 0; i < m; ++i) {
    double sum = 0.0;
    for (double v : map.power.row(i)) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
  }
  // Top eigenvalue 64 is the DC mode; next pair 16 sits on |k| = 1.
  const Vector cent = overlap_centroids(map);
  CHECK(cent[0] == doctest::Approx(0.0).scale(1.0));
  CHECK(cent[1] == doctest::Approx(std::numbers::pi));
  CHECK(cent[2] == doctest::Approx(std::numbers::pi));
  for (std::size_t c = 1; c < map.frequencies.size(); ++c) CHECK(map.frequencies[c] > map.frequencies[c - 1]);
}

TEST_CASE("end-to-end Jacobian singular values of a scaled identity stack") {
  const std::size_t n = 6;
  const double scale = 0.8;
  Matrix w = Matrix::identity(n);
  for (double& v : w.data()) v *= scale;
  SirenNet net({DenseLayer{Matrix(n, 1), Vector(n)}, DenseLayer{w, Vector(n)}, DenseLayer{Matrix(1, n), Vector(1)}});
  const auto t = forward(net, Vector{0.5});
  for (double s : singular_values(end_to_end_jacobian(net, t))) CHECK(s == doctest::Approx(scale));
}

TEST_CASE("growth classification on synthetic series") {
  Vector d, lin, expo, flat;
  for (int l = 2; l <= 32; ++l) {
    d.push_back(l);
    lin.push_back(3.0 + 0.5 * l);
    expo.push_back(0.1 * std::pow(1.2, l));
    flat.push_back(2.0 + std::exp(-l));
  }
  CHECK(classify_growth(d, lin).law == GrowthLaw::Linear);
  const auto e = classify_growth(d, expo);
  CHECK(e.law == GrowthLaw::Exponential);
  CHECK(e.ratio == doctest::Approx(1.2));
  CHECK(classify_growth(d, flat).law == GrowthLaw::Plateau);
  CHECK(growth_law_name(GrowthLaw::Plateau) == "plateau");
  CHECK_THROWS(classify_growth(Vector{1, 2}, Vector{1, 2}));
}

TEST_CASE("small scans are deterministic and well formed") {
  NetworkDims dims{1, 32, 6, 1.0};
  const Matrix xs = linspace_inputs(-1, 1, 20);
  const auto a = variance_profile(InitScheme::sigma1(), dims, 3, xs, 9);
  const auto b = variance_profile(InitScheme::sigma1(), dims, 3, xs, 9);
  REQUIRE(a.layers.size() == 5);
  CHECK(a.last_hidden().preact_std == b.last_hidden().preact_std);
  CHECK(a.last_hidden().preact_se == doctest::Approx(a.last_hidden().preact_std / std::sqrt(60.0)));

  const std::size_t depths[] = {3, 5};
  const auto g = gradient_depth_scan(InitScheme::proposed(), dims, depths, xs, 2, 1);
  REQUIRE(g.rows.size() == 2);
  CHECK(g.rows[1].param_grad_var.size() == 5);
  const auto tr = ntk_trace_depth_scan(InitScheme::sitzmann(), dims, std::vector<std::size_t>{2, 3, 4}, xs, 2, 1);
  CHECK(tr.rows.size() == 3);
  const auto sv = jacobian_singular_spectrum(InitScheme::proposed(), dims, depths, xs, 2, 1);
  CHECK(sv.rows[0].singular_values.size() == 32);
  CHECK(sv.rows[0].normalized_max == doctest::Approx(sv.rows[0].max_singular / 2));
  CHECK(ensemble_seed(1, 4, 2) == ensemble_seed(1, 4, 2));
  CHECK(ensemble_seed(1, 4, 2) != ensemble_seed(1, 4, 3));
}
