#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "siren/linalg.hpp"

using namespace siren;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (double& v : m.data()) v = rng.uniform(-1.0, 1.0);
  return m;
}

Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace

TEST_CASE("matmul") {
  Rng rng(3);
  const Matrix m = random_matrix(3, 4, rng);
  CHECK(matmul(Matrix::identity(3), m) == m);
  CHECK(matmul(Matrix{{1, 2}, {3, 4}}, Matrix{{0}, {1}}) == Matrix{{2}, {4}});

  const Matrix a = random_matrix(5, 7, rng), b = random_matrix(7, 3, rng);
  CHECK(max_abs_diff(matmul(a, b), naive_matmul(a, b)) <= 1e-14);
  CHECK_THROWS_AS(matmul(a, a), std::invalid_argument);

  const Vector x{1.0, -2.0, 0.5, 3.0, 1.0, 0.0, -1.0};
  const Vector y = matvec(a, x);
  for (std::size_t i = 0; i < 5; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < 7; ++k) s += a(i, k) * x[k];
    CHECK(y[i] == doctest::Approx(s).epsilon(1e-14));
  }
  const Vector z = matvec_transposed(a, y);
  const Vector z_ref = matvec(a.transposed(), y);
  for (std::size_t i = 0; i < z.size(); ++i) CHECK(z[i] == doctest::Approx(z_ref[i]).epsilon(1e-14));
}

TEST_CASE("eigh_symmetric small cases") {
  const double d[] = {3.0, 1.0, 2.0};
  const auto e = eigh_symmetric(Matrix::diagonal(d));
  CHECK(e.values == Vector{3.0, 2.0, 1.0});

  const auto e2 = eigh_symmetric(Matrix{{2, 1}, {1, 2}});
  CHECK(e2.values[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(e2.values[1] == doctest::Approx(1.0).epsilon(1e-14));
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(e2.vectors(0, 0)) == doctest::Approx(r));
  CHECK(e2.vectors(0, 0) * e2.vectors(1, 0) == doctest::Approx(0.5));
  CHECK(e2.vectors(0, 1) * e2.vectors(1, 1) == doctest::Approx(-0.5));
  CHECK_THROWS_AS(eigh_symmetric(Matrix(2, 3)), std::invalid_argument);
}

TEST_CASE("eigh_symmetric reconstructs random symmetric matrices") {
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    Matrix a = random_matrix(8, 8, rng);
    a = matmul(a, a.transposed());
    for (std::size_t i = 0; i < 8; ++i) a(i, i) -= 1.0;  // indefinite
    const auto e = eigh_symmetric(a);
    const Matrix rec = matmul(matmul(e.vectors, Matrix::diagonal(e.values)), e.vectors.transposed());
    CHECK(max_abs_diff(rec, a) <= 1e-9);
    const Matrix vtv = matmul(e.vectors.transposed(), e.vectors);
    CHECK(max_abs_diff(vtv, Matrix::identity(8)) <= 1e-12);
    for (std::size_t i = 1; i < 8; ++i) CHECK(e.values[i - 1] >= e.values[i]);
  }
}

TEST_CASE("singular_values") {
  const double d[] = {2.0, -3.0};
  CHECK(singular_values(Matrix::diagonal(d)) == Vector{3.0, 2.0});
  for (double s : singular_values(Matrix(3, 2))) CHECK(s == 0.0);

  Rng rng(5);
  const Matrix m = random_matrix(6, 4, rng);
  const auto e = eigh_symmetric(matmul(m.transposed(), m));
  const Vector s = singular_values(m);
  REQUIRE(s.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(s[i] - std::sqrt(e.values[i])) <= 1e-9);
}

TEST_CASE("dft") {
  const auto c = dft(Vector{1, 1, 1, 1});
  CHECK(std::abs(c[0]) == doctest::Approx(4.0));
  for (std::size_t k = 1; k < 4; ++k) CHECK(std::abs(c[k]) <= 1e-14);

  Vector tone(8);
  for (std::size_t n = 0; n < 8; ++n) tone[n] = std::cos(2 * std::numbers::pi * n / 8.0);
  const auto t = dft(tone);
  for (std::size_t k = 0; k < 8; ++k) {
    CAPTURE(k);
    CHECK(std::abs(t[k]) == doctest::Approx(k == 1 || k == 7 ? 4.0 : 0.0).epsilon(1e-12));
  }

  Rng rng(2);
  for (std::size_t len : {16u, 12u, 7u}) {
    Vector s(len);
    for (double& v : s) v = rng.normal(0.0, 1.0);
    const auto fast = dft(s);
    for (std::size_t k = 0; k < len; ++k) {
      std::complex<double> ref = 0.0;
      for (std::size_t n = 0; n < len; ++n) {
        ref += s[n] * std::polar(1.0, -2 * std::numbers::pi * double(k * n) / double(len));
      }
      CHECK(std::abs(fast[k] - ref) <= 1e-12);
    }
    const Vector half = dft_half_magnitudes(s);
    CHECK(half.size() == len / 2 + 1);
    CHECK(half[1] == doctest::Approx(std::abs(fast[1])));
  }
  CHECK_THROWS_AS(dft(Vector{1.0}), std::invalid_argument);
}

TEST_CASE("rng moments and determinism") {
  Rng r(42);
  CHECK(r.normal(0.0, 0.0) == 0.0);
  CHECK_THROWS_AS(r.uniform(1.0, 1.0), std::invalid_argument);

  const int n = 1'000'000;
  double su = 0.0, sn = 0.0, sn2 = 0.0;
  Rng u(1), g(2);
  bool in_range = true;
  for (int i = 0; i < n; ++i) {
    const double x = u.uniform(-1.0, 1.0);
    in_range &= x >= -1.0 && x < 1.0;
    su += x;
    const double y = g.normal(0.0, 2.0);
    sn += y;
    sn2 += y * y;
  }
  CHECK(in_range);
  CHECK(std::abs(su / n) <= 0.005);
  const double mean = sn / n;
  CHECK(sn2 / n - mean * mean == doctest::Approx(4.0).epsilon(0.0125));

  Rng a(9, 3), b(9, 3), c(9, 4);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double va = a.unit();
    CHECK(va == b.unit());
    differs |= va != c.unit();
  }
  CHECK(differs);
  CHECK(Rng(9).fork(5).unit() == Rng(9).fork(5).unit());
}
