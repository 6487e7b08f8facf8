#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace siren {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles with value semantics.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  Vector column(std::size_t c) const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  /// Changes the shape, keeping the allocation when it is large enough.
  /// Entries are unspecified afterwards.
  void resize(std::size_t rows, std::size_t cols);

  Matrix transposed() const;
  bool all_finite() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// a * b. Throws std::invalid_argument on inner-dimension mismatch.
Matrix matmul(const Matrix& a, const Matrix& b);
/// a * x.
Vector matvec(const Matrix& a, std::span<const double> x);
/// a^T * x.
Vector matvec_transposed(const Matrix& a, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double frobenius_norm(const Matrix& m);
double trace(const Matrix& m);

/// Eigenpairs of a symmetric matrix. `values` are descending; column i of
/// `vectors` is the unit eigenvector for values[i].
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
};

/// Cyclic Jacobi eigensolver. The input is symmetrized as (M + M^T)/2 first.
/// Throws std::invalid_argument for non-square input and std::runtime_error
/// if the off-diagonal mass does not vanish within `max_sweeps`.
SymmetricEigen eigh_symmetric(const Matrix& m, int max_sweeps = 100);

/// Singular values of any rectangular matrix, descending.
Vector singular_values(const Matrix& m);

/// Full N-bin discrete Fourier transform, S_k = sum_n s_n exp(-2 pi i k n / N).
/// Radix-2 FFT for power-of-two lengths, direct summation otherwise.
/// Throws std::invalid_argument for inputs shorter than 2.
std::vector<std::complex<double>> dft(std::span<const double> signal);

/// |S_k| for k = 0..N/2.
Vector dft_half_magnitudes(std::span<const double> signal);

/// Seedable generator. The engine is std::mt19937_64 (output fully specified
/// by the standard); the uniform and normal transforms are implemented here so
/// draws are identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double unit();
  /// Uniform in [lo, hi). Throws std::invalid_argument unless lo < hi.
  double uniform(double lo, double hi);
  /// Box-Muller normal. stddev == 0 returns mean without consuming state.
  double normal(double mean, double stddev);

  /// Independent generator for sub-task `stream`, derived from this seed.
  Rng fork(std::uint64_t stream) const { return Rng(seed_, mix(stream_, stream)); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  static std::uint64_t mix(std::uint64_t a, std::uint64_t b);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace siren
