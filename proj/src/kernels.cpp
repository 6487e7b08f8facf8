#include "kernels.hpp"

#include <cmath>

namespace siren::detail {

void sincos_n(const double* z, double* s, double* c, std::size_t n) {
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = std::sin(z[i]);
    c[i] = std::cos(z[i]);
  }
}

void sin_n(const double* z, double* s, std::size_t n) {
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) s[i] = std::sin(z[i]);
}

}  // namespace siren::detail
