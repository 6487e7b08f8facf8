#pragma once

#include <cstddef>

namespace siren::detail {

// Elementwise sin and cos over n values. Built with vector math enabled, so
// results may differ from std::sin by a few ulp.
void sincos_n(const double* z, double* s, double* c, std::size_t n);
void sin_n(const double* z, double* s, std::size_t n);

}  // namespace siren::detail
