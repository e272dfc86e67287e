#pragma once

#include <cstddef>

// Vector kernel sets. Each is compiled only for its own architecture.

namespace iotsentry::simd::avx2 {
double manhattan(const double* a, const double* b, std::size_t dim);
void manhattan_many(const double* query, const double* rows, std::size_t n_rows, std::size_t dim, double* out);
}  // namespace iotsentry::simd::avx2

namespace iotsentry::simd::neon {
double manhattan(const double* a, const double* b, std::size_t dim);
void manhattan_many(const double* query, const double* rows, std::size_t n_rows, std::size_t dim, double* out);
}  // namespace iotsentry::simd::neon
