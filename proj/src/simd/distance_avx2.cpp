#include <immintrin.h>

#include <cmath>

#include "kernels.hpp"

namespace iotsentry::simd::avx2 {

namespace {

inline __m256d abs_diff(__m256d a, __m256d b) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    return _mm256_andnot_pd(sign, _mm256_sub_pd(a, b));
}

inline double reduce(__m256d acc) {
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

}  // namespace

double manhattan(const double* a, const double* b, std::size_t dim) {
    __m256d acc = _mm256_setzero_pd();
    const std::size_t body = dim & ~std::size_t{3};
    for (std::size_t i = 0; i < body; i += 4)
        acc = _mm256_add_pd(acc, abs_diff(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    double sum = reduce(acc);
    for (std::size_t i = body; i < dim; ++i) sum += std::fabs(a[i] - b[i]);
    return sum;
}

void manhattan_many(const double* query, const double* rows, std::size_t n_rows, std::size_t dim, double* out) {
    const std::size_t body = dim & ~std::size_t{3};
    std::size_t r = 0;
    // Two rows per pass share the query loads.
    for (; r + 1 < n_rows; r += 2) {
        const double* x0 = rows + r * dim;
        const double* x1 = x0 + dim;
        __m256d acc0 = _mm256_setzero_pd();
        __m256d acc1 = _mm256_setzero_pd();
        for (std::size_t i = 0; i < body; i += 4) {
            const __m256d q = _mm256_loadu_pd(query + i);
            acc0 = _mm256_add_pd(acc0, abs_diff(q, _mm256_loadu_pd(x0 + i)));
            acc1 = _mm256_add_pd(acc1, abs_diff(q, _mm256_loadu_pd(x1 + i)));
        }
        double s0 = reduce(acc0);
        double s1 = reduce(acc1);
        for (std::size_t i = body; i < dim; ++i) {
            s0 += std::fabs(query[i] - x0[i]);
            s1 += std::fabs(query[i] - x1[i]);
        }
        out[r] = s0;
        out[r + 1] = s1;
    }
    for (; r < n_rows; ++r) out[r] = manhattan(query, rows + r * dim, dim);
}

}  // namespace iotsentry::simd::avx2
