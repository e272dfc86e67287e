#include <arm_neon.h>

#include <cmath>

#include "kernels.hpp"

namespace iotsentry::simd::neon {

// Two float64x2 accumulators hold lanes {0,1} and {2,3}.

double manhattan(const double* a, const double* b, std::size_t dim) {
    float64x2_t lo = vdupq_n_f64(0.0);
    float64x2_t hi = vdupq_n_f64(0.0);
    const std::size_t body = dim & ~std::size_t{3};
    for (std::size_t i = 0; i < body; i += 4) {
        lo = vaddq_f64(lo, vabdq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
        hi = vaddq_f64(hi, vabdq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
    }
    double sum = (vgetq_lane_f64(lo, 0) + vgetq_lane_f64(lo, 1)) + (vgetq_lane_f64(hi, 0) + vgetq_lane_f64(hi, 1));
    for (std::size_t i = body; i < dim; ++i) sum += std::fabs(a[i] - b[i]);
    return sum;
}

void manhattan_many(const double* query, const double* rows, std::size_t n_rows, std::size_t dim, double* out) {
    for (std::size_t r = 0; r < n_rows; ++r) out[r] = manhattan(query, rows + r * dim, dim);
}

}  // namespace iotsentry::simd::neon
