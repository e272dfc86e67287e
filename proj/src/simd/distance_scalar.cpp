#include <cmath>

#include "iotsentry/simd/distance.hpp"

namespace iotsentry::simd::scalar {

double manhattan(const double* a, const double* b, std::size_t dim) {
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    const std::size_t body = dim & ~std::size_t{3};
    for (std::size_t i = 0; i < body; i += 4) {
        lane[0] += std::fabs(a[i] - b[i]);
        lane[1] += std::fabs(a[i + 1] - b[i + 1]);
        lane[2] += std::fabs(a[i + 2] - b[i + 2]);
        lane[3] += std::fabs(a[i + 3] - b[i + 3]);
    }
    double sum = (lane[0] + lane[1]) + (lane[2] + lane[3]);
    for (std::size_t i = body; i < dim; ++i) sum += std::fabs(a[i] - b[i]);
    return sum;
}

void manhattan_many(const double* query, const double* rows, std::size_t n_rows, std::size_t dim, double* out) {
    for (std::size_t r = 0; r < n_rows; ++r) out[r] = manhattan(query, rows + r * dim, dim);
}

}  // namespace iotsentry::simd::scalar
