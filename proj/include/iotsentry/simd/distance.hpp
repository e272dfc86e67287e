#pragma once

#include <cstddef>
#include <string_view>

namespace iotsentry::simd {

enum class Isa { scalar, avx2, neon };

std::string_view to_string(Isa isa);

/// True when the kernel set was compiled in and the running CPU supports it.
bool isa_available(Isa isa);

/// Kernel set picked at startup: the widest available, unless the
/// IOTSENTRY_SIMD environment variable names another available one.
Isa active_isa();

/// Forces a kernel set (for tests and benchmarks). Throws if unavailable.
void set_active_isa(Isa isa);

// All kernels accumulate |a_i - b_i| into four lanes (lane = i mod 4) over
// the largest multiple-of-four prefix, reduce as (l0 + l1) + (l2 + l3), then
// add the tail in order. Every ISA therefore returns bit-identical sums.

/// L1 distance between two rows of length `dim`.
double manhattan(const double* a, const double* b, std::size_t dim);

/// out[i] = L1 distance between `query` and row i of the row-major block
/// `rows` (n_rows x dim).
void manhattan_many(const double* query, const double* rows, std::size_t n_rows, std::size_t dim, double* out);

/// A kernel set as plain function pointers.
struct Kernels {
    double (*manhattan)(const double* a, const double* b, std::size_t dim);
    void (*manhattan_many)(const double* query, const double* rows, std::size_t n_rows, std::size_t dim, double* out);
};

/// Kernels of `isa`, or nullptr when it is not available here.
const Kernels* kernels(Isa isa);

namespace scalar {
double manhattan(const double* a, const double* b, std::size_t dim);
void manhattan_many(const double* query, const double* rows, std::size_t n_rows, std::size_t dim, double* out);
}  // namespace scalar

}  // namespace iotsentry::simd
