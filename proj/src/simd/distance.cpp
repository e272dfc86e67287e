#include "iotsentry/simd/distance.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "iotsentry/error.hpp"
#include "kernels.hpp"

namespace iotsentry::simd {

std::string_view to_string(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "scalar";
}

bool isa_available(Isa isa) {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2:
#if defined(IOTSENTRY_HAVE_AVX2)
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
        case Isa::neon:
#if defined(IOTSENTRY_HAVE_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

namespace {

Isa detect() {
    if (const char* env = std::getenv("IOTSENTRY_SIMD")) {
        const std::string_view want(env);
        for (const Isa isa : {Isa::scalar, Isa::avx2, Isa::neon})
            if (want == to_string(isa) && isa_available(isa)) return isa;
    }
    if (isa_available(Isa::avx2)) return Isa::avx2;
    if (isa_available(Isa::neon)) return Isa::neon;
    return Isa::scalar;
}

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{detect()};
    return isa;
}

}  // namespace

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
    if (!isa_available(isa)) throw Error("SIMD kernel set '" + std::string(to_string(isa)) + "' is not available");
    current().store(isa, std::memory_order_relaxed);
}

namespace {

constexpr Kernels kScalar{&scalar::manhattan, &scalar::manhattan_many};
#if defined(IOTSENTRY_HAVE_AVX2)
constexpr Kernels kAvx2{&avx2::manhattan, &avx2::manhattan_many};
#endif
#if defined(IOTSENTRY_HAVE_NEON)
constexpr Kernels kNeon{&neon::manhattan, &neon::manhattan_many};
#endif

}  // namespace

const Kernels* kernels(Isa isa) {
    if (!isa_available(isa)) return nullptr;
    switch (isa) {
        case Isa::scalar: return &kScalar;
#if defined(IOTSENTRY_HAVE_AVX2)
        case Isa::avx2: return &kAvx2;
#endif
#if defined(IOTSENTRY_HAVE_NEON)
        case Isa::neon: return &kNeon;
#endif
        default: return nullptr;
    }
}

double manhattan(const double* a, const double* b, std::size_t dim) {
    switch (active_isa()) {
#if defined(IOTSENTRY_HAVE_AVX2)
        case Isa::avx2: return avx2::manhattan(a, b, dim);
#endif
#if defined(IOTSENTRY_HAVE_NEON)
        case Isa::neon: return neon::manhattan(a, b, dim);
#endif
        default: return scalar::manhattan(a, b, dim);
    }
}

void manhattan_many(const double* query, const double* rows, std::size_t n_rows, std::size_t dim, double* out) {
    switch (active_isa()) {
#if defined(IOTSENTRY_HAVE_AVX2)
        case Isa::avx2: avx2::manhattan_many(query, rows, n_rows, dim, out); return;
#endif
#if defined(IOTSENTRY_HAVE_NEON)
        case Isa::neon: neon::manhattan_many(query, rows, n_rows, dim, out); return;
#endif
        default: scalar::manhattan_many(query, rows, n_rows, dim, out); return;
    }
}

}  // namespace iotsentry::simd
