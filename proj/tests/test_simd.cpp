#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "doctest.h"
#include "iotsentry/error.hpp"
#include "iotsentry/neighbors.hpp"
#include "iotsentry/simd/distance.hpp"
#include "oracles/fixtures.hpp"

using namespace iotsentry;
namespace simd = iotsentry::simd;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

std::vector<double> random_values(std::size_t n, std::mt19937_64& g) {
    std::vector<double> v(n);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> e(-30, 30);
    for (auto& x : v) x = std::ldexp(u(g), e(g));
    return v;
}

struct VectorSet {
    simd::Isa isa;
    const simd::Kernels* k;
};

std::vector<VectorSet> available_kernels() {
    std::vector<VectorSet> out;
    for (const auto isa : {simd::Isa::avx2, simd::Isa::neon})
        if (const auto* k = simd::kernels(isa)) out.push_back({isa, k});
    return out;
}

struct IsaGuard {
    simd::Isa saved = simd::active_isa();
    ~IsaGuard() { simd::set_active_isa(saved); }
};

}  // namespace

TEST_CASE("scalar kernel agrees with a naive sum") {
    std::mt19937_64 g(1);
    for (std::size_t d = 0; d < 80; ++d) {
        const auto a = random_values(d, g);
        const auto b = random_values(d, g);
        double naive = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            naive += std::fabs(a[i] - b[i]);
            scale += std::fabs(a[i]) + std::fabs(b[i]);
        }
        CHECK(std::fabs(simd::scalar::manhattan(a.data(), b.data(), d) - naive) <= 1e-14 * scale);
    }
}

TEST_CASE("vector kernels are bit-identical to the scalar reference") {
    const auto kernels = available_kernels();
    MESSAGE("vector kernel sets available: " << kernels.size() << ", active: " << simd::to_string(simd::active_isa()));
    std::mt19937_64 g(2);
    for (const auto& k : kernels) {
        for (std::size_t d = 0; d < 70; ++d) {
            for (std::size_t rows = 0; rows < 10; ++rows) {
                const auto q = random_values(d, g);
                const auto block = random_values(rows * d, g);
                std::vector<double> ref(rows), got(rows);
                simd::scalar::manhattan_many(q.data(), block.data(), rows, d, ref.data());
                k.k->manhattan_many(q.data(), block.data(), rows, d, got.data());
                for (std::size_t r = 0; r < rows; ++r) {
                    CHECK(same_bits(ref[r], got[r]));
                    CHECK(same_bits(ref[r], k.k->manhattan(q.data(), block.data() + r * d, d)));
                    CHECK(same_bits(ref[r], simd::scalar::manhattan(q.data(), block.data() + r * d, d)));
                }
            }
        }
    }
}

TEST_CASE("isa selection") {
    IsaGuard guard;
    CHECK(simd::isa_available(simd::Isa::scalar));
    simd::set_active_isa(simd::Isa::scalar);
    CHECK(simd::active_isa() == simd::Isa::scalar);
    REQUIRE(simd::kernels(simd::Isa::scalar) != nullptr);
    for (const auto isa : {simd::Isa::avx2, simd::Isa::neon}) {
        CHECK((simd::kernels(isa) != nullptr) == simd::isa_available(isa));
        if (!simd::isa_available(isa)) CHECK_THROWS_AS(simd::set_active_isa(isa), Error);
    }
}

TEST_CASE("k-NN predictions do not depend on the kernel set") {
    IsaGuard guard;
    const auto train = fixtures::blobs(700, 46, 5, 3, 1.5);
    const auto query = fixtures::blobs(90, 46, 5, 4, 1.5);
    simd::set_active_isa(simd::Isa::scalar);
    const auto knn = FittedKnn::fit(train.x, train.y, {});
    const auto ref_n = knn.kneighbors(query.x, 5);
    const auto ref_p = knn.predict_proba(query.x);
    for (const auto& k : available_kernels()) {
        simd::set_active_isa(k.isa);
        CHECK(knn.kneighbors(query.x, 5) == ref_n);
        CHECK(knn.predict_proba(query.x) == ref_p);
    }
}
