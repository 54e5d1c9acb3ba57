#include "lvs/simd/kernels.hpp"

#include <atomic>

namespace lvs::simd {

namespace {

bool cpu_has_avx2() {
#if defined(LVS_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

std::atomic<Isa>& active() {
    static std::atomic<Isa> isa{detected_isa()};
    return isa;
}

}  // namespace

std::string_view to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

Isa detected_isa() {
    static const Isa isa = cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
    return isa;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

Isa set_active_isa(Isa isa) {
    if (isa == Isa::Avx2 && detected_isa() != Isa::Avx2) {
        isa = Isa::Scalar;
    }
    return active().exchange(isa);
}

#if defined(LVS_HAVE_AVX2)
#define LVS_DISPATCH(fn, ...)                 \
    if (active_isa() == Isa::Avx2) {          \
        return avx2::fn(__VA_ARGS__);         \
    }                                         \
    return scalar::fn(__VA_ARGS__)
#else
#define LVS_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#endif

void gemm_nn(int M, int N, int K, const float* A, int lda, const float* B, int ldb, float* C, int ldc,
             bool accumulate) {
    LVS_DISPATCH(gemm_nn, M, N, K, A, lda, B, ldb, C, ldc, accumulate);
}

void gemm_tn(int M, int N, int K, const float* A, int lda, const float* B, int ldb, float* C, int ldc,
             bool accumulate) {
    LVS_DISPATCH(gemm_tn, M, N, K, A, lda, B, ldb, C, ldc, accumulate);
}

void gemm_nt(int M, int N, int K, const float* A, int lda, const float* B, int ldb, float* C, int ldc,
             bool accumulate) {
    LVS_DISPATCH(gemm_nt, M, N, K, A, lda, B, ldb, C, ldc, accumulate);
}

void rmsprop_update(float* w, const float* g, float* v, std::size_t n, float lr, float decay, float eps) {
    LVS_DISPATCH(rmsprop_update, w, g, v, n, lr, decay, eps);
}

#undef LVS_DISPATCH

void gemm_nn(int M, int N, int K, const double* A, int lda, const double* B, int ldb, double* C, int ldc,
             bool accumulate) {
    scalar::gemm_nn(M, N, K, A, lda, B, ldb, C, ldc, accumulate);
}

void gemm_tn(int M, int N, int K, const double* A, int lda, const double* B, int ldb, double* C, int ldc,
             bool accumulate) {
    scalar::gemm_tn(M, N, K, A, lda, B, ldb, C, ldc, accumulate);
}

void gemm_nt(int M, int N, int K, const double* A, int lda, const double* B, int ldb, double* C, int ldc,
             bool accumulate) {
    scalar::gemm_nt(M, N, K, A, lda, B, ldb, C, ldc, accumulate);
}

void rmsprop_update(double* w, const double* g, double* v, std::size_t n, double lr, double decay, double eps) {
    scalar::rmsprop_update(w, g, v, n, lr, decay, eps);
}

}  // namespace lvs::simd
