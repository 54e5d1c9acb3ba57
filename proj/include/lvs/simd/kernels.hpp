#pragma once

// Dense kernels behind the network layers. Every entry point has a scalar
// reference implementation; float entry points additionally have an AVX2/FMA
// variant chosen at runtime when the CPU supports it.
//
// All matrices are row-major with explicit leading dimensions. When
// `accumulate` is false C is overwritten, otherwise the product is added to it.

#include <cmath>
#include <cstddef>
#include <string_view>

namespace lvs::simd {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);

/// Best ISA compiled in and supported by this CPU.
Isa detected_isa();

/// ISA used by the float dispatchers. Defaults to detected_isa().
Isa active_isa();

/// Forces the dispatch target; requesting an unsupported ISA falls back to Scalar.
/// Returns the previous setting. Not thread-safe against concurrent kernel calls.
Isa set_active_isa(Isa isa);

// C[M,N] = A[M,K] * B[K,N]
void gemm_nn(int M, int N, int K, const float* A, int lda, const float* B, int ldb, float* C, int ldc,
             bool accumulate);
// C[M,N] = A[K,M]^T * B[K,N]
void gemm_tn(int M, int N, int K, const float* A, int lda, const float* B, int ldb, float* C, int ldc,
             bool accumulate);
// C[M,N] = A[M,K] * B[N,K]^T
void gemm_nt(int M, int N, int K, const float* A, int lda, const float* B, int ldb, float* C, int ldc,
             bool accumulate);

void gemm_nn(int M, int N, int K, const double* A, int lda, const double* B, int ldb, double* C, int ldc,
             bool accumulate);
void gemm_tn(int M, int N, int K, const double* A, int lda, const double* B, int ldb, double* C, int ldc,
             bool accumulate);
void gemm_nt(int M, int N, int K, const double* A, int lda, const double* B, int ldb, double* C, int ldc,
             bool accumulate);

/// v = decay*v + (1-decay)*g^2 ; w -= lr * g / (sqrt(v) + eps)
void rmsprop_update(float* w, const float* g, float* v, std::size_t n, float lr, float decay, float eps);
void rmsprop_update(double* w, const double* g, double* v, std::size_t n, double lr, double decay, double eps);

namespace scalar {

template <typename T>
void gemm_nn(int M, int N, int K, const T* A, int lda, const T* B, int ldb, T* C, int ldc, bool accumulate) {
    for (int i = 0; i < M; ++i) {
        T* c = C + static_cast<std::ptrdiff_t>(i) * ldc;
        if (!accumulate) {
            for (int j = 0; j < N; ++j) c[j] = T(0);
        }
        for (int k = 0; k < K; ++k) {
            const T a = A[static_cast<std::ptrdiff_t>(i) * lda + k];
            const T* b = B + static_cast<std::ptrdiff_t>(k) * ldb;
            for (int j = 0; j < N; ++j) c[j] += a * b[j];
        }
    }
}

template <typename T>
void gemm_tn(int M, int N, int K, const T* A, int lda, const T* B, int ldb, T* C, int ldc, bool accumulate) {
    if (!accumulate) {
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < N; ++j) C[static_cast<std::ptrdiff_t>(i) * ldc + j] = T(0);
    }
    for (int k = 0; k < K; ++k) {
        const T* b = B + static_cast<std::ptrdiff_t>(k) * ldb;
        for (int i = 0; i < M; ++i) {
            const T a = A[static_cast<std::ptrdiff_t>(k) * lda + i];
            T* c = C + static_cast<std::ptrdiff_t>(i) * ldc;
            for (int j = 0; j < N; ++j) c[j] += a * b[j];
        }
    }
}

template <typename T>
void gemm_nt(int M, int N, int K, const T* A, int lda, const T* B, int ldb, T* C, int ldc, bool accumulate) {
    for (int i = 0; i < M; ++i) {
        const T* a = A + static_cast<std::ptrdiff_t>(i) * lda;
        for (int j = 0; j < N; ++j) {
            const T* b = B + static_cast<std::ptrdiff_t>(j) * ldb;
            T s = T(0);
            for (int k = 0; k < K; ++k) s += a[k] * b[k];
            T& c = C[static_cast<std::ptrdiff_t>(i) * ldc + j];
            c = accumulate ? c + s : s;
        }
    }
}

template <typename T>
void rmsprop_update(T* w, const T* g, T* v, std::size_t n, T lr, T decay, T eps) {
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = decay * v[i] + (T(1) - decay) * g[i] * g[i];
        w[i] -= lr * g[i] / (std::sqrt(v[i]) + eps);
    }
}

}  // namespace scalar

#if defined(LVS_HAVE_AVX2)
namespace avx2 {
void gemm_nn(int M, int N, int K, const float* A, int lda, const float* B, int ldb, float* C, int ldc,
             bool accumulate);
void gemm_tn(int M, int N, int K, const float* A, int lda, const float* B, int ldb, float* C, int ldc,
             bool accumulate);
void gemm_nt(int M, int N, int K, const float* A, int lda, const float* B, int ldb, float* C, int ldc,
             bool accumulate);
void rmsprop_update(float* w, const float* g, float* v, std::size_t n, float lr, float decay, float eps);
}  // namespace avx2
#endif

}  // namespace lvs::simd
