// AVX2/FMA variants. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after a runtime CPU check.

#include <immintrin.h>

#include "lvs/simd/kernels.hpp"

namespace lvs::simd::avx2 {

namespace {

inline __m256i tail_mask(int w) {
    alignas(32) static const int mask[16] = {-1, -1, -1, -1, -1, -1, -1, -1, 0, 0, 0, 0, 0, 0, 0, 0};
    return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(mask + 8 - w));
}

inline float hsum(__m256 v) {
    __m128 lo = _mm256_castps256_ps128(v);
    const __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    __m128 sh = _mm_movehdup_ps(lo);
    __m128 s = _mm_add_ps(lo, sh);
    sh = _mm_movehl_ps(sh, s);
    s = _mm_add_ss(s, sh);
    return _mm_cvtss_f32(s);
}

// R rows of C; element (r, k) of A lives at A[r*rs + k*cs], so one kernel covers NN and TN.
template <int R>
void rows_kernel(int N, int K, const float* A, std::ptrdiff_t rs, std::ptrdiff_t cs, const float* B,
                 std::ptrdiff_t ldb, float* C, std::ptrdiff_t ldc, bool accumulate) {
    int j = 0;
    for (; j + 16 <= N; j += 16) {
        __m256 c0[R], c1[R];
        for (int r = 0; r < R; ++r) {
            c0[r] = accumulate ? _mm256_loadu_ps(C + r * ldc + j) : _mm256_setzero_ps();
            c1[r] = accumulate ? _mm256_loadu_ps(C + r * ldc + j + 8) : _mm256_setzero_ps();
        }
        for (int k = 0; k < K; ++k) {
            const float* b = B + k * ldb + j;
            const __m256 b0 = _mm256_loadu_ps(b);
            const __m256 b1 = _mm256_loadu_ps(b + 8);
            for (int r = 0; r < R; ++r) {
                const __m256 a = _mm256_broadcast_ss(A + r * rs + k * cs);
                c0[r] = _mm256_fmadd_ps(a, b0, c0[r]);
                c1[r] = _mm256_fmadd_ps(a, b1, c1[r]);
            }
        }
        for (int r = 0; r < R; ++r) {
            _mm256_storeu_ps(C + r * ldc + j, c0[r]);
            _mm256_storeu_ps(C + r * ldc + j + 8, c1[r]);
        }
    }
    for (; j < N; j += 8) {
        const int w = N - j < 8 ? N - j : 8;
        const __m256i m = tail_mask(w);
        __m256 c[R];
        for (int r = 0; r < R; ++r) {
            c[r] = accumulate ? _mm256_maskload_ps(C + r * ldc + j, m) : _mm256_setzero_ps();
        }
        for (int k = 0; k < K; ++k) {
            const __m256 b = _mm256_maskload_ps(B + k * ldb + j, m);
            for (int r = 0; r < R; ++r) {
                c[r] = _mm256_fmadd_ps(_mm256_broadcast_ss(A + r * rs + k * cs), b, c[r]);
            }
        }
        for (int r = 0; r < R; ++r) {
            _mm256_maskstore_ps(C + r * ldc + j, m, c[r]);
        }
    }
}

constexpr int kColBlock = 256;

void gemm_strided(int M, int N, int K, const float* A, std::ptrdiff_t rs, std::ptrdiff_t cs, const float* B,
                  int ldb, float* C, int ldc, bool accumulate) {
    for (int j0 = 0; j0 < N; j0 += kColBlock) {
        const int nb = N - j0 < kColBlock ? N - j0 : kColBlock;
        const float* Bj = B + j0;
        float* Cj = C + j0;
        int i = 0;
        for (; i + 6 <= M; i += 6) {
            rows_kernel<6>(nb, K, A + i * rs, rs, cs, Bj, ldb, Cj + static_cast<std::ptrdiff_t>(i) * ldc, ldc,
                           accumulate);
        }
        for (; i + 4 <= M; i += 4) {
            rows_kernel<4>(nb, K, A + i * rs, rs, cs, Bj, ldb, Cj + static_cast<std::ptrdiff_t>(i) * ldc, ldc,
                           accumulate);
        }
        for (; i < M; ++i) {
            rows_kernel<1>(nb, K, A + i * rs, rs, cs, Bj, ldb, Cj + static_cast<std::ptrdiff_t>(i) * ldc, ldc,
                           accumulate);
        }
    }
}

}  // namespace

void gemm_nn(int M, int N, int K, const float* A, int lda, const float* B, int ldb, float* C, int ldc,
             bool accumulate) {
    gemm_strided(M, N, K, A, lda, 1, B, ldb, C, ldc, accumulate);
}

void gemm_tn(int M, int N, int K, const float* A, int lda, const float* B, int ldb, float* C, int ldc,
             bool accumulate) {
    gemm_strided(M, N, K, A, 1, lda, B, ldb, C, ldc, accumulate);
}

void gemm_nt(int M, int N, int K, const float* A, int lda, const float* B, int ldb, float* C, int ldc,
             bool accumulate) {
    constexpr int kDepthBlock = 512;
    if (!accumulate) {
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < N; ++j) C[static_cast<std::ptrdiff_t>(i) * ldc + j] = 0.0f;
    }
    for (int k0 = 0; k0 < K; k0 += kDepthBlock) {
        const int kb = K - k0 < kDepthBlock ? K - k0 : kDepthBlock;
        const int kb8 = kb / 8 * 8;
        for (int i = 0; i < M; i += 2) {
            const int ni = M - i < 2 ? 1 : 2;
            const float* a0 = A + static_cast<std::ptrdiff_t>(i) * lda + k0;
            const float* a1 = ni == 2 ? a0 + lda : a0;
            for (int j = 0; j < N; j += 4) {
                const int nj = N - j < 4 ? N - j : 4;
                const float* b[4];
                for (int q = 0; q < 4; ++q) b[q] = B + static_cast<std::ptrdiff_t>(j + (q < nj ? q : 0)) * ldb + k0;
                __m256 s0[4] = {_mm256_setzero_ps(), _mm256_setzero_ps(), _mm256_setzero_ps(), _mm256_setzero_ps()};
                __m256 s1[4] = {_mm256_setzero_ps(), _mm256_setzero_ps(), _mm256_setzero_ps(), _mm256_setzero_ps()};
                for (int k = 0; k < kb8; k += 8) {
                    const __m256 x0 = _mm256_loadu_ps(a0 + k);
                    const __m256 x1 = _mm256_loadu_ps(a1 + k);
                    for (int q = 0; q < 4; ++q) {
                        const __m256 y = _mm256_loadu_ps(b[q] + k);
                        s0[q] = _mm256_fmadd_ps(x0, y, s0[q]);
                        s1[q] = _mm256_fmadd_ps(x1, y, s1[q]);
                    }
                }
                for (int q = 0; q < nj; ++q) {
                    float r0 = hsum(s0[q]), r1 = hsum(s1[q]);
                    for (int k = kb8; k < kb; ++k) {
                        r0 += a0[k] * b[q][k];
                        r1 += a1[k] * b[q][k];
                    }
                    C[static_cast<std::ptrdiff_t>(i) * ldc + j + q] += r0;
                    if (ni == 2) C[static_cast<std::ptrdiff_t>(i + 1) * ldc + j + q] += r1;
                }
            }
        }
    }
}

void rmsprop_update(float* w, const float* g, float* v, std::size_t n, float lr, float decay, float eps) {
    const __m256 vdecay = _mm256_set1_ps(decay);
    const __m256 vkeep = _mm256_set1_ps(1.0f - decay);
    const __m256 vlr = _mm256_set1_ps(lr);
    const __m256 veps = _mm256_set1_ps(eps);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 gi = _mm256_loadu_ps(g + i);
        const __m256 vi = _mm256_add_ps(_mm256_mul_ps(vdecay, _mm256_loadu_ps(v + i)),
                                        _mm256_mul_ps(vkeep, _mm256_mul_ps(gi, gi)));
        _mm256_storeu_ps(v + i, vi);
        const __m256 step = _mm256_div_ps(_mm256_mul_ps(vlr, gi), _mm256_add_ps(_mm256_sqrt_ps(vi), veps));
        _mm256_storeu_ps(w + i, _mm256_sub_ps(_mm256_loadu_ps(w + i), step));
    }
    scalar::rmsprop_update(w + i, g + i, v + i, n - i, lr, decay, eps);
}

}  // namespace lvs::simd::avx2
