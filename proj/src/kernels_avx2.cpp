// AVX2+FMA DP kernel. This file is compiled with -mavx2 -mfma; callers reach
// it only through the runtime dispatch in kernels.cpp.

#include "polymer/kernels.hpp"

#ifdef POLYMER_HAVE_AVX2

#include "polymer/simd_math.hpp"

namespace polymer::kernels {

void diag_step_avx2(const double* prev, double* out, long ilo, long ihi,
                    const double* w1, const double* w2,
                    std::ptrdiff_t wstride) {
    long i = ilo;
    const long count = ihi - ilo + 1;
    if (count >= 4) {
        const long long ws = static_cast<long long>(wstride);
        __m256i vidx = _mm256_set_epi64x(3 * ws, 2 * ws, ws, 0);
        const __m256i vstep = _mm256_set1_epi64x(4 * ws);
        for (; i + 3 <= ihi; i += 4) {
            const __m256d w1v = _mm256_i64gather_pd(w1, vidx, 8);
            const __m256d w2v = _mm256_i64gather_pd(w2, vidx, 8);
            const __m256d pm1 = _mm256_loadu_pd(prev + i - 1);
            const __m256d p0 = _mm256_loadu_pd(prev + i);
            const __m256d x = _mm256_add_pd(w1v, pm1);
            const __m256d y = _mm256_add_pd(w2v, p0);
            _mm256_storeu_pd(out + i, simd::vlse_pd(x, y));
            vidx = _mm256_add_epi64(vidx, vstep);
        }
    }
    std::ptrdiff_t off = (i - ilo) * wstride;
    for (; i <= ihi; ++i, off += wstride)
        out[i] = lse(w1[off] + prev[i - 1], w2[off] + prev[i]);
}

void vexp_array_avx2(const double* x, double* out, long n) {
    long i = 0;
    for (; i + 3 < n; i += 4)
        _mm256_storeu_pd(out + i, simd::vexp_pd(_mm256_loadu_pd(x + i)));
    for (; i < n; ++i) {
        double buf[4] = {x[i], x[i], x[i], x[i]};
        double res[4];
        _mm256_storeu_pd(res, simd::vexp_pd(_mm256_loadu_pd(buf)));
        out[i] = res[0];
    }
}

void vlog1p01_array_avx2(const double* x, double* out, long n) {
    long i = 0;
    for (; i + 3 < n; i += 4)
        _mm256_storeu_pd(out + i, simd::vlog1p01_pd(_mm256_loadu_pd(x + i)));
    for (; i < n; ++i) {
        double buf[4] = {x[i], x[i], x[i], x[i]};
        double res[4];
        _mm256_storeu_pd(res, simd::vlog1p01_pd(_mm256_loadu_pd(buf)));
        out[i] = res[0];
    }
}

}  // namespace polymer::kernels

#endif  // POLYMER_HAVE_AVX2
