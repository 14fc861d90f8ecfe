#pragma once

// AVX2 vector math used by the DP kernels. Only include from translation
// units compiled with -mavx2 -mfma.

#include <immintrin.h>

namespace polymer::simd {

// exp(x) for x <= 0, flushing to 0 below the normal range. Cephes-style
// rational approximation after Cody-Waite range reduction; ~1 ulp.
inline __m256d vexp_pd(__m256d x) {
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
    const __m256d c1 = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d c2 = _mm256_set1_pd(1.42860682030941723212e-6);

    const __m256d p0 = _mm256_set1_pd(1.26177193074810590878e-4);
    const __m256d p1 = _mm256_set1_pd(3.02994407707441961300e-2);
    const __m256d p2 = _mm256_set1_pd(9.99999999999999999910e-1);
    const __m256d q0 = _mm256_set1_pd(3.00198505138664455042e-6);
    const __m256d q1 = _mm256_set1_pd(2.52448340349684104192e-3);
    const __m256d q2 = _mm256_set1_pd(2.27265548208155028766e-1);
    const __m256d q3 = _mm256_set1_pd(2.00000000000000000005e0);

    const __m256d n =
        _mm256_round_pd(_mm256_mul_pd(x, log2e),
                        _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, c1, x);
    r = _mm256_fnmadd_pd(n, c2, r);
    const __m256d rr = _mm256_mul_pd(r, r);

    __m256d px = _mm256_fmadd_pd(p0, rr, p1);
    px = _mm256_fmadd_pd(px, rr, p2);
    px = _mm256_mul_pd(px, r);
    __m256d qx = _mm256_fmadd_pd(q0, rr, q1);
    qx = _mm256_fmadd_pd(qx, rr, q2);
    qx = _mm256_fmadd_pd(qx, rr, q3);

    const __m256d e = _mm256_add_pd(
        _mm256_set1_pd(1.0),
        _mm256_div_pd(_mm256_add_pd(px, px), _mm256_sub_pd(qx, px)));

    // scale by 2^n via exponent bits (n is in the normal range after the
    // underflow clamp below)
    const __m128i n32 = _mm256_cvtpd_epi32(n);
    const __m256i n64 = _mm256_cvtepi32_epi64(n32);
    const __m256i pow2 = _mm256_slli_epi64(
        _mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
    __m256d res = _mm256_mul_pd(e, _mm256_castsi256_pd(pow2));

    const __m256d underflow = _mm256_cmp_pd(
        x, _mm256_set1_pd(-708.396418532264), _CMP_LT_OQ);
    return _mm256_andnot_pd(underflow, res);
}

// log1p(y) for y in [0,1]: 2*atanh(y/(2+y)) with an odd series in
// s = y/(2+y) (|s| <= 1/3). The argument of atanh is formed without
// computing 1+y, so there is no cancellation near 0.
inline __m256d vlog1p01_pd(__m256d y) {
    const __m256d s =
        _mm256_div_pd(y, _mm256_add_pd(y, _mm256_set1_pd(2.0)));
    const __m256d z = _mm256_mul_pd(s, s);
    __m256d p = _mm256_set1_pd(1.0 / 33.0);
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 31.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 29.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 27.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 25.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 23.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 21.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 19.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 17.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 15.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 13.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 11.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 9.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 7.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 5.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 3.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0));
    return _mm256_mul_pd(_mm256_add_pd(s, s), p);
}

// lse(a,b) = max + log1p(exp(min - max)); finite inputs only.
inline __m256d vlse_pd(__m256d a, __m256d b) {
    const __m256d hi = _mm256_max_pd(a, b);
    const __m256d lo = _mm256_min_pd(a, b);
    const __m256d t = vexp_pd(_mm256_sub_pd(lo, hi));
    return _mm256_add_pd(hi, vlog1p01_pd(t));
}

}  // namespace polymer::simd
