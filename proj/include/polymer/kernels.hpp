#pragma once

// Runtime-dispatched DP kernels. The forward recursion is swept along
// anti-diagonals; cells on one diagonal are independent, which is what the
// AVX2 variant vectorizes. The scalar variant is the reference; both compute
// the identical per-cell dataflow, so they agree up to vector-math rounding.

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

namespace polymer::kernels {

enum class Isa { Scalar, Avx2 };

const char* isa_name(Isa isa);
bool avx2_supported();

// Active kernel. Defaults to the best supported ISA; the POLYMER_KERNEL
// environment variable ("scalar" / "avx2" / "auto") or force_isa override it.
Isa active_isa();
void force_isa(Isa isa);
void reset_isa();  // back to auto

inline double lse(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double hi = a > b ? a : b;
    const double lo = a > b ? b : a;
    return hi + std::log1p(std::exp(lo - hi));
}

// One anti-diagonal step:
//   out[i] = lse(w1[(i-ilo)*wstride] + prev[i-1], w2[(i-ilo)*wstride] + prev[i])
// for i in [ilo, ihi]. prev/out are diagonal buffers indexed by lattice i;
// w1/w2 point at the weights of the first cell and advance by wstride.
using DiagStepFn = void (*)(const double* prev, double* out, long ilo,
                            long ihi, const double* w1, const double* w2,
                            std::ptrdiff_t wstride);

void diag_step_scalar(const double* prev, double* out, long ilo, long ihi,
                      const double* w1, const double* w2,
                      std::ptrdiff_t wstride);
#ifdef POLYMER_HAVE_AVX2
void diag_step_avx2(const double* prev, double* out, long ilo, long ihi,
                    const double* w1, const double* w2,
                    std::ptrdiff_t wstride);

// array versions of the vector math, exposed for equivalence tests
void vexp_array_avx2(const double* x, double* out, long n);
void vlog1p01_array_avx2(const double* x, double* out, long n);
#endif

DiagStepFn diag_step();

}  // namespace polymer::kernels
