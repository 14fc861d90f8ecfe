#include "polymer/kernels.hpp"

#include <cstdlib>
#include <stdexcept>

namespace polymer::kernels {

const char* isa_name(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
    }
    return "?";
}

bool avx2_supported() {
#ifdef POLYMER_HAVE_AVX2
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

Isa detect() {
    if (const char* env = std::getenv("POLYMER_KERNEL")) {
        const std::string s(env);
        if (s == "scalar") return Isa::Scalar;
        if (s == "avx2") {
            if (!avx2_supported())
                throw std::runtime_error("POLYMER_KERNEL=avx2 unsupported here");
            return Isa::Avx2;
        }
        // anything else, including "auto", falls through
    }
    return avx2_supported() ? Isa::Avx2 : Isa::Scalar;
}

Isa& current() {
    static Isa isa = detect();
    return isa;
}

}  // namespace

Isa active_isa() { return current(); }

void force_isa(Isa isa) {
    if (isa == Isa::Avx2 && !avx2_supported())
        throw std::runtime_error("force_isa: AVX2 not supported on this host");
    current() = isa;
}

void reset_isa() { current() = detect(); }

void diag_step_scalar(const double* prev, double* out, long ilo, long ihi,
                      const double* w1, const double* w2,
                      std::ptrdiff_t wstride) {
    std::ptrdiff_t off = 0;
    for (long i = ilo; i <= ihi; ++i, off += wstride)
        out[i] = lse(w1[off] + prev[i - 1], w2[off] + prev[i]);
}

DiagStepFn diag_step() {
#ifdef POLYMER_HAVE_AVX2
    if (active_isa() == Isa::Avx2) return &diag_step_avx2;
#endif
    return &diag_step_scalar;
}

}  // namespace polymer::kernels
