#pragma once

// Counter-based RNG (Philox4x32-10, Salmon et al. SC 2011) with 64-bit
// stream ids. Every (seed, stream) pair is an independent substream, so
// replicas and channels can be generated in any order on any number of
// threads and still reproduce bit-identically.

#include <cstdint>
#include <cmath>

namespace polymer::rng {

namespace detail {
constexpr uint32_t kPhiloxW32A = 0x9E3779B9u;
constexpr uint32_t kPhiloxW32B = 0xBB67AE85u;
constexpr uint32_t kPhiloxM4x32A = 0xD2511F53u;
constexpr uint32_t kPhiloxM4x32B = 0xCD9E8D57u;

inline void mulhilo(uint32_t a, uint32_t b, uint32_t& lo, uint32_t& hi) {
    const uint64_t p = static_cast<uint64_t>(a) * b;
    lo = static_cast<uint32_t>(p);
    hi = static_cast<uint32_t>(p >> 32);
}
}  // namespace detail

class Philox {
public:
    Philox() : Philox(0, 0) {}

    // seed -> key, stream -> upper 64 bits of the counter.
    Philox(uint64_t seed, uint64_t stream)
        : key0_(static_cast<uint32_t>(seed)),
          key1_(static_cast<uint32_t>(seed >> 32)),
          pos_(0),
          stream_lo_(static_cast<uint32_t>(stream)),
          stream_hi_(static_cast<uint32_t>(stream >> 32)),
          buf_pos_(4),
          have_normal_(false),
          cached_normal_(0.0) {}

    uint32_t next_u32() {
        if (buf_pos_ == 4) refill();
        return buf_[buf_pos_++];
    }

    uint64_t next_u64() {
        const uint64_t lo = next_u32();
        const uint64_t hi = next_u32();
        return lo | (hi << 32);
    }

    // Uniform on the open interval (0,1); never returns an endpoint.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller (one spare value cached).
    double normal() {
        if (have_normal_) {
            have_normal_ = false;
            return cached_normal_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 6.283185307179586476925286766559 * u2;
        cached_normal_ = r * std::sin(t);
        have_normal_ = true;
        return r * std::cos(t);
    }

private:
    void refill() {
        uint32_t c0 = static_cast<uint32_t>(pos_);
        uint32_t c1 = static_cast<uint32_t>(pos_ >> 32);
        uint32_t c2 = stream_lo_;
        uint32_t c3 = stream_hi_;
        uint32_t k0 = key0_, k1 = key1_;
        for (int round = 0; round < 10; ++round) {
            uint32_t lo0, hi0, lo1, hi1;
            detail::mulhilo(detail::kPhiloxM4x32A, c0, lo0, hi0);
            detail::mulhilo(detail::kPhiloxM4x32B, c2, lo1, hi1);
            const uint32_t n0 = hi1 ^ c1 ^ k0;
            const uint32_t n1 = lo1;
            const uint32_t n2 = hi0 ^ c3 ^ k1;
            const uint32_t n3 = lo0;
            c0 = n0; c1 = n1; c2 = n2; c3 = n3;
            k0 += detail::kPhiloxW32A;
            k1 += detail::kPhiloxW32B;
        }
        buf_[0] = c0; buf_[1] = c1; buf_[2] = c2; buf_[3] = c3;
        buf_pos_ = 0;
        ++pos_;
    }

    uint32_t key0_, key1_;
    uint64_t pos_;
    uint32_t stream_lo_, stream_hi_;
    uint32_t buf_[4];
    int buf_pos_;
    bool have_normal_;
    double cached_normal_;
};

}  // namespace polymer::rng
