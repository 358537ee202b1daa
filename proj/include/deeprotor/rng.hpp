#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

namespace deeprotor {

// xoshiro256++ with splitmix64 seeding.  Hand-rolled instead of <random>
// because checkpoints must serialize the generator state bit-exactly and the
// standard distributions have unspecified internal state.
class Rng {
  public:
    Rng() : Rng(0) {}

    explicit Rng(uint64_t seed) {
        uint64_t z = seed;
        for (auto& w : state_) {
            z += 0x9e3779b97f4a7c15ULL;
            uint64_t x = z;
            x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
            x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
            w = x ^ (x >> 31);
        }
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n).  Bias from the double path is < 2^-43,
    // far below anything the chi-square tests can see.
    int next_int(int n) {
        int v = static_cast<int>(next_double() * n);
        return v < n ? v : n - 1;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Box-Muller without the cached spare, so the generator state is the
    // only state there is.
    double normal(double mean, double sigma) {
        const double u1 = 1.0 - next_double();
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sigma * r * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    bool bernoulli(double p) { return next_double() < p; }

    // Derive an independent child stream.
    Rng split(uint64_t stream) const {
        uint64_t h = state_[0] ^ (state_[3] * 0x2545f4914f6cdd1dULL) ^ (stream * 0x9e3779b97f4a7c15ULL);
        return Rng(h);
    }

    std::array<uint64_t, 4> state() const { return state_; }
    void set_state(const std::array<uint64_t, 4>& s) { state_ = s; }

    std::string state_hex() const;
    static Rng from_state_hex(const std::string& hex);

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<uint64_t, 4> state_{};
};

// Deterministic stream derivation from the master seed.
inline Rng derive_rng(uint64_t master_seed, uint64_t stream) {
    return Rng(master_seed ^ (0x6a09e667f3bcc909ULL * (stream + 1)));
}

}  // namespace deeprotor
