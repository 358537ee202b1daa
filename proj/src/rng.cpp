#include "deeprotor/rng.hpp"

#include <cstdio>
#include <stdexcept>

namespace deeprotor {

std::string Rng::state_hex() const {
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%016llx%016llx%016llx%016llx",
                  static_cast<unsigned long long>(state_[0]), static_cast<unsigned long long>(state_[1]),
                  static_cast<unsigned long long>(state_[2]), static_cast<unsigned long long>(state_[3]));
    return buf;
}

Rng Rng::from_state_hex(const std::string& hex) {
    if (hex.size() != 64) throw std::runtime_error("rng state: expected 64 hex chars");
    Rng r;
    std::array<uint64_t, 4> s{};
    for (int i = 0; i < 4; ++i) s[i] = std::stoull(hex.substr(i * 16, 16), nullptr, 16);
    r.set_state(s);
    return r;
}

}  // namespace deeprotor
