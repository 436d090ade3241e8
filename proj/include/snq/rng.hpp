#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace snq {

// Philox4x32-10 counter-based generator (Salmon, Moraes, Dror, Shaw; SC'11).
// A stream is addressed by (master seed, replication index, role): the master
// seed becomes the cipher key and (replication, role) select a disjoint
// counter block, so distinct triples can never produce overlapping output.
enum class StreamRole : uint32_t {
  Shots = 1,
  Thinning = 2,
  Services = 3,
  Routing = 4,
  LimitSde = 5,
  Inversion = 6,
  Scratch = 7,
};

// Derives a distinct role id for per-source or per-tandem substreams.
constexpr uint32_t role_id(StreamRole base, uint32_t k = 0) {
  return static_cast<uint32_t>(base) | (k << 8);
}

class RngStream {
 public:
  RngStream(uint64_t master, uint64_t replication, uint32_t role)
      : key_{static_cast<uint32_t>(master), static_cast<uint32_t>(master >> 32)} {
    if (replication >> 48) throw std::invalid_argument("RngStream: replication index exceeds 2^48");
    if (role >> 16) throw std::invalid_argument("RngStream: role id exceeds 2^16");
    rep_lo_ = static_cast<uint32_t>(replication);
    rep_hi_role_ = static_cast<uint32_t>((replication >> 32) | (static_cast<uint64_t>(role) << 16));
  }

  RngStream(uint64_t master, uint64_t replication, StreamRole role)
      : RngStream(master, replication, role_id(role)) {}

  uint64_t next_u64() {
    if (spare_valid_) {
      spare_valid_ = false;
      return spare_;
    }
    auto block = philox(counter_++, rep_lo_, rep_hi_role_, key_);
    spare_ = (static_cast<uint64_t>(block[3]) << 32) | block[2];
    spare_valid_ = true;
    return (static_cast<uint64_t>(block[1]) << 32) | block[0];
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Inversion; strictly positive rate.
  double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; the sine mate is cached.
  double normal() {
    if (normal_valid_) {
      normal_valid_ = false;
      return normal_spare_;
    }
    double u1 = 1.0 - uniform01();  // (0, 1]
    double u2 = uniform01();
    double m = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    normal_spare_ = m * std::sin(a);
    normal_valid_ = true;
    return m * std::cos(a);
  }

  // Marsaglia-Tsang for shape >= 1; boosted by U^{1/shape} below 1.
  double gamma(double shape, double rate) {
    if (shape < 1.0) {
      double u = 1.0 - uniform01();
      return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      double u = 1.0 - uniform01();  // (0, 1], log-safe
      double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v / rate;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
  }

  // UniformRandomBitGenerator interface.
  using result_type = uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next_u64(); }

 private:
  static std::array<uint32_t, 4> philox(uint64_t ctr, uint32_t c2, uint32_t c3,
                                        std::array<uint32_t, 2> key) {
    std::array<uint32_t, 4> c{static_cast<uint32_t>(ctr), static_cast<uint32_t>(ctr >> 32), c2, c3};
    for (int round = 0; round < 10; ++round) {
      uint64_t p0 = 0xD2511F53ull * c[0];
      uint64_t p1 = 0xCD9E8D57ull * c[2];
      c = {static_cast<uint32_t>(p1 >> 32) ^ c[1] ^ key[0], static_cast<uint32_t>(p1),
           static_cast<uint32_t>(p0 >> 32) ^ c[3] ^ key[1], static_cast<uint32_t>(p0)};
      key[0] += 0x9E3779B9u;
      key[1] += 0xBB67AE85u;
    }
    return c;
  }

  std::array<uint32_t, 2> key_;
  uint32_t rep_lo_;
  uint32_t rep_hi_role_;
  uint64_t counter_ = 0;
  uint64_t spare_ = 0;
  bool spare_valid_ = false;
  double normal_spare_ = 0.0;
  bool normal_valid_ = false;
};

inline RngStream seed_split(uint64_t master, uint64_t replication, StreamRole role) {
  return RngStream(master, replication, role);
}
inline RngStream seed_split(uint64_t master, uint64_t replication, uint32_t role) {
  return RngStream(master, replication, role);
}

}  // namespace snq
