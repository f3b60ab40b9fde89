#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fedq {

// Minimal arbitrary-precision unsigned integer; just enough for exact m^L.
class BigUint {
 public:
  BigUint() : limbs_{0} {}
  explicit BigUint(uint64_t v);

  BigUint& mul_u32(uint32_t m);

  std::string to_string() const;

  bool operator==(const BigUint& other) const { return limbs_ == other.limbs_; }

 private:
  std::vector<uint32_t> limbs_;  // little-endian base 2^32
};

// Exact m^L: the number of (mode, bit-width) assignments an attacker must try
// across L layers with m choices each.
BigUint attack_search_space(uint64_t modes, uint64_t layers);

}  // namespace fedq
