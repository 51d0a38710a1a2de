#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "bfree/errors.hpp"

namespace bfree {

// All primes p <= limit, odd-only byte sieve.
inline std::vector<std::uint64_t> primes_up_to(std::uint64_t limit) {
  std::vector<std::uint64_t> out;
  if (limit < 2) return out;
  out.push_back(2);
  if (limit < 3) return out;
  const std::uint64_t half = (limit - 1) / 2;  // index i <-> 2i+1, i >= 1
  std::vector<std::uint8_t> composite(half + 1, 0);
  for (std::uint64_t i = 1; i <= half; ++i) {
    if (composite[i]) continue;
    std::uint64_t p = 2 * i + 1;
    out.push_back(p);
    std::uint64_t start = p * p;
    if (start > limit) continue;
    for (std::uint64_t j = start / 2; j <= half; j += p) composite[j] = 1;
  }
  return out;
}

// The first `count` primes.
inline std::vector<std::uint64_t> first_primes(std::size_t count) {
  if (count == 0) return {};
  if (count > 200'000'000) throw ResourceError("prime count too large");
  double n = static_cast<double>(count);
  // Rosser-Schoenfeld: p_n < n (ln n + ln ln n) for n >= 6.
  double bound = count < 6 ? 15.0 : n * (std::log(n) + std::log(std::log(n))) + 3.0;
  auto primes = primes_up_to(static_cast<std::uint64_t>(bound));
  if (primes.size() < count) throw CrossCheckError("prime bound estimate too small");
  primes.resize(count);
  return primes;
}

// Odd primes 3, 5, 7, ... (the first `count` of them).
inline std::vector<std::uint64_t> first_odd_primes(std::size_t count) {
  auto p = first_primes(count + 1);
  return {p.begin() + 1, p.end()};
}

inline bool is_prime_u64(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

}  // namespace bfree
