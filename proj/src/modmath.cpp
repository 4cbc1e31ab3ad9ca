#include "civic/modmath.hpp"

#include <numeric>
#include <stdexcept>

namespace civic {

u64 pow_mod(u64 base, u64 exp, u64 n) {
  if (n == 1) return 0;
  u64 result = 1;
  base %= n;
  while (exp > 0) {
    if (exp & 1) result = mul_mod(result, base, n);
    base = mul_mod(base, base, n);
    exp >>= 1;
  }
  return result;
}

u64 inv_mod(u64 a, u64 n) {
  // Extended Euclid over signed 128-bit to avoid sign headaches.
  __int128 t = 0, new_t = 1;
  __int128 r = n, new_r = a % n;
  while (new_r != 0) {
    __int128 q = r / new_r;
    __int128 tmp = t - q * new_t;
    t = new_t;
    new_t = tmp;
    tmp = r - q * new_r;
    r = new_r;
    new_r = tmp;
  }
  if (r != 1) return 0;
  if (t < 0) t += n;
  return static_cast<u64>(t);
}

u64 carmichael_two_primes(u64 p, u64 q) {
  return std::lcm(p - 1, q - 1);
}

bool is_prime(u64 n) {
  if (n < 2) return false;
  for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // These witnesses are deterministic for all n < 2^64.
  for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    u64 x = pow_mod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 0; i < s - 1; ++i) {
      x = mul_mod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

u64 uniform_u64(std::mt19937_64& rng, u64 lo, u64 hi) {
  // std::uniform_int_distribution is implementation-defined; this rejection
  // scheme gives identical streams everywhere mt19937_64 does.
  if (lo > hi) throw std::invalid_argument("uniform_u64: empty range");
  u64 range = hi - lo;
  if (range == UINT64_MAX) return rng();
  ++range;
  u64 limit = UINT64_MAX - UINT64_MAX % range;
  for (;;) {
    u64 v = rng();
    if (v < limit) return lo + v % range;
  }
}

u64 random_prime(unsigned bits, std::mt19937_64& rng) {
  if (bits < 2 || bits > 63) throw std::invalid_argument("random_prime: bits out of range");
  u64 lo = u64{1} << (bits - 1);
  u64 hi = (u64{1} << bits) - 1;
  for (;;) {
    u64 candidate = uniform_u64(rng, lo, hi) | 1;
    if (is_prime(candidate)) return candidate;
  }
}

}  // namespace civic
