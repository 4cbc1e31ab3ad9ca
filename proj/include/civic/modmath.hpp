#pragma once

#include <cstdint>
#include <random>

// Modular arithmetic over word-sized moduli. Moduli in this toolkit are
// deliberately small (16..64 bits) so that exhaustive auditing stays feasible;
// intermediate products use 128-bit arithmetic.

namespace civic {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

inline u64 mul_mod(u64 a, u64 b, u64 n) {
  return static_cast<u64>(static_cast<u128>(a) * b % n);
}

u64 pow_mod(u64 base, u64 exp, u64 n);

// Least positive x with a*x == 1 (mod n), or 0 if gcd(a, n) != 1.
u64 inv_mod(u64 a, u64 n);

// lcm(p-1, q-1); the exponent group order for a two-prime modulus.
u64 carmichael_two_primes(u64 p, u64 q);

// Deterministic Miller-Rabin, valid for all 64-bit inputs.
bool is_prime(u64 n);

// Uniform draw from [lo, hi], unbiased, engine-stable across platforms.
u64 uniform_u64(std::mt19937_64& rng, u64 lo, u64 hi);

// Random odd prime with exactly `bits` bits (msb set).
u64 random_prime(unsigned bits, std::mt19937_64& rng);

}  // namespace civic
