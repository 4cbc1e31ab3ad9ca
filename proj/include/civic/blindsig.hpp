#pragma once

#include <array>
#include <random>
#include <stdexcept>
#include <string>

#include "civic/modmath.hpp"

// RSA blind signatures at demonstration scale.
//
// This is a reference/educational artifact: moduli are configurable down to
// 16 bits so that unlinkability can be audited by exhaustive search. It is
// not production cryptography (no padding scheme, no side-channel hardening,
// no large keys).

namespace civic {

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EqualPrimes : DomainError {
  EqualPrimes() : DomainError("keygen: primes must be distinct") {}
};
struct NonCoprimeExponent : DomainError {
  NonCoprimeExponent() : DomainError("keygen: e not coprime with lambda(n)") {}
};
struct ModulusTooSmall : DomainError {
  ModulusTooSmall() : DomainError("full_domain_hash: modulus must exceed 6") {}
};
struct ModulusMismatch : DomainError {
  ModulusMismatch() : DomainError("operands bound to different moduli") {}
};
struct OutOfRange : DomainError {
  OutOfRange() : DomainError("value outside [1, n-1]") {}
};

// Holder-generated 32-byte credential serial.
using Serial = std::array<std::uint8_t, 32>;

struct PublicKey {
  u64 n = 0;
  u64 e = 0;
  std::string attribute_id;

  bool operator==(const PublicKey&) const = default;
};

// One signing key per attribute; the key identity *is* the attestation.
struct BlindKeyPair {
  u64 n = 0;
  u64 e = 0;
  u64 d = 0;
  std::string attribute_id;

  PublicKey public_key() const { return {n, e, attribute_id}; }
};

// Holder-side unit residue r with cached inverse, bound to one modulus.
struct BlindingFactor {
  u64 r = 0;
  u64 r_inverse = 0;
  u64 bound_modulus = 0;
};

// A serial mapped into the signable domain: m in [2, n-1], gcd(m, n) = 1.
struct HashedMessage {
  u64 m = 0;
  Serial source_serial{};
  u64 bound_modulus = 0;
};

// p, q odd primes, p != q, gcd(e, lcm(p-1, q-1)) = 1.
// d is the least positive inverse of e mod lambda(n).
BlindKeyPair keygen(u64 p, u64 q, u64 e, const std::string& attribute_id);

// Counter-iterated SHA-256: hash(serial || counter_be8), digest taken as a
// big-endian integer reduced into [2, n-1], counter bumped until the result
// is coprime with n. Deterministic in (serial, n).
HashedMessage full_domain_hash(const Serial& serial, const PublicKey& pub);

// Rejection-samples a unit uniformly from [2, n-1].
BlindingFactor sample_blinding_factor(const PublicKey& pub, std::mt19937_64& rng);

// Explicit unit, for tests and brute-force audits. Throws OutOfRange if
// gcd(r, n) != 1.
BlindingFactor blinding_factor_from_r(u64 r, const PublicKey& pub);

// b = m * r^e mod n
u64 blind(const HashedMessage& msg, const BlindingFactor& bf, const PublicKey& pub);

// s' = b^d mod n
u64 sign_blinded(u64 blinded, const BlindKeyPair& key);

// s = s' * r^-1 mod n
u64 unblind(u64 blinded_sig, const BlindingFactor& bf, const PublicKey& pub);

// s^e == m (mod n), public data only. Mismatched modulus is just "false".
bool verify(const HashedMessage& msg, u64 signature, const PublicKey& pub);

}  // namespace civic
