#include "civic/blindsig.hpp"

#include <numeric>

#include <openssl/sha.h>

namespace civic {

BlindKeyPair keygen(u64 p, u64 q, u64 e, const std::string& attribute_id) {
  if (p == q) throw EqualPrimes();
  if (p < 3 || q < 3 || !is_prime(p) || !is_prime(q))
    throw DomainError("keygen: p and q must be odd primes");
  if (attribute_id.empty()) throw DomainError("keygen: attribute_id must be non-empty");
  u64 lambda = carmichael_two_primes(p, q);
  if (std::gcd(e, lambda) != 1) throw NonCoprimeExponent();
  BlindKeyPair key;
  key.n = p * q;
  key.e = e;
  key.d = inv_mod(e, lambda);
  key.attribute_id = attribute_id;
  return key;
}

HashedMessage full_domain_hash(const Serial& serial, const PublicKey& pub) {
  const u64 n = pub.n;
  if (n <= 6) throw ModulusTooSmall();
  std::uint8_t input[40];
  std::copy(serial.begin(), serial.end(), input);
  for (u64 counter = 0;; ++counter) {
    for (int i = 0; i < 8; ++i)
      input[32 + i] = static_cast<std::uint8_t>(counter >> (8 * (7 - i)));
    std::uint8_t digest[SHA256_DIGEST_LENGTH];
    SHA256(input, sizeof(input), digest);
    // Digest as a big-endian integer, reduced into [2, n-1].
    u64 rem = 0;
    for (std::uint8_t byte : digest)
      rem = static_cast<u64>((static_cast<u128>(rem) << 8 | byte) % (n - 2));
    u64 m = rem + 2;
    if (std::gcd(m, n) == 1) return {m, serial, n};
  }
}

BlindingFactor sample_blinding_factor(const PublicKey& pub, std::mt19937_64& rng) {
  const u64 n = pub.n;
  for (;;) {
    u64 r = uniform_u64(rng, 2, n - 1);
    if (std::gcd(r, n) == 1) return {r, inv_mod(r, n), n};
  }
}

BlindingFactor blinding_factor_from_r(u64 r, const PublicKey& pub) {
  if (r == 0 || r >= pub.n || std::gcd(r, pub.n) != 1) throw OutOfRange();
  return {r, inv_mod(r, pub.n), pub.n};
}

u64 blind(const HashedMessage& msg, const BlindingFactor& bf, const PublicKey& pub) {
  if (msg.bound_modulus != pub.n || bf.bound_modulus != pub.n) throw ModulusMismatch();
  return mul_mod(msg.m, pow_mod(bf.r, pub.e, pub.n), pub.n);
}

u64 sign_blinded(u64 blinded, const BlindKeyPair& key) {
  if (blinded == 0 || blinded >= key.n) throw OutOfRange();
  return pow_mod(blinded, key.d, key.n);
}

u64 unblind(u64 blinded_sig, const BlindingFactor& bf, const PublicKey& pub) {
  if (bf.bound_modulus != pub.n) throw ModulusMismatch();
  return mul_mod(blinded_sig, bf.r_inverse, pub.n);
}

bool verify(const HashedMessage& msg, u64 signature, const PublicKey& pub) {
  if (msg.bound_modulus != pub.n) return false;
  return pow_mod(signature, pub.e, pub.n) == msg.m;
}

}  // namespace civic
