#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <set>

#include "civic/blindsig.hpp"

using namespace civic;

namespace {

// Independent oracles: naive schoolbook arithmetic, no shared code with the
// library path under test.
u64 naive_pow_mod(u64 base, u64 exp, u64 n) {
  u64 r = 1 % n;
  for (u64 i = 0; i < exp; ++i) r = r * (base % n) % n;  // fine for toy moduli
  return r;
}

u64 naive_inverse(u64 a, u64 n) {
  for (u64 x = 1; x < n; ++x)
    if (a * x % n == 1) return x;
  return 0;
}

const PublicKey kToyPub{55, 3, "taxpayer:region-X"};
const BlindKeyPair kToyKey{55, 3, 7, "taxpayer:region-X"};

std::vector<u64> units_mod(u64 n) {
  std::vector<u64> units;
  for (u64 x = 1; x < n; ++x)
    if (std::gcd(x, n) == 1) units.push_back(x);
  return units;
}

HashedMessage forced_message(u64 m, u64 n) {
  return {m, Serial{}, n};
}

}  // namespace

TEST_CASE("keygen on the toy parameters") {
  BlindKeyPair key = keygen(5, 11, 3, "tax-region-X");
  CHECK(key.n == 55);
  CHECK(key.e == 3);
  CHECK(key.d == naive_inverse(3, 20));  // lambda(55) = lcm(4, 10) = 20
  CHECK(key.d == 7);
  CHECK(key.attribute_id == "tax-region-X");
}

TEST_CASE("keygen rejects non-coprime exponent") {
  CHECK_THROWS_AS(keygen(5, 11, 5, "x"), NonCoprimeExponent);  // gcd(5, 20) = 5
}

TEST_CASE("keygen rejects equal primes") {
  CHECK_THROWS_AS(keygen(5, 5, 3, "x"), EqualPrimes);
}

TEST_CASE("keygen rejects composites and empty attributes") {
  CHECK_THROWS_AS(keygen(9, 11, 3, "x"), DomainError);
  CHECK_THROWS_AS(keygen(5, 11, 3, ""), DomainError);
}

TEST_CASE("full domain hash pinned vectors") {
  // Pinned from a reference SHA-256 oracle over serial || counter_be8,
  // digest reduced into [2, n-1].
  Serial zeros{};
  HashedMessage m = full_domain_hash(zeros, kToyPub);
  CHECK(m.m == 24);
  CHECK(m.bound_modulus == 55);
  CHECK(std::gcd(m.m, u64{55}) == 1);

  PublicKey pub3233{3233, 17, "x"};
  CHECK(full_domain_hash(zeros, pub3233).m == 505);

  // This serial needs one counter bump before hitting a unit mod 55.
  Serial ramp{};
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<std::uint8_t>(i);
  CHECK(full_domain_hash(ramp, kToyPub).m == 36);
}

TEST_CASE("full domain hash is deterministic and range-bound") {
  Serial s{};
  s[0] = 0xab;
  HashedMessage a = full_domain_hash(s, kToyPub);
  HashedMessage b = full_domain_hash(s, kToyPub);
  CHECK(a.m == b.m);
  CHECK(a.m >= 2);
  CHECK(a.m < 55);
}

TEST_CASE("full domain hash rejects tiny moduli") {
  CHECK_THROWS_AS(full_domain_hash(Serial{}, PublicKey{4, 3, "x"}), ModulusTooSmall);
  CHECK_THROWS_AS(full_domain_hash(Serial{}, PublicKey{6, 3, "x"}), ModulusTooSmall);
  CHECK_NOTHROW(full_domain_hash(Serial{}, PublicKey{7, 3, "x"}));
}

TEST_CASE("blinding factor sampling") {
  std::mt19937_64 rng(42);
  BlindingFactor bf = sample_blinding_factor(kToyPub, rng);
  CHECK(std::gcd(bf.r, u64{55}) == 1);
  CHECK(bf.r * bf.r_inverse % 55 == 1);
  CHECK(bf.bound_modulus == 55);

  std::mt19937_64 rng2(42);
  CHECK(sample_blinding_factor(kToyPub, rng2).r == bf.r);
}

TEST_CASE("blinding factor inverse matches brute force") {
  BlindingFactor bf = blinding_factor_from_r(2, kToyPub);
  CHECK(bf.r_inverse == naive_inverse(2, 55));
  CHECK(bf.r_inverse == 28);
}

TEST_CASE("every residue of a prime modulus is sampleable") {
  PublicKey prime_pub{53, 3, "x"};
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    BlindingFactor bf = sample_blinding_factor(prime_pub, rng);
    CHECK(bf.r >= 2);
    CHECK(bf.r < 53);
  }
}

TEST_CASE("blind matches the modular oracle") {
  BlindingFactor r2 = blinding_factor_from_r(2, kToyPub);
  CHECK(blind(forced_message(8, 55), r2, kToyPub) == 8 * naive_pow_mod(2, 3, 55) % 55);
  CHECK(blind(forced_message(8, 55), r2, kToyPub) == 9);
  CHECK(blind(forced_message(1, 55), r2, kToyPub) == 8);

  BlindingFactor r1 = blinding_factor_from_r(1, kToyPub);
  CHECK(blind(forced_message(8, 55), r1, kToyPub) == 8);  // identity blinding
}

TEST_CASE("blind rejects mismatched moduli") {
  BlindingFactor r2 = blinding_factor_from_r(2, kToyPub);
  CHECK_THROWS_AS(blind(forced_message(8, 35), r2, kToyPub), ModulusMismatch);
}

TEST_CASE("sign_blinded matches the exponentiation oracle") {
  CHECK(sign_blinded(9, kToyKey) == naive_pow_mod(9, 7, 55));
  CHECK(sign_blinded(9, kToyKey) == 4);
  CHECK(sign_blinded(8, kToyKey) == 2);
  CHECK(sign_blinded(1, kToyKey) == 1);
  CHECK_THROWS_AS(sign_blinded(0, kToyKey), OutOfRange);
  CHECK_THROWS_AS(sign_blinded(55, kToyKey), OutOfRange);
}

TEST_CASE("unblind matches the oracle") {
  BlindingFactor r2 = blinding_factor_from_r(2, kToyPub);
  CHECK(unblind(4, r2, kToyPub) == 4 * 28 % 55);
  CHECK(unblind(4, r2, kToyPub) == 2);
  BlindingFactor r1 = blinding_factor_from_r(1, kToyPub);
  CHECK(unblind(17, r1, kToyPub) == 17);
}

TEST_CASE("verify") {
  CHECK(verify(forced_message(8, 55), 2, kToyPub));       // 2^3 = 8
  CHECK(verify(forced_message(1, 55), 1, kToyPub));
  CHECK_FALSE(verify(forced_message(8, 55), 3, kToyPub)); // 3^3 mod 55 = 27
  CHECK_FALSE(verify(forced_message(8, 35), 2, kToyPub)); // modulus mismatch is just false
}

TEST_CASE("round trip over all unit pairs of the toy key") {
  int ok = 0;
  for (u64 m : units_mod(55)) {
    for (u64 r : units_mod(55)) {
      BlindingFactor bf = blinding_factor_from_r(r, kToyPub);
      u64 b = blind(forced_message(m, 55), bf, kToyPub);
      u64 s = unblind(sign_blinded(b, kToyKey), bf, kToyPub);
      if (verify(forced_message(m, 55), s, kToyPub)) ++ok;
    }
  }
  CHECK(ok == 40 * 40);
}

TEST_CASE("blinding is injective in r for fixed m") {
  for (u64 m : {u64{8}, u64{13}}) {
    std::set<u64> images;
    for (u64 r : units_mod(55))
      images.insert(blind(forced_message(m, 55), blinding_factor_from_r(r, kToyPub), kToyPub));
    CHECK(images.size() == 40);
  }
}

TEST_CASE("perfect blindness: each (m, b) unit pair has exactly one witness") {
  std::vector<u64> units = units_mod(55);
  for (u64 m : units) {
    for (u64 b : units) {
      int witnesses = 0;
      for (u64 r : units)
        if (blind(forced_message(m, 55), blinding_factor_from_r(r, kToyPub), kToyPub) == b)
          ++witnesses;
      CHECK(witnesses == 1);
    }
  }
}
