#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "civic/blindsig.hpp"

// Holder-side credential lifecycle and the public attribute-key directory.
// Serials and blinding factors are generated on the holder's device and
// never leave the wallet; outbound messages carry only the documented
// field sets.

namespace civic {

using AttributeId = std::string;  // exact-match label, e.g. "taxpayer:region-X"

struct UnknownAttribute : DomainError {
  UnknownAttribute() : DomainError("no key published for attribute") {}
};
struct SharedModulus : DomainError {
  SharedModulus() : DomainError("issuer already uses this modulus for another attribute") {}
};
struct BadIssuerSignature : DomainError {
  BadIssuerSignature() : DomainError("issuer signature failed verification after unblinding") {}
};
struct NoSuchCredential : DomainError {
  NoSuchCredential() : DomainError("no matching credential in wallet") {}
};
struct CredentialAlreadyUsed : DomainError {
  CredentialAlreadyUsed() : DomainError("credential was already presented") {}
};
struct NoSuchPending : DomainError {
  NoSuchPending() : DomainError("no matching pending issuance in wallet") {}
};

// What actually crosses the wire at issuance: nothing but the attribute
// label and the blinded residue.
struct IssueRequest {
  AttributeId attribute_id;
  u64 blinded_value = 0;
};

// What crosses the wire at presentation.
struct Presentation {
  AttributeId attribute_id;
  Serial serial{};
  u64 signature = 0;
};

struct PendingIssuance {
  AttributeId attribute_id;
  Serial serial{};
  BlindingFactor blinding_factor;
  u64 blinded_value = 0;
  PublicKey issuer_key;
};

struct Credential {
  AttributeId attribute_id;
  Serial serial{};
  u64 signature = 0;
  PublicKey issuer_key;
  bool used = false;
};

// Public map (issuer, attribute) -> key. Distinct attributes of one issuer
// must use distinct moduli so that key identity carries exactly one
// attestation.
class AttributeKeyDirectory {
 public:
  struct RotationEvent {
    std::string issuer;
    AttributeId attribute;
    u64 old_n = 0;
    u64 new_n = 0;
  };

  // Replaces any prior entry for the pair (logging a rotation event).
  void publish(const std::string& issuer, const AttributeId& attribute,
               const PublicKey& key);

  // No modulus-separation guard: for loading untrusted directory files,
  // whose violations the auditor's structural check must be able to see.
  void insert_unvalidated(const std::string& issuer, const AttributeId& attribute,
                          const PublicKey& key);
  const PublicKey& lookup(const std::string& issuer, const AttributeId& attribute) const;
  bool has(const std::string& issuer, const AttributeId& attribute) const;

  const std::map<std::pair<std::string, AttributeId>, PublicKey>& entries() const {
    return entries_;
  }
  const std::vector<RotationEvent>& rotations() const { return rotations_; }

 private:
  std::map<std::pair<std::string, AttributeId>, PublicKey> entries_;
  std::vector<RotationEvent> rotations_;
};

// Single-owner holder state machine.
class Wallet {
 public:
  explicit Wallet(u64 seed) : rng_(seed) {}

  // 32 fresh bytes from the wallet rng; intra-wallet uniqueness enforced.
  Serial generate_serial();

  // Hashes a fresh serial, blinds it under the issuer's attribute key, and
  // records the pending issuance. Only {attribute_id, blinded_value} leave
  // the wallet.
  IssueRequest create_issue_request(const std::string& issuer,
                                    const AttributeId& attribute,
                                    const AttributeKeyDirectory& directory);

  // Unblinds the issuer's response and verifies it before accepting.
  Credential& finalize_credential(const Serial& pending_serial, u64 blinded_sig);

  // Consumes one unused credential for the attribute; a credential can be
  // taken at most once.
  Presentation take_for_presentation(const AttributeId& attribute);
  Presentation take_for_presentation_serial(const Serial& serial);

  const std::vector<PendingIssuance>& pending() const { return pending_; }
  const std::vector<Credential>& credentials() const { return ready_; }

 private:
  std::mt19937_64 rng_;
  std::vector<PendingIssuance> pending_;
  std::vector<Credential> ready_;
  std::vector<Serial> seen_serials_;
};

}  // namespace civic
