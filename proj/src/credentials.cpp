#include "civic/credentials.hpp"

#include <algorithm>

namespace civic {

void AttributeKeyDirectory::publish(const std::string& issuer, const AttributeId& attribute,
                                    const PublicKey& key) {
  for (const auto& [pair, existing] : entries_) {
    if (pair.first == issuer && pair.second != attribute && existing.n == key.n)
      throw SharedModulus();
  }
  auto it = entries_.find({issuer, attribute});
  if (it != entries_.end()) {
    rotations_.push_back({issuer, attribute, it->second.n, key.n});
    it->second = key;
  } else {
    entries_.emplace(std::make_pair(issuer, attribute), key);
  }
}

void AttributeKeyDirectory::insert_unvalidated(const std::string& issuer,
                                               const AttributeId& attribute,
                                               const PublicKey& key) {
  entries_[{issuer, attribute}] = key;
}

const PublicKey& AttributeKeyDirectory::lookup(const std::string& issuer,
                                               const AttributeId& attribute) const {
  auto it = entries_.find({issuer, attribute});
  if (it == entries_.end()) throw UnknownAttribute();
  return it->second;
}

bool AttributeKeyDirectory::has(const std::string& issuer, const AttributeId& attribute) const {
  return entries_.count({issuer, attribute}) != 0;
}

Serial Wallet::generate_serial() {
  for (;;) {
    Serial s;
    for (std::size_t i = 0; i < s.size(); i += 8) {
      u64 word = rng_();
      for (int b = 0; b < 8; ++b)
        s[i + b] = static_cast<std::uint8_t>(word >> (8 * (7 - b)));
    }
    if (std::find(seen_serials_.begin(), seen_serials_.end(), s) == seen_serials_.end()) {
      seen_serials_.push_back(s);
      return s;
    }
  }
}

IssueRequest Wallet::create_issue_request(const std::string& issuer,
                                          const AttributeId& attribute,
                                          const AttributeKeyDirectory& directory) {
  const PublicKey& key = directory.lookup(issuer, attribute);
  PendingIssuance pending;
  pending.attribute_id = attribute;
  pending.serial = generate_serial();
  pending.issuer_key = key;
  pending.blinding_factor = sample_blinding_factor(key, rng_);
  HashedMessage msg = full_domain_hash(pending.serial, key);
  pending.blinded_value = blind(msg, pending.blinding_factor, key);
  pending_.push_back(pending);
  return {attribute, pending.blinded_value};
}

Credential& Wallet::finalize_credential(const Serial& pending_serial, u64 blinded_sig) {
  auto it = std::find_if(pending_.begin(), pending_.end(),
                         [&](const PendingIssuance& p) { return p.serial == pending_serial; });
  if (it == pending_.end()) throw NoSuchPending();
  u64 signature = unblind(blinded_sig, it->blinding_factor, it->issuer_key);
  HashedMessage msg = full_domain_hash(it->serial, it->issuer_key);
  if (!verify(msg, signature, it->issuer_key)) throw BadIssuerSignature();
  Credential cred;
  cred.attribute_id = it->attribute_id;
  cred.serial = it->serial;
  cred.signature = signature;
  cred.issuer_key = it->issuer_key;
  pending_.erase(it);
  ready_.push_back(cred);
  return ready_.back();
}

Presentation Wallet::take_for_presentation(const AttributeId& attribute) {
  bool saw_attribute = false;
  for (Credential& cred : ready_) {
    if (cred.attribute_id != attribute) continue;
    saw_attribute = true;
    if (cred.used) continue;
    cred.used = true;
    return {cred.attribute_id, cred.serial, cred.signature};
  }
  if (saw_attribute) throw CredentialAlreadyUsed();
  throw NoSuchCredential();
}

Presentation Wallet::take_for_presentation_serial(const Serial& serial) {
  auto it = std::find_if(ready_.begin(), ready_.end(),
                         [&](const Credential& c) { return c.serial == serial; });
  if (it == ready_.end()) throw NoSuchCredential();
  if (it->used) throw CredentialAlreadyUsed();
  it->used = true;
  return {it->attribute_id, it->serial, it->signature};
}

}  // namespace civic
