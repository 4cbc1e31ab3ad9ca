#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "civic/credentials.hpp"

// Issuer and relying-party node state machines, the canonical wire format,
// and spent-set gossip. Nodes exchange immutable messages; each node
// processes one message at a time and the spent-set check-and-insert is a
// single step within the node.

namespace civic {

struct MalformedMessage : DomainError {
  explicit MalformedMessage(const std::string& what)
      : DomainError("malformed message: " + what) {}
};

// Append-only protocol log entry. Payload field sets are schema-bound per
// kind; the auditor scans them for anything beyond the documented minimum.
struct TranscriptEvent {
  u64 timestamp = 0;
  std::string node;
  u64 seq = 0;
  std::string kind;
  nlohmann::json payload;

  nlohmann::json to_json() const;
  static TranscriptEvent from_json(const nlohmann::json& j);
};

// Grow-only set of consumed serials; merge is set union.
class SpentSet {
 public:
  // True if the serial was new.
  bool insert(const Serial& s) { return serials_.insert(s).second; }
  bool contains(const Serial& s) const { return serials_.count(s) != 0; }
  void merge(const SpentSet& other);
  std::size_t size() const { return serials_.size(); }
  const std::set<Serial>& serials() const { return serials_; }

 private:
  std::set<Serial> serials_;
};

enum class MsgKind { IssueRequest, IssueResponse, Presentation, Result, Gossip };

const char* msg_kind_name(MsgKind k);

struct WireMessage {
  MsgKind kind = MsgKind::IssueRequest;
  nlohmann::json body;

  bool operator==(const WireMessage&) const = default;
};

// Canonical encoding: one-line JSON, UTF-8, keys sorted, integers as
// lowercase hex strings, serials as 64-char lowercase hex. Strict schema:
// unknown fields, missing fields, or non-canonical values are rejected.
std::string encode(const WireMessage& msg);
WireMessage decode(const std::string& bytes);

WireMessage issue_request_message(const IssueRequest& req);
WireMessage presentation_message(const Presentation& pres);
IssueRequest issue_request_from_message(const WireMessage& msg);
Presentation presentation_from_message(const WireMessage& msg);

enum class DenialReason { NotEligible, QuotaExceeded, UnknownAttribute };

struct IssueOutcome {
  bool ok = false;
  u64 blinded_sig = 0;
  DenialReason reason = DenialReason::NotEligible;

  WireMessage to_message() const;
};

const char* denial_reason_name(DenialReason r);

// Issuer: knows who is asking (eligibility is decided on an authenticated
// citizen session) but only ever sees blinded values. Its transcript
// records {attribute_id, blinded_value} per grant, never a serial or an
// unblinded signature.
class IssuerNode {
 public:
  using Eligibility = std::function<bool(const std::string& session, const AttributeId&)>;

  IssuerNode(std::string name, Eligibility eligibility, unsigned quota_per_period = 3);

  void add_key(const BlindKeyPair& key);
  IssueOutcome handle_issue_request(const std::string& session, const IssueRequest& req,
                                    u64 now);

  const std::string& name() const { return name_; }
  const std::vector<TranscriptEvent>& transcript() const { return transcript_; }

 private:
  void log(u64 now, const std::string& kind, nlohmann::json payload);

  std::string name_;
  Eligibility eligibility_;
  unsigned quota_per_period_;
  std::map<AttributeId, BlindKeyPair> keys_;
  std::map<std::pair<std::string, AttributeId>, unsigned> grants_;
  std::vector<TranscriptEvent> transcript_;
};

enum class RejectReason { UnknownAttribute, BadSignature, DoubleSpend };

const char* reject_reason_name(RejectReason r);

struct PresentResult {
  bool accepted = false;
  RejectReason reason = RejectReason::UnknownAttribute;

  WireMessage to_message() const;
};

// Relying party: verifies a presentation against the public directory and
// its local spent set. A serial is accepted at most once per node,
// including serials learned via gossip.
class RelyingPartyNode {
 public:
  RelyingPartyNode(std::string name, std::string issuer,
                   const AttributeKeyDirectory* directory);

  PresentResult handle_presentation(const Presentation& pres, u64 now);

  const std::string& name() const { return name_; }
  const SpentSet& spent() const { return spent_; }
  const std::vector<TranscriptEvent>& transcript() const { return transcript_; }

  friend void gossip_spent(RelyingPartyNode& a, RelyingPartyNode& b, u64 now);

 private:
  void log(u64 now, const std::string& kind, nlohmann::json payload);

  std::string name_;
  std::string issuer_;
  const AttributeKeyDirectory* directory_;
  SpentSet spent_;
  std::vector<TranscriptEvent> transcript_;
};

// Pairwise anti-entropy: both spent sets become the union of the two.
// Commutative, associative, idempotent.
void gossip_spent(RelyingPartyNode& a, RelyingPartyNode& b, u64 now);

// Directory file: JSON array of {issuer, attribute, n (hex), e (hex)}.
nlohmann::json directory_to_json(const AttributeKeyDirectory& directory);
AttributeKeyDirectory directory_from_json(const nlohmann::json& j);

// Issuer-internal key material, same shape plus d. Auditor input.
nlohmann::json signing_keys_to_json(const std::vector<BlindKeyPair>& keys);
std::vector<BlindKeyPair> signing_keys_from_json(const nlohmann::json& j);

}  // namespace civic
