#include "civic/services.hpp"

#include "civic/hex.hpp"

namespace civic {

using nlohmann::json;

nlohmann::json TranscriptEvent::to_json() const {
  return json{{"timestamp", timestamp},
              {"node", node},
              {"seq", seq},
              {"kind", kind},
              {"payload", payload}};
}

TranscriptEvent TranscriptEvent::from_json(const json& j) {
  TranscriptEvent ev;
  ev.timestamp = j.at("timestamp").get<u64>();
  ev.node = j.at("node").get<std::string>();
  ev.seq = j.at("seq").get<u64>();
  ev.kind = j.at("kind").get<std::string>();
  ev.payload = j.at("payload");
  return ev;
}

void SpentSet::merge(const SpentSet& other) {
  serials_.insert(other.serials_.begin(), other.serials_.end());
}

const char* msg_kind_name(MsgKind k) {
  switch (k) {
    case MsgKind::IssueRequest: return "ISSUE_REQUEST";
    case MsgKind::IssueResponse: return "ISSUE_RESPONSE";
    case MsgKind::Presentation: return "PRESENTATION";
    case MsgKind::Result: return "RESULT";
    case MsgKind::Gossip: return "GOSSIP";
  }
  return "?";
}

const char* denial_reason_name(DenialReason r) {
  switch (r) {
    case DenialReason::NotEligible: return "not_eligible";
    case DenialReason::QuotaExceeded: return "quota_exceeded";
    case DenialReason::UnknownAttribute: return "unknown_attribute";
  }
  return "?";
}

const char* reject_reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::UnknownAttribute: return "unknown_attribute";
    case RejectReason::BadSignature: return "bad_signature";
    case RejectReason::DoubleSpend: return "double_spend";
  }
  return "?";
}

namespace {

bool is_canonical_hex_u64(const json& v) {
  return v.is_string() && hex_to_u64(v.get<std::string>()).has_value();
}

bool is_serial_hex(const json& v) {
  return v.is_string() && hex_to_bytes<32>(v.get<std::string>()).has_value();
}

bool is_nonempty_string(const json& v) {
  return v.is_string() && !v.get<std::string>().empty();
}

void require(bool ok, const char* what) {
  if (!ok) throw MalformedMessage(what);
}

// Exact field set: no extras, no omissions. Strictness is what makes the
// data-minimization scan meaningful.
void require_fields(const json& body, std::initializer_list<const char*> fields) {
  require(body.is_object(), "body must be an object");
  require(body.size() == fields.size(), "unexpected field count");
  for (const char* f : fields) require(body.contains(f), "missing field");
}

void validate_body(MsgKind kind, const json& body) {
  switch (kind) {
    case MsgKind::IssueRequest:
      require_fields(body, {"attribute_id", "blinded_value"});
      require(is_nonempty_string(body["attribute_id"]), "bad attribute_id");
      require(is_canonical_hex_u64(body["blinded_value"]), "bad blinded_value");
      break;
    case MsgKind::IssueResponse: {
      require(body.is_object() && body.contains("status"), "missing status");
      std::string status = body["status"].is_string() ? body["status"].get<std::string>() : "";
      if (status == "ok") {
        require_fields(body, {"status", "blinded_sig"});
        require(is_canonical_hex_u64(body["blinded_sig"]), "bad blinded_sig");
      } else if (status == "denied") {
        require_fields(body, {"status", "reason"});
        std::string reason = body["reason"].is_string() ? body["reason"].get<std::string>() : "";
        require(reason == "not_eligible" || reason == "quota_exceeded" ||
                    reason == "unknown_attribute",
                "bad denial reason");
      } else {
        throw MalformedMessage("bad status");
      }
      break;
    }
    case MsgKind::Presentation:
      require_fields(body, {"attribute_id", "serial", "signature"});
      require(is_nonempty_string(body["attribute_id"]), "bad attribute_id");
      require(is_serial_hex(body["serial"]), "bad serial");
      require(is_canonical_hex_u64(body["signature"]), "bad signature");
      break;
    case MsgKind::Result: {
      require(body.is_object() && body.contains("outcome"), "missing outcome");
      std::string outcome = body["outcome"].is_string() ? body["outcome"].get<std::string>() : "";
      if (outcome == "accept") {
        require_fields(body, {"outcome"});
      } else if (outcome == "reject") {
        require_fields(body, {"outcome", "reason"});
        std::string reason = body["reason"].is_string() ? body["reason"].get<std::string>() : "";
        require(reason == "unknown_attribute" || reason == "bad_signature" ||
                    reason == "double_spend",
                "bad reject reason");
      } else {
        throw MalformedMessage("bad outcome");
      }
      break;
    }
    case MsgKind::Gossip: {
      require_fields(body, {"serials"});
      require(body["serials"].is_array(), "serials must be an array");
      for (const json& s : body["serials"]) require(is_serial_hex(s), "bad serial in gossip");
      break;
    }
  }
}

}  // namespace

std::string encode(const WireMessage& msg) {
  validate_body(msg.kind, msg.body);
  json j{{"kind", msg_kind_name(msg.kind)}, {"body", msg.body}};
  return j.dump();
}

WireMessage decode(const std::string& bytes) {
  json j = json::parse(bytes, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw MalformedMessage("not valid JSON");
  require(j.is_object() && j.size() == 2 && j.contains("kind") && j.contains("body"),
          "top level must be {body, kind}");
  require(j["kind"].is_string(), "kind must be a string");
  std::string kind_name = j["kind"].get<std::string>();
  WireMessage msg;
  bool known = false;
  for (MsgKind k : {MsgKind::IssueRequest, MsgKind::IssueResponse, MsgKind::Presentation,
                    MsgKind::Result, MsgKind::Gossip}) {
    if (kind_name == msg_kind_name(k)) {
      msg.kind = k;
      known = true;
      break;
    }
  }
  require(known, "unknown kind");
  msg.body = j["body"];
  validate_body(msg.kind, msg.body);
  return msg;
}

WireMessage issue_request_message(const IssueRequest& req) {
  return {MsgKind::IssueRequest,
          json{{"attribute_id", req.attribute_id}, {"blinded_value", u64_to_hex(req.blinded_value)}}};
}

WireMessage presentation_message(const Presentation& pres) {
  return {MsgKind::Presentation,
          json{{"attribute_id", pres.attribute_id},
               {"serial", bytes_to_hex(pres.serial)},
               {"signature", u64_to_hex(pres.signature)}}};
}

IssueRequest issue_request_from_message(const WireMessage& msg) {
  if (msg.kind != MsgKind::IssueRequest) throw MalformedMessage("not an ISSUE_REQUEST");
  validate_body(msg.kind, msg.body);
  return {msg.body["attribute_id"].get<std::string>(),
          *hex_to_u64(msg.body["blinded_value"].get<std::string>())};
}

Presentation presentation_from_message(const WireMessage& msg) {
  if (msg.kind != MsgKind::Presentation) throw MalformedMessage("not a PRESENTATION");
  validate_body(msg.kind, msg.body);
  return {msg.body["attribute_id"].get<std::string>(),
          *hex_to_bytes<32>(msg.body["serial"].get<std::string>()),
          *hex_to_u64(msg.body["signature"].get<std::string>())};
}

WireMessage IssueOutcome::to_message() const {
  if (ok)
    return {MsgKind::IssueResponse,
            json{{"status", "ok"}, {"blinded_sig", u64_to_hex(blinded_sig)}}};
  return {MsgKind::IssueResponse, json{{"status", "denied"}, {"reason", denial_reason_name(reason)}}};
}

WireMessage PresentResult::to_message() const {
  if (accepted) return {MsgKind::Result, json{{"outcome", "accept"}}};
  return {MsgKind::Result, json{{"outcome", "reject"}, {"reason", reject_reason_name(reason)}}};
}

IssuerNode::IssuerNode(std::string name, Eligibility eligibility, unsigned quota_per_period)
    : name_(std::move(name)),
      eligibility_(std::move(eligibility)),
      quota_per_period_(quota_per_period) {}

void IssuerNode::add_key(const BlindKeyPair& key) {
  keys_[key.attribute_id] = key;
}

void IssuerNode::log(u64 now, const std::string& kind, json payload) {
  transcript_.push_back({now, name_, static_cast<u64>(transcript_.size()), kind,
                         std::move(payload)});
}

IssueOutcome IssuerNode::handle_issue_request(const std::string& session,
                                              const IssueRequest& req, u64 now) {
  auto key_it = keys_.find(req.attribute_id);
  if (key_it == keys_.end()) {
    log(now, "deny", json{{"attribute_id", req.attribute_id}, {"reason", "unknown_attribute"}});
    return {false, 0, DenialReason::UnknownAttribute};
  }
  if (!eligibility_(session, req.attribute_id)) {
    log(now, "deny", json{{"attribute_id", req.attribute_id}, {"reason", "not_eligible"}});
    return {false, 0, DenialReason::NotEligible};
  }
  unsigned& granted = grants_[{session, req.attribute_id}];
  if (granted >= quota_per_period_) {
    log(now, "deny", json{{"attribute_id", req.attribute_id}, {"reason", "quota_exceeded"}});
    return {false, 0, DenialReason::QuotaExceeded};
  }
  ++granted;
  u64 blinded_sig = sign_blinded(req.blinded_value, key_it->second);
  // The issuer's whole view of the credential: a blinded residue.
  log(now, "issue",
      json{{"attribute_id", req.attribute_id}, {"blinded_value", u64_to_hex(req.blinded_value)}});
  return {true, blinded_sig, DenialReason::NotEligible};
}

RelyingPartyNode::RelyingPartyNode(std::string name, std::string issuer,
                                   const AttributeKeyDirectory* directory)
    : name_(std::move(name)), issuer_(std::move(issuer)), directory_(directory) {}

void RelyingPartyNode::log(u64 now, const std::string& kind, json payload) {
  transcript_.push_back({now, name_, static_cast<u64>(transcript_.size()), kind,
                         std::move(payload)});
}

PresentResult RelyingPartyNode::handle_presentation(const Presentation& pres, u64 now) {
  json base{{"attribute_id", pres.attribute_id}, {"serial", bytes_to_hex(pres.serial)}};
  auto reject = [&](RejectReason reason) {
    base["outcome"] = std::string("reject:") + reject_reason_name(reason);
    log(now, "present", base);
    return PresentResult{false, reason};
  };
  if (!directory_->has(issuer_, pres.attribute_id)) return reject(RejectReason::UnknownAttribute);
  const PublicKey& key = directory_->lookup(issuer_, pres.attribute_id);
  HashedMessage msg = full_domain_hash(pres.serial, key);
  if (!verify(msg, pres.signature, key)) return reject(RejectReason::BadSignature);
  if (!spent_.insert(pres.serial)) return reject(RejectReason::DoubleSpend);
  base["outcome"] = "accept";
  log(now, "present", base);
  return {true, RejectReason::DoubleSpend};
}

nlohmann::json directory_to_json(const AttributeKeyDirectory& directory) {
  json out = json::array();
  for (const auto& [pair, key] : directory.entries()) {
    out.push_back(json{{"issuer", pair.first},
                       {"attribute", pair.second},
                       {"n", u64_to_hex(key.n)},
                       {"e", u64_to_hex(key.e)}});
  }
  return out;
}

AttributeKeyDirectory directory_from_json(const json& j) {
  if (!j.is_array()) throw MalformedMessage("directory must be a JSON array");
  AttributeKeyDirectory directory;
  for (const json& entry : j) {
    auto n = hex_to_u64(entry.value("n", ""));
    auto e = hex_to_u64(entry.value("e", ""));
    std::string attribute = entry.value("attribute", "");
    std::string issuer = entry.value("issuer", "");
    if (!n || !e || attribute.empty() || issuer.empty())
      throw MalformedMessage("bad directory entry");
    directory.insert_unvalidated(issuer, attribute, PublicKey{*n, *e, attribute});
  }
  return directory;
}

nlohmann::json signing_keys_to_json(const std::vector<BlindKeyPair>& keys) {
  json out = json::array();
  for (const BlindKeyPair& key : keys) {
    out.push_back(json{{"attribute", key.attribute_id},
                       {"n", u64_to_hex(key.n)},
                       {"e", u64_to_hex(key.e)},
                       {"d", u64_to_hex(key.d)}});
  }
  return out;
}

std::vector<BlindKeyPair> signing_keys_from_json(const json& j) {
  if (!j.is_array()) throw MalformedMessage("keys must be a JSON array");
  std::vector<BlindKeyPair> keys;
  for (const json& entry : j) {
    auto n = hex_to_u64(entry.value("n", ""));
    auto e = hex_to_u64(entry.value("e", ""));
    auto d = hex_to_u64(entry.value("d", ""));
    std::string attribute = entry.value("attribute", "");
    if (!n || !e || !d || attribute.empty()) throw MalformedMessage("bad key entry");
    keys.push_back(BlindKeyPair{*n, *e, *d, attribute});
  }
  return keys;
}

void gossip_spent(RelyingPartyNode& a, RelyingPartyNode& b, u64 now) {
  std::size_t before_a = a.spent_.size();
  std::size_t before_b = b.spent_.size();
  SpentSet a_copy = a.spent_;
  a.spent_.merge(b.spent_);
  b.spent_.merge(a_copy);
  if (a.spent_.size() != before_a)
    a.log(now, "gossip", json{{"peer", b.name_}, {"spent_size", a.spent_.size()}});
  if (b.spent_.size() != before_b)
    b.log(now, "gossip", json{{"peer", a.name_}, {"spent_size", b.spent_.size()}});
}

}  // namespace civic
