#include "civic/auditor.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "civic/hex.hpp"

namespace civic {

using nlohmann::json;

bool ConsistencyMatrix::all_true() const {
  for (const auto& row : cell)
    for (bool c : row)
      if (!c) return false;
  return !cell.empty();
}

namespace {

// Trial division; audit moduli are desk-scale by construction.
std::vector<u64> factor(u64 n) {
  std::vector<u64> primes;
  for (u64 p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      primes.push_back(p);
      while (n % p == 0) n /= p;
    }
  }
  if (n > 1) primes.push_back(n);
  return primes;
}

u64 carmichael_of(u64 n) {
  // Two distinct odd primes by key invariant; recover them from n.
  std::vector<u64> primes = factor(n);
  u64 lambda = 1;
  for (u64 p : primes) lambda = std::lcm(lambda, p - 1);
  return lambda;
}

}  // namespace

ConsistencyMatrix consistency_matrix(
    const std::vector<TranscriptEvent>& issuer_transcript,
    const std::vector<std::vector<TranscriptEvent>>& rp_transcripts,
    const PublicKey& pub, MatrixMode mode) {
  ConsistencyMatrix matrix;
  matrix.mode = mode;

  for (const TranscriptEvent& ev : issuer_transcript) {
    if (ev.kind != "issue" || ev.payload.value("attribute_id", "") != pub.attribute_id)
      continue;
    auto b = hex_to_u64(ev.payload.value("blinded_value", ""));
    if (b) matrix.issuance_blinded.push_back(*b);
  }
  for (const auto& transcript : rp_transcripts) {
    for (const TranscriptEvent& ev : transcript) {
      if (ev.kind != "present" || ev.payload.value("attribute_id", "") != pub.attribute_id)
        continue;
      auto serial = hex_to_bytes<32>(ev.payload.value("serial", ""));
      if (!serial) continue;
      matrix.presentation_m.push_back(full_domain_hash(*serial, pub).m);
    }
  }

  const std::size_t rows = matrix.issuance_blinded.size();
  const std::size_t cols = matrix.presentation_m.size();
  matrix.cell.assign(rows, std::vector<bool>(cols, false));
  matrix.witness_count.assign(rows, std::vector<u64>(cols, 0));

  if (mode == MatrixMode::Exhaustive) {
    if (pub.n > kMaxExhaustiveModulus) throw ModulusTooLargeForExhaustive();
    // One pass over all units per column: count occurrences of m * r^e.
    std::vector<u64> unit_powers;
    for (u64 r = 1; r < pub.n; ++r)
      if (std::gcd(r, pub.n) == 1) unit_powers.push_back(pow_mod(r, pub.e, pub.n));
    for (std::size_t j = 0; j < cols; ++j) {
      std::unordered_map<u64, u64> counts;
      for (u64 t : unit_powers) ++counts[mul_mod(matrix.presentation_m[j], t, pub.n)];
      for (std::size_t i = 0; i < rows; ++i) {
        auto it = counts.find(matrix.issuance_blinded[i]);
        u64 c = it == counts.end() ? 0 : it->second;
        matrix.witness_count[i][j] = c;
        matrix.cell[i][j] = c > 0;
      }
    }
  } else {
    // r^e == b * m^-1 is solvable iff the target is a unit, given that the
    // e-th power map is a bijection on units (gcd(e, lambda(n)) = 1).
    u64 lambda = carmichael_of(pub.n);
    if (std::gcd(pub.e, lambda) != 1)
      throw DomainError("algebraic mode requires gcd(e, lambda(n)) = 1");
    for (std::size_t j = 0; j < cols; ++j) {
      u64 m_inv = inv_mod(matrix.presentation_m[j], pub.n);
      for (std::size_t i = 0; i < rows; ++i) {
        u64 target = mul_mod(matrix.issuance_blinded[i], m_inv, pub.n);
        matrix.cell[i][j] = std::gcd(target, pub.n) == 1;
      }
    }
  }
  return matrix;
}

std::vector<u64> anonymity_set_sizes(const ConsistencyMatrix& matrix) {
  std::vector<u64> sizes(matrix.cols(), 0);
  for (std::size_t j = 0; j < matrix.cols(); ++j)
    for (std::size_t i = 0; i < matrix.rows(); ++i)
      if (matrix.cell[i][j]) ++sizes[j];
  return sizes;
}

nlohmann::json LeakFinding::to_json() const {
  return json{{"class", cls == FindingClass::ExtraField ? "extra_field" : "unknown_kind"},
              {"node", node},
              {"timestamp", timestamp},
              {"kind", kind},
              {"field", field}};
}

TranscriptSchemas default_transcript_schemas() {
  return {
      {"issue", {"attribute_id", "blinded_value"}},
      {"deny", {"attribute_id", "reason"}},
      {"present", {"attribute_id", "serial", "outcome"}},
      {"gossip", {"peer", "spent_size"}},
  };
}

std::vector<LeakFinding> metadata_leak_scan(
    const std::map<std::string, std::vector<TranscriptEvent>>& transcripts,
    const TranscriptSchemas& allowed) {
  std::vector<LeakFinding> findings;
  for (const auto& [node, events] : transcripts) {
    for (const TranscriptEvent& ev : events) {
      auto schema = allowed.find(ev.kind);
      if (schema == allowed.end()) {
        findings.push_back({FindingClass::UnknownKind, node, ev.timestamp, ev.kind, ""});
        continue;
      }
      for (const auto& [field, value] : ev.payload.items()) {
        if (!schema->second.count(field))
          findings.push_back({FindingClass::ExtraField, node, ev.timestamp, ev.kind, field});
      }
    }
  }
  return findings;
}

nlohmann::json KeySeparationResult::to_json() const {
  return json{{"structural_ok", structural_ok},
              {"shared_modulus_pairs", shared_modulus_pairs},
              {"trials", trials},
              {"cross_verifications", cross_verifications},
              {"cross_rate", cross_rate},
              {"statistical_ok", statistical_ok}};
}

KeySeparationResult key_separation_check(const AttributeKeyDirectory& directory,
                                         const std::vector<BlindKeyPair>& signing_keys,
                                         u64 trials, std::mt19937_64& rng) {
  const auto& entries = directory.entries();
  std::map<std::string, std::vector<std::pair<AttributeId, u64>>> by_issuer;
  for (const auto& [pair, key] : entries)
    by_issuer[pair.first].emplace_back(pair.second, key.n);
  bool multi = false;
  for (const auto& [issuer, attrs] : by_issuer)
    if (attrs.size() >= 2) multi = true;
  if (!multi) throw InsufficientAttributes();

  KeySeparationResult result;
  result.structural_ok = true;
  for (const auto& [issuer, attrs] : by_issuer) {
    for (std::size_t i = 0; i < attrs.size(); ++i) {
      for (std::size_t j = i + 1; j < attrs.size(); ++j) {
        if (attrs[i].second == attrs[j].second) {
          result.structural_ok = false;
          result.shared_modulus_pairs.push_back(issuer + ": " + attrs[i].first + " / " +
                                                attrs[j].first);
        }
      }
    }
  }

  // Sign a random serial genuinely under key A, then ask whether key B's
  // verifier would accept it.
  if (signing_keys.size() >= 2) {
    result.trials = trials;
    for (u64 t = 0; t < trials; ++t) {
      std::size_t a = static_cast<std::size_t>(uniform_u64(rng, 0, signing_keys.size() - 1));
      std::size_t b = a;
      while (b == a) b = static_cast<std::size_t>(uniform_u64(rng, 0, signing_keys.size() - 1));
      const BlindKeyPair& signer = signing_keys[a];
      const BlindKeyPair& other = signing_keys[b];
      Serial serial;
      for (std::size_t i = 0; i < serial.size(); i += 8) {
        u64 word = rng();
        for (int k = 0; k < 8; ++k)
          serial[i + k] = static_cast<std::uint8_t>(word >> (8 * (7 - k)));
      }
      u64 signature = sign_blinded(full_domain_hash(serial, signer.public_key()).m, signer);
      HashedMessage m_other = full_domain_hash(serial, other.public_key());
      if (verify(m_other, signature % other.n, other.public_key()))
        ++result.cross_verifications;
    }
    result.cross_rate =
        trials == 0 ? 0.0 : static_cast<double>(result.cross_verifications) / trials;
    result.statistical_ok = result.cross_rate < 0.05;
  } else {
    result.statistical_ok = true;  // structural-only when no signer material
  }
  return result;
}

nlohmann::json DoubleSpendAudit::to_json() const {
  json races = json::array();
  for (const Serial& s : accepted_duplicates) races.push_back(bytes_to_hex(s));
  return json{{"duplicate_presentations", duplicate_presentations},
              {"rejected_duplicates", rejected_duplicates},
              {"accepted_duplicates", races}};
}

DoubleSpendAudit double_spend_audit(
    const std::vector<std::vector<TranscriptEvent>>& rp_transcripts) {
  DoubleSpendAudit audit;
  std::map<Serial, u64> presented, accepted;
  for (const auto& transcript : rp_transcripts) {
    for (const TranscriptEvent& ev : transcript) {
      if (ev.kind != "present") continue;
      auto serial = hex_to_bytes<32>(ev.payload.value("serial", ""));
      if (!serial) continue;
      ++presented[*serial];
      if (ev.payload.value("outcome", "") == "accept") ++accepted[*serial];
    }
  }
  for (const auto& [serial, count] : presented)
    if (count > 1) audit.duplicate_presentations += count - 1;
  for (const auto& [serial, count] : accepted) {
    if (count > 1) audit.accepted_duplicates.push_back(serial);
  }
  u64 extra_accepts = 0;
  for (const auto& [serial, count] : accepted)
    if (count > 1) extra_accepts += count - 1;
  audit.rejected_duplicates = audit.duplicate_presentations - extra_accepts;
  return audit;
}

nlohmann::json AuditReport::to_json() const {
  json anonymity = json::object();
  for (const auto& [attr, sizes] : anonymity_set_sizes) anonymity[attr] = sizes;
  json counts = json::object();
  for (const auto& [attr, count] : issuance_counts) counts[attr] = count;
  json leak_list = json::array();
  for (const LeakFinding& f : leaks) leak_list.push_back(f.to_json());
  json j{{"anonymity_set_sizes", anonymity},
         {"issuance_counts", counts},
         {"leaks", leak_list},
         {"double_spend", double_spend.to_json()}};
  j["key_separation"] = key_separation_ran ? key_separation.to_json() : json();
  return j;
}

std::string AuditReport::summary_table() const {
  std::ostringstream out;
  out << "audit summary\n";
  out << "  attribute                     issuances  min-anon  max-anon\n";
  for (const auto& [attr, sizes] : anonymity_set_sizes) {
    u64 lo = sizes.empty() ? 0 : *std::min_element(sizes.begin(), sizes.end());
    u64 hi = sizes.empty() ? 0 : *std::max_element(sizes.begin(), sizes.end());
    u64 issued = issuance_counts.count(attr) ? issuance_counts.at(attr) : 0;
    out << "  " << attr;
    for (std::size_t i = attr.size(); i < 30; ++i) out << ' ';
    out << issued << "          " << lo << "         " << hi << "\n";
  }
  out << "  metadata leaks: " << leaks.size() << "\n";
  if (key_separation_ran) {
    out << "  key separation: structural " << (key_separation.structural_ok ? "pass" : "FAIL")
        << ", cross-verify rate " << key_separation.cross_rate << " ("
        << (key_separation.statistical_ok ? "pass" : "FAIL") << ")\n";
  } else {
    out << "  key separation: skipped (fewer than two attributes)\n";
  }
  out << "  double-spend recount: " << double_spend.duplicate_presentations << " duplicates, "
      << double_spend.rejected_duplicates << " rejected, "
      << double_spend.accepted_duplicates.size() << " accepted (race)\n";
  return out.str();
}

}  // namespace civic
