#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "civic/services.hpp"

// Adversarial analysis over transcripts. The auditor plays the strongest
// honest-but-curious observer: it holds every node's full transcript and
// tries to link issuance events to presentation events. With blind
// signatures the attempt must come out flat — every presentation is
// consistent with every issuance under the same key.

namespace civic {

struct ModulusTooLargeForExhaustive : DomainError {
  ModulusTooLargeForExhaustive()
      : DomainError("modulus too large to enumerate units exhaustively") {}
};
struct InsufficientAttributes : DomainError {
  InsufficientAttributes()
      : DomainError("key separation needs at least two attributes") {}
};

enum class MatrixMode { Exhaustive, Algebraic };

// Exhaustive search is capped at 2^20 so audits stay desk-scale.
inline constexpr u64 kMaxExhaustiveModulus = u64{1} << 20;

// cell(i, j): does some unit r satisfy b_i == m_j * r^e (mod n)?
// Rows are issuance events, columns presentation events, all under one
// attribute key.
struct ConsistencyMatrix {
  std::vector<u64> issuance_blinded;   // b_i
  std::vector<u64> presentation_m;     // m_j
  std::vector<std::vector<bool>> cell;
  // Exhaustive mode: number of witnesses per cell. Algebraic mode: 0.
  std::vector<std::vector<u64>> witness_count;
  MatrixMode mode = MatrixMode::Exhaustive;

  std::size_t rows() const { return issuance_blinded.size(); }
  std::size_t cols() const { return presentation_m.size(); }
  bool all_true() const;
};

ConsistencyMatrix consistency_matrix(
    const std::vector<TranscriptEvent>& issuer_transcript,
    const std::vector<std::vector<TranscriptEvent>>& rp_transcripts,
    const PublicKey& pub, MatrixMode mode);

// Count of consistent issuances per presentation (column sums).
std::vector<u64> anonymity_set_sizes(const ConsistencyMatrix& matrix);

enum class FindingClass { ExtraField, UnknownKind };

struct LeakFinding {
  FindingClass cls = FindingClass::ExtraField;
  std::string node;
  u64 timestamp = 0;
  std::string kind;
  std::string field;  // empty for UnknownKind

  nlohmann::json to_json() const;
};

using TranscriptSchemas = std::map<std::string, std::set<std::string>>;

// Allowed payload fields per event kind for transcripts produced by this
// toolkit's own nodes.
TranscriptSchemas default_transcript_schemas();

// One finding per payload field outside the allowed set, plus one per
// unknown event kind.
std::vector<LeakFinding> metadata_leak_scan(
    const std::map<std::string, std::vector<TranscriptEvent>>& transcripts,
    const TranscriptSchemas& allowed);

struct KeySeparationResult {
  bool structural_ok = false;
  std::vector<std::string> shared_modulus_pairs;  // human-readable detail
  u64 trials = 0;
  u64 cross_verifications = 0;  // signatures under A accepted under B
  double cross_rate = 0.0;
  bool statistical_ok = false;

  bool ok() const { return structural_ok && statistical_ok; }
  nlohmann::json to_json() const;
};

// Structural: distinct attributes of one issuer use distinct moduli.
// Statistical: genuine signatures under one key should cross-verify under
// another in well under 5% of trials (expected rate ~ 1/n).
// Cross-verification requires producing real signatures, hence the signing
// keys are an input alongside the public directory.
KeySeparationResult key_separation_check(const AttributeKeyDirectory& directory,
                                         const std::vector<BlindKeyPair>& signing_keys,
                                         u64 trials, std::mt19937_64& rng);

struct DoubleSpendAudit {
  u64 duplicate_presentations = 0;  // events beyond the first per serial
  u64 rejected_duplicates = 0;
  // Serials accepted more than once: a gossip-window race, reported, never
  // silently dropped.
  std::vector<Serial> accepted_duplicates;

  nlohmann::json to_json() const;
};

// Recomputes double spending from raw presentation events.
DoubleSpendAudit double_spend_audit(
    const std::vector<std::vector<TranscriptEvent>>& rp_transcripts);

struct AuditReport {
  std::map<std::string, std::vector<u64>> anonymity_set_sizes;  // per attribute
  std::map<std::string, u64> issuance_counts;                   // per attribute
  std::vector<LeakFinding> leaks;
  KeySeparationResult key_separation;
  bool key_separation_ran = false;
  DoubleSpendAudit double_spend;

  nlohmann::json to_json() const;
  std::string summary_table() const;
};

}  // namespace civic
