#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "civic/services.hpp"

// Deterministic multi-agent simulations: the transit-discount setting and
// the decentralized contact-tracing setting. A run is a pure function of
// its config; the scheduler advances a totally ordered, seed-derived event
// sequence.

namespace civic {

struct InvalidConfig : DomainError {
  explicit InvalidConfig(const std::string& what) : DomainError("invalid config: " + what) {}
};
struct UnsortedInput : DomainError {
  UnsortedInput() : DomainError("heard token list must be sorted by epoch") {}
};

struct ScenarioConfig {
  u64 seed = 0;
  unsigned citizens = 10;
  unsigned relying_parties = 2;
  unsigned credentials_per_citizen = 3;
  unsigned cheaters = 0;
  unsigned key_bits = 16;
  // Spent-set gossip after every presentation; disabling it opens the
  // documented eventual-consistency window.
  bool gossip_every_event = true;
  // Contact tracing.
  unsigned agents = 0;
  unsigned epochs = 0;
  unsigned proximity_events = 0;  // sampled pairs per epoch
  unsigned infected = 0;

  nlohmann::json to_json() const;
  static ScenarioConfig from_json(const nlohmann::json& j);
  void validate_transit() const;
  void validate_tracing() const;
};

struct SimulationReport {
  u64 accepts = 0;
  u64 double_spend_rejects = 0;
  u64 bad_signature_rejects = 0;
  u64 other_rejects = 0;
  u64 presentations_attempted = 0;

  std::map<std::string, std::vector<TranscriptEvent>> transcripts;  // per node
  AttributeKeyDirectory directory;
  std::vector<BlindKeyPair> issuer_keys;  // scenario-internal; auditor input

  // Ground truth for audits: serials the cheaters replayed.
  std::vector<Serial> replayed_serials;

  nlohmann::json to_json() const;  // counts only; transcripts ship as JSONL
};

SimulationReport run_transit_scenario(const ScenarioConfig& config);

// Per-epoch proximity token: first 16 bytes of SHA-256(seed || epoch_be8).
struct EphemeralToken {
  std::array<std::uint8_t, 16> bytes{};
  u64 epoch = 0;

  bool operator==(const EphemeralToken&) const = default;
  auto operator<=>(const EphemeralToken&) const = default;
};

using AgentSeed = std::array<std::uint8_t, 32>;

EphemeralToken rotate_ephemeral_id(const AgentSeed& agent_seed, u64 epoch);

struct ProximityEvent {
  u64 epoch = 0;
  unsigned agent_a = 0;
  unsigned agent_b = 0;
};

struct HeardToken {
  u64 epoch = 0;
  std::array<std::uint8_t, 16> token{};
};

// Intersects a time-sorted heard list with tokens recomputed from published
// seeds over [window_start, window_end). Pure.
std::set<u64> match_exposures(const std::vector<HeardToken>& heard,
                              const std::vector<AgentSeed>& published_seeds,
                              u64 window_start, u64 window_end);

struct ExposureReport {
  std::vector<unsigned> infected_agents;
  std::vector<unsigned> exposed_agents;
  // The bulletin board's total knowledge: published seeds, nothing else.
  std::vector<AgentSeed> bulletin_board;
  u64 window_start = 0;
  u64 window_end = 0;
  std::vector<ProximityEvent> ground_truth_events;  // scenario-internal

  nlohmann::json to_json() const;
};

// Infectious window: the last 14 epochs of the run.
inline constexpr u64 kInfectiousWindowEpochs = 14;

ExposureReport run_contact_tracing_scenario(const ScenarioConfig& config);

}  // namespace civic
